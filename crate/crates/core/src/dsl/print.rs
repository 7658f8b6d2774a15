use std::fmt::Write;

use crate::lifetime::FailureModel;

use super::{Model, TimeUnit};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text: sections in a fixed order, declarations in model order.
/// Floats use the shortest representation that reads back to the same value.
pub fn pretty_print(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", quote(&model.name));
    if let Some(m) = model.mission {
        let unit = match m.unit {
            TimeUnit::Years => "years",
            TimeUnit::Hours => "hours",
        };
        let _ = writeln!(out, "mission t={} unit={unit}", m.t);
    }

    let mut section = |lines: Vec<String>| {
        if !lines.is_empty() {
            out.push('\n');
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
    };
    section(
        model
            .events
            .iter()
            .map(|e| match e.model {
                FailureModel::Exponential { rate } => format!("event {} rate={rate}", e.id),
                FailureModel::ConstantProb { p } => format!("event {} prob={p}", e.id),
            })
            .collect(),
    );
    section(model.fts.iter().map(|f| format!("ft {} = {}", f.name, f.expr)).collect());
    section(model.boxes.iter().map(|b| format!("box {} = dec({})", b.name, b.ft)).collect());
    section(
        model
            .paths
            .iter()
            .map(|p| {
                let steps: Vec<String> = p.steps.iter().map(|(b, s)| format!("{b}:{}", s.keyword())).collect();
                format!("path {} = [{}]", p.name, steps.join(", "))
            })
            .collect(),
    );
    section(
        model
            .consequences
            .iter()
            .map(|c| {
                if c.paths.is_empty() {
                    format!("consequence {} = {{ }}", c.name)
                } else {
                    format!("consequence {} = {{ {} }}", c.name, c.paths.join(", "))
                }
            })
            .collect(),
    );
    section(
        model
            .loads
            .iter()
            .map(|l| {
                format!(
                    "load {} consequence={} mttr={} customers={}",
                    l.label, l.consequence, l.mttr_h, l.customers
                )
            })
            .collect(),
    );
    out
}
