use std::collections::{HashMap, HashSet};

use crate::ccd::{ConsequenceBox, Selector};
use crate::diagnostics::{has_errors, Code, Diagnostic};
use crate::error::Error;
use crate::fault_tree::FtExpr;
use crate::lifetime::{Assignment, FailureModel};
use crate::oracle::exact_prob;
use crate::space::{FiniteSpace, DEFAULT_ENUMERATION_CAP, EXACT_TOL};
use crate::target::Target;

use super::{Model, TimeUnit, MAX_FT_EXPANSION};

/// Fault trees nested deeper than this after expansion are rejected.
const MAX_RESOLVED_DEPTH: usize = 256;

fn located(model: &Model, name: &str, d: Diagnostic) -> Diagnostic {
    match model.location(name) {
        Some(loc) => d.at(loc.line, loc.col),
        None => d,
    }
}

/// Name resolution: duplicates, dangling references, cycles between fault
/// trees and runaway expansion. Every finding is an error.
pub(crate) fn structure(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    let names = model
        .events
        .iter()
        .map(|e| &e.id)
        .chain(model.fts.iter().map(|f| &f.name))
        .chain(model.boxes.iter().map(|b| &b.name))
        .chain(model.paths.iter().map(|p| &p.name))
        .chain(model.consequences.iter().map(|c| &c.name))
        .chain(model.loads.iter().map(|l| &l.label));
    for n in names {
        if !seen.insert(n.as_str()) {
            diags.push(located(model, n, Diagnostic::error(Code::DuplicateName, format!("`{n}` is declared twice"))));
        }
    }

    let events: HashSet<&str> = model.events.iter().map(|e| e.id.as_str()).collect();
    let fts: HashMap<&str, &FtExpr> = model.fts.iter().map(|f| (f.name.as_str(), &f.expr)).collect();
    let boxes: HashSet<&str> = model.boxes.iter().map(|b| b.name.as_str()).collect();
    let paths: HashSet<&str> = model.paths.iter().map(|p| p.name.as_str()).collect();
    let consequences: HashSet<&str> = model.consequences.iter().map(|c| c.name.as_str()).collect();
    let unresolved = |owner: &str, what: &str, target: &str| {
        located(
            model,
            owner,
            Diagnostic::error(Code::UnresolvedReference, format!("`{owner}` refers to unknown {what} `{target}`")),
        )
    };

    for f in &model.fts {
        for leaf in f.expr.leaf_set() {
            if !events.contains(leaf) && !fts.contains_key(leaf) {
                diags.push(unresolved(&f.name, "event or fault tree", leaf));
            }
        }
    }
    for b in &model.boxes {
        if !events.contains(b.ft.as_str()) && !fts.contains_key(b.ft.as_str()) {
            diags.push(unresolved(&b.name, "event or fault tree", &b.ft));
        }
    }
    for p in &model.paths {
        for (b, _) in &p.steps {
            if !boxes.contains(b.as_str()) {
                diags.push(unresolved(&p.name, "box", b));
            }
        }
    }
    for c in &model.consequences {
        for p in &c.paths {
            if !paths.contains(p.as_str()) {
                diags.push(unresolved(&c.name, "path", p));
            }
        }
    }
    for l in &model.loads {
        if !consequences.contains(l.consequence.as_str()) {
            diags.push(unresolved(&l.label, "consequence", &l.consequence));
        }
    }
    if !diags.is_empty() {
        return diags;
    }

    // Depth-first search over ft references, iterative so long alias chains
    // cannot exhaust the stack. Post-order gives a dependency order.
    let refs: HashMap<&str, Vec<&str>> = model
        .fts
        .iter()
        .map(|f| {
            let out = f.expr.leaf_set().into_iter().filter(|l| fts.contains_key(l)).collect();
            (f.name.as_str(), out)
        })
        .collect();
    let mut state: HashMap<&str, u8> = HashMap::new();
    let mut order = Vec::new();
    for f in &model.fts {
        if state.contains_key(f.name.as_str()) {
            continue;
        }
        let mut stack = vec![(f.name.as_str(), 0usize)];
        state.insert(f.name.as_str(), 1);
        while let Some((node, next)) = stack.pop() {
            if let Some(&child) = refs[node].get(next) {
                stack.push((node, next + 1));
                match state.get(child) {
                    None => {
                        state.insert(child, 1);
                        stack.push((child, 0));
                    }
                    Some(1) => {
                        diags.push(located(
                            model,
                            node,
                            Diagnostic::error(
                                Code::CyclicReference,
                                format!("fault tree `{node}` refers back to `{child}`"),
                            ),
                        ));
                        return diags;
                    }
                    _ => {}
                }
            } else {
                state.insert(node, 2);
                order.push(node);
            }
        }
    }

    let mut shape: HashMap<&str, (usize, usize)> = HashMap::new();
    for name in order {
        let s = expanded_shape(fts[name], &shape);
        if s.0 > MAX_FT_EXPANSION || s.1 > MAX_RESOLVED_DEPTH {
            diags.push(located(
                model,
                name,
                Diagnostic::error(
                    Code::ParseError,
                    format!(
                        "fault tree `{name}` expands beyond {MAX_FT_EXPANSION} nodes or {MAX_RESOLVED_DEPTH} levels"
                    ),
                ),
            ));
            return diags;
        }
        shape.insert(name, s);
    }
    diags
}

/// (node count, depth) after expansion, saturating.
fn expanded_shape(e: &FtExpr, done: &HashMap<&str, (usize, usize)>) -> (usize, usize) {
    match e {
        FtExpr::Atomic(id) => done.get(id.as_str()).copied().unwrap_or((1, 1)),
        FtExpr::Not(c) => {
            let (n, d) = expanded_shape(c, done);
            (n.saturating_add(1), d + 1)
        }
        FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().fold((1, 1), |(n, d), c| {
            let (cn, cd) = expanded_shape(c, done);
            (n.saturating_add(cn), d.max(cd + 1))
        }),
    }
}

pub fn validate(model: &Model) -> Vec<Diagnostic> {
    validate_with_cap(model, DEFAULT_ENUMERATION_CAP)
}

/// Static checks of the hypotheses behind the closed forms, plus value and
/// unit sanity. `cap` bounds the oracle used for overlap and coverage checks.
pub fn validate_with_cap(model: &Model, cap: usize) -> Vec<Diagnostic> {
    let mut diags = structure(model);
    values(model, &mut diags);
    if has_errors(&diags) {
        return diags;
    }
    let is_event = |id: &str| model.events.iter().any(|e| e.id == id);

    for f in &model.fts {
        match model.resolve_ft(&f.name) {
            Ok(ft) => {
                for d in ft.validate(&is_event) {
                    let d = Diagnostic { message: format!("ft `{}`: {}", f.name, d.message), ..d };
                    diags.push(located(model, &f.name, d));
                }
            }
            Err(e) => diags.push(located(model, &f.name, Diagnostic::error(Code::InvalidValue, e.to_string()))),
        }
    }

    for p in &model.paths {
        if p.steps.is_empty() {
            diags.push(located(
                model,
                &p.name,
                Diagnostic::error(Code::EmptyPath, format!("path `{}` has no decision boxes", p.name)),
            ));
            continue;
        }
        if p.steps.iter().all(|(_, s)| *s == Selector::Irrelevant) {
            diags.push(located(
                model,
                &p.name,
                Diagnostic::warning(
                    Code::AllSkipPath,
                    format!("path `{}` skips every box and denotes the whole space", p.name),
                ),
            ));
        }
        let path = match model.path(&p.name) {
            Ok(path) => path,
            Err(e) => {
                diags.push(located(model, &p.name, Diagnostic::error(Code::InvalidValue, e.to_string())));
                continue;
            }
        };
        // Shared leaves inside one box are already reported on the ft.
        if let Err(Error::SharedLeafAcrossBoxes { leaf, first, second }) = path.check_closed_form() {
            diags.push(located(
                model,
                &p.name,
                Diagnostic::error(
                    Code::SharedLeafAcrossBoxes,
                    format!("path `{}`: event `{leaf}` feeds both box `{first}` and box `{second}`", p.name),
                ),
            ));
        }
    }
    if has_errors(&diags) {
        return diags;
    }

    let half = Assignment::from_probs(model.events.iter().map(|e| (e.id.clone(), 0.5))).ok();
    let mut all_paths = Vec::new();
    for c in &model.consequences {
        let Ok(cbox) = model.consequence_box(&c.name) else { continue };
        if cbox.paths.is_empty() {
            diags.push(located(
                model,
                &c.name,
                Diagnostic::warning(
                    Code::EmptyConsequence,
                    format!("consequence `{}` has no paths and evaluates to 0", c.name),
                ),
            ));
            continue;
        }
        let space = half.as_ref().and_then(|h| {
            let leaves = cbox.leaves();
            if leaves.len() > cap {
                return None;
            }
            let probs: Vec<(&str, f64)> = leaves.iter().map(|l| (*l, h.get(l).unwrap_or(0.5))).collect();
            FiniteSpace::build_with_cap(&probs, cap).ok()
        });
        for d in cbox.validate(space.as_ref()) {
            diags.push(located(model, &c.name, d));
        }
        all_paths.extend(cbox.paths);
    }

    // Coverage: do the consequences together exhaust every component state?
    if !all_paths.is_empty() && !has_errors(&diags) {
        if let Some(h) = &half {
            let union = ConsequenceBox::new("all", all_paths);
            if let Ok(v) = exact_prob(Target::Box(&union), h, cap) {
                if 1.0 - v.probability > EXACT_TOL {
                    diags.push(Diagnostic::notice(
                        Code::IncompleteCcd,
                        "the consequences do not cover every component state",
                    ));
                }
            }
        }
    }
    diags
}

fn values(model: &Model, diags: &mut Vec<Diagnostic>) {
    let invalid = |name: &str, msg: String| located(model, name, Diagnostic::error(Code::InvalidValue, msg));
    for e in &model.events {
        match e.model {
            FailureModel::Exponential { rate } if !(rate >= 0.0 && rate.is_finite()) => {
                diags.push(invalid(&e.id, format!("event `{}`: rate must be non-negative, got {rate}", e.id)))
            }
            FailureModel::ConstantProb { p } if !(0.0..=1.0).contains(&p) => {
                diags.push(invalid(&e.id, format!("event `{}`: probability must lie in [0, 1], got {p}", e.id)))
            }
            FailureModel::Exponential { rate } if rate > 100.0 => diags.push(located(
                model,
                &e.id,
                Diagnostic::warning(
                    Code::SuspiciousUnit,
                    format!("event `{}`: rate {rate} per year is unusually high; rates are per year", e.id),
                ),
            )),
            _ => {}
        }
    }
    for l in &model.loads {
        if !(l.mttr_h > 0.0 && l.mttr_h.is_finite()) {
            diags.push(invalid(&l.label, format!("load `{}`: MTTR must be positive, got {}", l.label, l.mttr_h)));
        }
        if l.customers == 0 {
            diags.push(invalid(&l.label, format!("load `{}`: customer count must be positive", l.label)));
        }
    }
    if let Some(m) = model.mission {
        if !(m.t >= 0.0 && m.t.is_finite()) {
            diags.push(Diagnostic::error(Code::InvalidValue, format!("mission time must be non-negative, got {}", m.t)));
        } else if m.unit == TimeUnit::Years && m.t > 200.0 {
            diags.push(Diagnostic::warning(
                Code::SuspiciousUnit,
                format!("mission time {} years looks like hours; add `unit=hours`", m.t),
            ));
        } else if m.unit == TimeUnit::Hours && m.t > 0.0 && m.t < 1.0 {
            diags.push(Diagnostic::warning(
                Code::SuspiciousUnit,
                format!("mission time {} hours is under one hour; did you mean `unit=years`?", m.t),
            ));
        }
    }
}
