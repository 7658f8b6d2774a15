//! Line-oriented text format for complete models.
//!
//! ```text
//! model "MCC"
//! mission t=1 unit=years
//! event Relay prob=0.1
//! event LF1 rate=0.96
//! ft FT_R = OR(Relay, NOT(LF1))
//! box R = dec(FT_R)
//! path P1 = [R:yes, T:skip]
//! consequence MS = { P1, P2 }
//! load A consequence=A_out mttr=12 customers=500
//! ```
//!
//! Events and fault trees share one namespace so an `ft` expression may refer
//! to either; every other declaration kind must have a name unique across the
//! whole model. Rates are failures per year; `unit=hours` on the mission line
//! is converted at the boundary.

mod check;
mod parse;
mod print;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::ccd::{self, ConsequenceBox, ConsequencePath, DecisionBox, Selector};
use crate::diagnostics::Location;
use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::lifetime::{instantiate, Assignment, BasicEvent};
use crate::metrics::{GridStudy, LoadSpec};

pub use check::{validate, validate_with_cap};
pub use parse::{parse, parse_bytes, MAX_EXPR_DEPTH, MAX_FT_EXPANSION};
pub use print::pretty_print;

pub const HOURS_PER_YEAR: f64 = 8760.0;
/// Mission time used when a model has no `mission` line.
pub const DEFAULT_MISSION_YEARS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Years,
    Hours,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mission {
    pub t: f64,
    pub unit: TimeUnit,
}

impl Mission {
    pub fn years(&self) -> f64 {
        match self.unit {
            TimeUnit::Years => self.t,
            TimeUnit::Hours => self.t / HOURS_PER_YEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FtDecl {
    pub name: String,
    pub expr: FtExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDecl {
    pub name: String,
    /// Fault tree or event whose failure the box asks about.
    pub ft: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathDecl {
    pub name: String,
    pub steps: Vec<(String, Selector)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsequenceDecl {
    pub name: String,
    pub paths: Vec<String>,
}

/// Source positions of declarations. They never take part in equality, so a
/// parsed model equals the same model built by hand.
#[derive(Debug, Clone, Default)]
pub struct Spans(pub HashMap<String, Location>);

impl PartialEq for Spans {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Event,
    Ft,
    Box,
    Path,
    Consequence,
    Load,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub mission: Option<Mission>,
    pub events: Vec<BasicEvent>,
    pub fts: Vec<FtDecl>,
    pub boxes: Vec<BoxDecl>,
    pub paths: Vec<PathDecl>,
    pub consequences: Vec<ConsequenceDecl>,
    pub loads: Vec<LoadSpec>,
    pub spans: Spans,
}

impl Default for Model {
    fn default() -> Self {
        Self {
            name: "unnamed".into(),
            mission: None,
            events: Vec::new(),
            fts: Vec::new(),
            boxes: Vec::new(),
            paths: Vec::new(),
            consequences: Vec::new(),
            loads: Vec::new(),
            spans: Spans::default(),
        }
    }
}

/// What [`Model::reduce`] changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReduceSummary {
    /// (path, box) pairs dropped because the box was irrelevant.
    pub dropped: Vec<(String, String)>,
    /// Paths removed because every box was irrelevant.
    pub removed_paths: Vec<String>,
}

impl Model {
    pub fn kind_of(&self, name: &str) -> Option<Kind> {
        if self.events.iter().any(|e| e.id == name) {
            Some(Kind::Event)
        } else if self.fts.iter().any(|f| f.name == name) {
            Some(Kind::Ft)
        } else if self.boxes.iter().any(|b| b.name == name) {
            Some(Kind::Box)
        } else if self.paths.iter().any(|p| p.name == name) {
            Some(Kind::Path)
        } else if self.consequences.iter().any(|c| c.name == name) {
            Some(Kind::Consequence)
        } else if self.loads.iter().any(|l| l.label == name) {
            Some(Kind::Load)
        } else {
            None
        }
    }

    pub fn location(&self, name: &str) -> Option<Location> {
        self.spans.0.get(name).copied()
    }

    pub fn mission_years(&self) -> f64 {
        self.mission.map_or(DEFAULT_MISSION_YEARS, |m| m.years())
    }

    pub fn assignment(&self, t_years: f64) -> Result<Assignment> {
        instantiate(&self.events, t_years)
    }

    /// Fault tree of an event or `ft` name with every `ft` reference
    /// expanded down to basic events.
    pub fn resolve_ft(&self, name: &str) -> Result<FtExpr> {
        let fts: HashMap<&str, &FtExpr> = self.fts.iter().map(|f| (f.name.as_str(), &f.expr)).collect();
        let events: HashSet<&str> = self.events.iter().map(|e| e.id.as_str()).collect();
        let budget = RefCell::new(MAX_FT_EXPANSION);
        let mut stack = Vec::new();
        expand(name, &fts, &events, &budget, &mut stack)
    }

    pub fn decision_box(&self, name: &str, selector: Selector) -> Result<DecisionBox> {
        let decl = self
            .boxes
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownTarget(name.to_string()))?;
        Ok(DecisionBox::new(name, self.resolve_ft(&decl.ft)?, selector))
    }

    pub fn path(&self, name: &str) -> Result<ConsequencePath> {
        let decl = self
            .paths
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownTarget(name.to_string()))?;
        let boxes = decl
            .steps
            .iter()
            .map(|(b, sel)| self.decision_box(b, *sel))
            .collect::<Result<_>>()?;
        Ok(ConsequencePath::new(name, boxes))
    }

    pub fn consequence_box(&self, name: &str) -> Result<ConsequenceBox> {
        let decl = self
            .consequences
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownTarget(name.to_string()))?;
        let paths = decl.paths.iter().map(|p| self.path(p)).collect::<Result<_>>()?;
        Ok(ConsequenceBox::new(name, paths))
    }

    pub fn consequence_boxes(&self) -> Result<Vec<ConsequenceBox>> {
        self.consequences.iter().map(|c| self.consequence_box(&c.name)).collect()
    }

    pub fn grid_study(&self, t_years: f64) -> Result<GridStudy> {
        GridStudy::new(self.loads.clone(), t_years)
    }

    /// Drops irrelevant boxes from every path and removes paths left empty,
    /// together with their mentions in consequences.
    pub fn reduce(&self) -> (Model, ReduceSummary) {
        let mut summary = ReduceSummary::default();
        let mut out = self.clone();
        out.paths = Vec::with_capacity(self.paths.len());
        for p in &self.paths {
            let mut steps = Vec::with_capacity(p.steps.len());
            for (b, sel) in &p.steps {
                if *sel == Selector::Irrelevant {
                    summary.dropped.push((p.name.clone(), b.clone()));
                } else {
                    steps.push((b.clone(), *sel));
                }
            }
            if steps.is_empty() && !p.steps.is_empty() {
                summary.removed_paths.push(p.name.clone());
            } else {
                out.paths.push(PathDecl { name: p.name.clone(), steps });
            }
        }
        let removed: HashSet<&str> = summary.removed_paths.iter().map(String::as_str).collect();
        for c in &mut out.consequences {
            c.paths.retain(|p| !removed.contains(p.as_str()));
        }
        (out, summary)
    }
}

fn expand(
    name: &str,
    fts: &HashMap<&str, &FtExpr>,
    events: &HashSet<&str>,
    budget: &RefCell<usize>,
    stack: &mut Vec<String>,
) -> Result<FtExpr> {
    {
        let mut left = budget.borrow_mut();
        if *left == 0 {
            return Err(Error::InvalidArgument(format!(
                "fault tree `{name}` expands beyond {MAX_FT_EXPANSION} nodes"
            )));
        }
        *left -= 1;
    }
    if events.contains(name) {
        return Ok(FtExpr::atomic(name));
    }
    let expr = fts.get(name).ok_or_else(|| Error::UnknownEvent(name.to_string()))?;
    if stack.iter().any(|s| s == name) {
        return Err(Error::InvalidArgument(format!("fault tree `{name}` refers to itself")));
    }
    stack.push(name.to_string());
    let out = expand_expr(expr, fts, events, budget, stack);
    stack.pop();
    out
}

fn expand_expr(
    e: &FtExpr,
    fts: &HashMap<&str, &FtExpr>,
    events: &HashSet<&str>,
    budget: &RefCell<usize>,
    stack: &mut Vec<String>,
) -> Result<FtExpr> {
    Ok(match e {
        FtExpr::Atomic(id) => expand(id, fts, events, budget, stack)?,
        FtExpr::Not(c) => FtExpr::Not(Box::new(expand_expr(c, fts, events, budget, stack)?)),
        FtExpr::And(cs) => FtExpr::And(
            cs.iter().map(|c| expand_expr(c, fts, events, budget, stack)).collect::<Result<_>>()?,
        ),
        FtExpr::Or(cs) => FtExpr::Or(
            cs.iter().map(|c| expand_expr(c, fts, events, budget, stack)).collect::<Result<_>>()?,
        ),
    })
}

/// Core-level reduction of all consequence boxes, for comparison with
/// [`Model::reduce`].
pub fn reduce_core(model: &Model) -> Result<ccd::Reduction> {
    Ok(ccd::reduce(&model.consequence_boxes()?))
}

/// Load probabilities keyed by load label, from per-consequence values.
pub fn load_probs(model: &Model, by_consequence: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    model
        .loads
        .iter()
        .map(|l| {
            let p = by_consequence
                .get(&l.consequence)
                .ok_or_else(|| Error::MissingLoadProb(l.label.clone()))?;
            Ok((l.label.clone(), *p))
        })
        .collect()
}
