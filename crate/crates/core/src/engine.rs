//! Named-target evaluation on a parsed model by closed form, exact oracle or
//! Monte-Carlo sampling, and SAIDI by every available route.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ccd::{ConsequenceBox, ConsequencePath, Selector};
use crate::dsl::{load_probs, Kind, Model};
use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::lifetime::Assignment;
use crate::metrics::{partial_blackout_prob, saidi_breakdown, SaidiReport};
use crate::montecarlo::{mcs_joint, McsEstimate};
use crate::oracle::{exact_prob, OracleRoute};
use crate::space::FiniteSpace;
use crate::target::Target;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Closed,
    Oracle,
    Mcs { samples: usize, seed: u64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Oracle => "oracle",
            Method::Mcs { .. } => "mcs",
        }
    }
}

/// A model name turned into something with a probability.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Ft(FtExpr),
    Path(ConsequencePath),
    Box(ConsequenceBox),
}

impl Resolved {
    pub fn target(&self) -> Target<'_> {
        match self {
            Resolved::Ft(ft) => Target::Ft(ft),
            Resolved::Path(p) => Target::Path(p),
            Resolved::Box(b) => Target::Box(b),
        }
    }
}

/// Events and fault trees resolve to their failure event, a decision box
/// to the failure of its fault tree and a load to its consequence.
pub fn resolve_target(model: &Model, name: &str) -> Result<(Kind, Resolved)> {
    let kind = model.kind_of(name).ok_or_else(|| Error::UnknownTarget(name.to_string()))?;
    let resolved = match kind {
        Kind::Event | Kind::Ft => Resolved::Ft(model.resolve_ft(name)?),
        Kind::Box => Resolved::Ft(model.decision_box(name, Selector::No)?.failure),
        Kind::Path => Resolved::Path(model.path(name)?),
        Kind::Consequence => Resolved::Box(model.consequence_box(name)?),
        Kind::Load => {
            let load = model.loads.iter().find(|l| l.label == name).expect("kind_of found it");
            Resolved::Box(model.consequence_box(&load.consequence)?)
        }
    };
    Ok((kind, resolved))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub target: String,
    pub kind: Kind,
    pub method: &'static str,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRoute>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcs: Option<McsEstimate>,
}

/// Oracle space over a target's events when it fits under the cap.
fn small_space(target: Target<'_>, assign: &Assignment, cap: usize) -> Result<Option<FiniteSpace>> {
    let leaves = target.leaves();
    if leaves.len() > cap {
        return Ok(None);
    }
    let probs = leaves.iter().map(|l| Ok((*l, assign.get(l)?))).collect::<Result<Vec<_>>>()?;
    Ok(Some(FiniteSpace::build_with_cap(&probs, cap)?))
}

pub fn closed_prob(target: Target<'_>, assign: &Assignment, cap: usize) -> Result<f64> {
    match target {
        Target::Ft(ft) => ft.prob_closed(assign),
        Target::Path(p) => p.prob_closed(assign),
        Target::Box(b) => b.prob_closed(assign, small_space(target, assign, cap)?.as_ref()),
    }
}

pub fn evaluate(model: &Model, name: &str, method: Method, t_years: f64, cap: usize) -> Result<Evaluation> {
    let (kind, resolved) = resolve_target(model, name)?;
    let assign = model.assignment(t_years)?;
    let target = resolved.target();
    let mut eval = Evaluation {
        target: name.to_string(),
        kind,
        method: method.name(),
        probability: 0.0,
        oracle: None,
        mcs: None,
    };
    match method {
        Method::Closed => eval.probability = closed_prob(target, &assign, cap)?,
        Method::Oracle => {
            let v = exact_prob(target, &assign, cap)?;
            eval.probability = v.probability;
            eval.oracle = Some(v.route);
        }
        Method::Mcs { samples, seed } => {
            let est = mcs_joint(&[target], &assign, samples, seed)?.remove(0);
            eval.probability = est.mean;
            eval.mcs = Some(est);
        }
    }
    Ok(eval)
}

/// Fault trees of the supplies when the consequence reads "exactly one of
/// these supplies is out": one path per supply, each with that supply's box
/// on NO and every other box on YES.
pub fn exactly_one_supplies(cbox: &ConsequenceBox) -> Option<Vec<FtExpr>> {
    let first = cbox.paths.first()?;
    let ids: Vec<&str> = first.boxes.iter().map(|b| b.id.as_str()).collect();
    if cbox.paths.len() != ids.len() {
        return None;
    }
    let mut out_boxes = Vec::new();
    for p in &cbox.paths {
        let mut these: Vec<&str> = p.boxes.iter().map(|b| b.id.as_str()).collect();
        let mut want = ids.clone();
        these.sort_unstable();
        want.sort_unstable();
        if these != want || p.boxes.iter().any(|b| b.selector == Selector::Irrelevant) {
            return None;
        }
        let mut no = p.boxes.iter().filter(|b| b.selector == Selector::No);
        let out = no.next()?;
        if no.next().is_some() || out_boxes.contains(&out.id.as_str()) {
            return None;
        }
        out_boxes.push(out.id.as_str());
    }
    Some(first.boxes.iter().map(|b| b.failure.clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadRow {
    pub label: String,
    pub consequence: String,
    pub closed: f64,
    pub oracle: f64,
    pub oracle_route: OracleRoute,
    /// Present when the consequence has the exactly-one-supply-out shape.
    pub exactly_one: Option<f64>,
    pub mcs: Option<McsEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaidiRoutes {
    pub t_years: f64,
    pub closed: SaidiReport,
    pub oracle: f64,
    pub exactly_one: Option<f64>,
    pub mcs: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub loads: Vec<LoadRow>,
}

/// SAIDI from closed-form, oracle, exactly-one and (optionally) sampled
/// load probabilities. The sampled route draws all loads jointly.
pub fn saidi_routes(model: &Model, t_years: f64, cap: usize, mcs: Option<(usize, u64)>) -> Result<SaidiRoutes> {
    let study = model.grid_study(t_years)?;
    let assign = model.assignment(t_years)?;
    let mut boxes = Vec::new();
    for l in &study.loads {
        boxes.push(model.consequence_box(&l.consequence)?);
    }
    let targets: Vec<Target<'_>> = boxes.iter().map(Target::Box).collect();
    let sampled = match mcs {
        Some((n, seed)) => Some(mcs_joint(&targets, &assign, n, seed)?),
        None => None,
    };

    let mut rows = Vec::new();
    let (mut closed, mut oracle, mut one, mut sim) =
        (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for (i, (l, cbox)) in study.loads.iter().zip(&boxes).enumerate() {
        let c = closed_prob(Target::Box(cbox), &assign, cap)?;
        let o = exact_prob(Target::Box(cbox), &assign, cap)?;
        let e = match exactly_one_supplies(cbox) {
            Some(fts) => {
                let fors = fts.iter().map(|f| f.prob_closed(&assign)).collect::<Result<Vec<_>>>()?;
                Some(partial_blackout_prob(&fors)?)
            }
            None => None,
        };
        let m = sampled.as_ref().map(|s| s[i].clone());
        closed.insert(l.consequence.clone(), c);
        oracle.insert(l.consequence.clone(), o.probability);
        if let Some(e) = e {
            one.insert(l.consequence.clone(), e);
        }
        if let Some(m) = &m {
            sim.insert(l.consequence.clone(), m.mean);
        }
        rows.push(LoadRow {
            label: l.label.clone(),
            consequence: l.consequence.clone(),
            closed: c,
            oracle: o.probability,
            oracle_route: o.route,
            exactly_one: e,
            mcs: m,
        });
    }
    let saidi_of = |by: &BTreeMap<String, f64>| -> Result<f64> {
        Ok(saidi_breakdown(&study, &load_probs(model, by)?)?.saidi_hours)
    };
    Ok(SaidiRoutes {
        t_years,
        closed: saidi_breakdown(&study, &load_probs(model, &closed)?)?,
        oracle: saidi_of(&oracle)?,
        exactly_one: if one.len() == rows.len() { Some(saidi_of(&one)?) } else { None },
        mcs: if sampled.is_some() { Some(saidi_of(&sim)?) } else { None },
        samples: mcs.map(|m| m.0),
        seed: mcs.map(|m| m.1),
        loads: rows,
    })
}
