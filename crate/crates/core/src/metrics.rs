//! Generation-adequacy indices: forced outage rate and SAIDI.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::lifetime::{instantiate, BasicEvent};

/// One load point: its failure consequence, repair time and customer count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSpec {
    pub label: String,
    /// Name of the consequence box whose event is the load failure.
    pub consequence: String,
    /// Mean time to repair, hours per interruption.
    pub mttr_h: f64,
    pub customers: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridStudy {
    pub loads: Vec<LoadSpec>,
    pub t_years: f64,
}

impl GridStudy {
    pub fn new(loads: Vec<LoadSpec>, t_years: f64) -> Result<Self> {
        if loads.is_empty() {
            return Err(Error::InvalidArgument("a grid study needs at least one load".into()));
        }
        let mut seen = HashSet::new();
        for l in &loads {
            if !seen.insert(l.label.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate load label `{}`", l.label)));
            }
            if !(l.mttr_h > 0.0 && l.mttr_h.is_finite()) {
                return Err(Error::InvalidArgument(format!("load `{}`: MTTR must be positive", l.label)));
            }
            if l.customers == 0 {
                return Err(Error::InvalidArgument(format!("load `{}`: customer count must be positive", l.label)));
            }
        }
        if t_years.is_nan() || t_years < 0.0 {
            return Err(Error::NegativeTime(t_years));
        }
        Ok(Self { loads, t_years })
    }
}

/// Forced outage rate of a plant: its fault tree evaluated on the
/// exponential failure probabilities at mission time `t`.
pub fn forced_outage_rate(ft: &FtExpr, events: &[BasicEvent], t: f64) -> Result<f64> {
    ft.prob_closed(&instantiate(events, t)?)
}

/// Probability that exactly one of the independent supplies is out.
pub fn partial_blackout_prob(gen_fors: &[f64]) -> Result<f64> {
    for (i, &p) in gen_fors.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { id: format!("supply {i}"), value: p });
        }
    }
    let mut total = 0.0;
    for (i, &p) in gen_fors.iter().enumerate() {
        let others: f64 = gen_fors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &q)| 1.0 - q)
            .product();
        total += p * others;
    }
    Ok(total)
}

/// Σ(prob × MTTR × customers) / Σ customers, in hours per customer.
pub fn saidi(study: &GridStudy, load_probs: &BTreeMap<String, f64>) -> Result<f64> {
    Ok(saidi_breakdown(study, load_probs)?.saidi_hours)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadTerm {
    pub label: String,
    pub probability: f64,
    pub mttr_h: f64,
    pub customers: u64,
    /// probability × MTTR × customers.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaidiReport {
    pub saidi_hours: f64,
    pub loads: Vec<LoadTerm>,
    pub t_years: f64,
}

pub fn saidi_breakdown(study: &GridStudy, load_probs: &BTreeMap<String, f64>) -> Result<SaidiReport> {
    let mut loads = Vec::with_capacity(study.loads.len());
    let mut numerator = 0.0;
    let mut customers: u64 = 0;
    for l in &study.loads {
        let p = *load_probs.get(&l.label).ok_or_else(|| Error::MissingLoadProb(l.label.clone()))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { id: l.label.clone(), value: p });
        }
        let term = p * l.mttr_h * l.customers as f64;
        numerator += term;
        customers += l.customers;
        loads.push(LoadTerm {
            label: l.label.clone(),
            probability: p,
            mttr_h: l.mttr_h,
            customers: l.customers,
            term,
        });
    }
    if customers == 0 {
        return Err(Error::ZeroCustomers);
    }
    Ok(SaidiReport { saidi_hours: numerator / customers as f64, loads, t_years: study.t_years })
}
