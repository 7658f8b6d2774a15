//! Time-dependent failure models and their instantiation at a mission time.
//!
//! Rates are in failures per year and mission times in years. Unit
//! conversion from hours happens at the model-file boundary only.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureModel {
    /// Fixed failure probability, independent of time.
    ConstantProb { p: f64 },
    /// Exponential lifetime with the given rate (failures/year).
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasicEvent {
    pub id: String,
    pub model: FailureModel,
}

impl BasicEvent {
    pub fn constant(id: impl Into<String>, p: f64) -> Self {
        Self { id: id.into(), model: FailureModel::ConstantProb { p } }
    }

    pub fn exponential(id: impl Into<String>, rate: f64) -> Self {
        Self { id: id.into(), model: FailureModel::Exponential { rate } }
    }

    /// Failure probability at mission time `t` (years).
    pub fn prob_at(&self, t: f64) -> Result<f64> {
        match self.model {
            FailureModel::ConstantProb { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(p)
                } else {
                    Err(Error::InvalidProbability { id: self.id.clone(), value: p })
                }
            }
            FailureModel::Exponential { rate } => exp_cdf(rate, t),
        }
    }
}

/// `1 - e^(-λt)`, the unreliability of an exponential component.
pub fn exp_cdf(rate: f64, t: f64) -> Result<f64> {
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::NegativeRate(rate));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let x = rate * t;
    if x.is_nan() {
        // 0 * inf: a zero rate never fails, an infinite rate fails at once.
        return Ok(if rate == 0.0 { 0.0 } else { 1.0 });
    }
    Ok(-(-x).exp_m1())
}

/// Per-event failure probabilities at one mission time.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Assignment {
    probs: BTreeMap<String, f64>,
    t_years: f64,
}

impl Assignment {
    /// Assignment of fixed probabilities (mission time 0 is recorded).
    pub fn from_probs<I, S>(probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (id, p) in probs {
            let id = id.into();
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { id, value: p });
            }
            if map.insert(id.clone(), p).is_some() {
                return Err(Error::DuplicateEvent(id));
            }
        }
        Ok(Self { probs: map, t_years: 0.0 })
    }

    pub fn get(&self, id: &str) -> Result<f64> {
        self.probs.get(id).copied().ok_or_else(|| Error::UnknownEvent(id.to_string()))
    }

    pub fn t_years(&self) -> f64 {
        self.t_years
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Replaces (or adds) one event's probability.
    pub fn set(&mut self, id: impl Into<String>, p: f64) -> Result<()> {
        let id = id.into();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { id, value: p });
        }
        self.probs.insert(id, p);
        Ok(())
    }
}

/// Evaluates every event's failure model at mission time `t` (years).
pub fn instantiate(events: &[BasicEvent], t: f64) -> Result<Assignment> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let mut probs = BTreeMap::new();
    for e in events {
        if probs.insert(e.id.clone(), e.prob_at(t)?).is_some() {
            return Err(Error::DuplicateEvent(e.id.clone()));
        }
    }
    Ok(Assignment { probs, t_years: t })
}
