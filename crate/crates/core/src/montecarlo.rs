//! Seeded Monte-Carlo estimation.
//!
//! Two procedures live here:
//!
//! * direct state sampling ([`mcs_estimate`], [`mcs_joint`]): draw every
//!   basic event as an independent Bernoulli variable and evaluate the target
//!   structure on the joint state;
//! * the sequential time-to-fail / time-to-repair renewal procedure
//!   ([`ttf_ttr_study`]), which estimates the long-run fraction of time a
//!   single repairable component spends under repair.
//!
//! # Random numbers
//!
//! The generator is ChaCha8 (`rand_chacha`), which is platform independent.
//! Samples are split into chunks of [`CHUNK_SIZE`]; chunk `i` draws from the
//! generator seeded with the base seed and switched to stream `i`. Chunks run
//! in parallel and their hit counts are merged in chunk order, so an estimate
//! depends only on `(seed, n, target)`, never on the thread count.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ccd::{ConsequencePath, Selector};
use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::lifetime::Assignment;
use crate::target::Target;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x5EED_0CCD;
pub const CHUNK_SIZE: usize = 10_000;
pub const PRNG: &str = "ChaCha8 (rand_chacha), stream per 10000-sample chunk";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McsEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub hits: u64,
    pub seed: u64,
    pub ci95: [f64; 2],
}

impl McsEstimate {
    pub fn from_counts(hits: u64, n: u64, seed: u64) -> Self {
        let mean = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let stderr = if n == 0 { 0.0 } else { (mean * (1.0 - mean) / n as f64).sqrt() };
        let half = 1.96 * stderr;
        Self {
            mean,
            stderr,
            n,
            hits,
            seed,
            ci95: [(mean - half).max(0.0), (mean + half).min(1.0)],
        }
    }

    /// Pools estimates drawn from disjoint streams.
    pub fn merge(parts: &[McsEstimate], seed: u64) -> Self {
        let hits = parts.iter().map(|p| p.hits).sum();
        let n = parts.iter().map(|p| p.n).sum();
        Self::from_counts(hits, n, seed)
    }
}

// Index-based form of a target so the sampling loop avoids string lookups.
enum Node {
    True,
    Leaf(usize),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
}

impl Node {
    fn eval(&self, state: &[bool]) -> bool {
        match self {
            Node::True => true,
            Node::Leaf(i) => state[*i],
            Node::And(cs) => cs.iter().all(|c| c.eval(state)),
            Node::Or(cs) => cs.iter().any(|c| c.eval(state)),
            Node::Not(c) => !c.eval(state),
        }
    }
}

struct Compiler {
    index: HashMap<String, usize>,
    probs: Vec<f64>,
}

impl Compiler {
    fn leaf(&mut self, id: &str, assign: &Assignment) -> Result<usize> {
        if let Some(&i) = self.index.get(id) {
            return Ok(i);
        }
        let p = assign.get(id)?;
        let i = self.probs.len();
        self.probs.push(p);
        self.index.insert(id.to_string(), i);
        Ok(i)
    }

    fn ft(&mut self, ft: &FtExpr, assign: &Assignment) -> Result<Node> {
        Ok(match ft {
            FtExpr::Atomic(id) => Node::Leaf(self.leaf(id, assign)?),
            FtExpr::And(cs) => Node::And(cs.iter().map(|c| self.ft(c, assign)).collect::<Result<_>>()?),
            FtExpr::Or(cs) => Node::Or(cs.iter().map(|c| self.ft(c, assign)).collect::<Result<_>>()?),
            FtExpr::Not(c) => Node::Not(Box::new(self.ft(c, assign)?)),
        })
    }

    fn path(&mut self, path: &ConsequencePath, assign: &Assignment) -> Result<Node> {
        let mut parts = Vec::with_capacity(path.boxes.len());
        for b in &path.boxes {
            parts.push(match b.selector {
                Selector::No => self.ft(&b.failure, assign)?,
                Selector::Yes => Node::Not(Box::new(self.ft(&b.failure, assign)?)),
                Selector::Irrelevant => Node::True,
            });
        }
        Ok(Node::And(parts))
    }

    fn target(&mut self, target: Target<'_>, assign: &Assignment) -> Result<Node> {
        match target {
            Target::Ft(ft) => self.ft(ft, assign),
            Target::Path(p) => self.path(p, assign),
            Target::Box(b) => {
                Ok(Node::Or(b.paths.iter().map(|p| self.path(p, assign)).collect::<Result<_>>()?))
            }
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Frequency estimate of one target's probability.
pub fn mcs_estimate(target: Target<'_>, assign: &Assignment, n: usize, seed: u64) -> Result<McsEstimate> {
    Ok(mcs_joint(&[target], assign, n, seed)?.remove(0))
}

/// Estimates several targets from the same joint samples.
pub fn mcs_joint(targets: &[Target<'_>], assign: &Assignment, n: usize, seed: u64) -> Result<Vec<McsEstimate>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut compiler = Compiler { index: HashMap::new(), probs: Vec::new() };
    let nodes = targets
        .iter()
        .map(|t| compiler.target(*t, assign))
        .collect::<Result<Vec<_>>>()?;
    let probs = compiler.probs;

    let chunks = n.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, c);
            let mut state = vec![false; probs.len()];
            let mut hits = vec![0u64; nodes.len()];
            for _ in 0..len {
                for (s, &p) in state.iter_mut().zip(&probs) {
                    *s = rng.random::<f64>() < p;
                }
                for (h, node) in hits.iter_mut().zip(&nodes) {
                    *h += node.eval(&state) as u64;
                }
            }
            hits
        })
        .collect();

    Ok((0..nodes.len())
        .map(|t| {
            let hits = per_chunk.iter().map(|h| h[t]).sum();
            McsEstimate::from_counts(hits, n as u64, seed)
        })
        .collect())
}

// ============================================================================
// Renewal (TTF/TTR) procedure
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairMode {
    /// `TTR = -ln U / r`: `r` is used as a repair rate.
    Verbatim,
    /// `TTR = -r ln U`: `r` is the mean repair time in hours.
    MeanRepairTime,
}

/// `TTF = -ln U / λ`.
pub fn ttf_from_uniform(u: f64, lambda: f64) -> f64 {
    -u.ln() / lambda
}

pub fn ttr_from_uniform(u: f64, r: f64, mode: RepairMode) -> f64 {
    match mode {
        RepairMode::Verbatim => -u.ln() / r,
        RepairMode::MeanRepairTime => -u.ln() * r,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalEstimate {
    /// Fraction of the horizon spent under repair.
    pub unavailability: f64,
    pub up_hours: f64,
    pub down_hours: f64,
    pub failures: u64,
    pub horizon_hours: f64,
    pub seed: u64,
    pub repair_mode: RepairMode,
}

/// Alternates TTF and TTR draws until the horizon is passed.
pub fn ttf_ttr_study(lambda: f64, r: f64, horizon: f64, seed: u64, mode: RepairMode) -> Result<RenewalEstimate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveRate(lambda));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NonPositiveRate(r));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // U in (0, 1] so ln U is finite.
    let mut uniform = || 1.0 - rng.random::<f64>();
    let (mut t, mut up, mut down, mut failures) = (0.0, 0.0, 0.0, 0u64);
    loop {
        let ttf = ttf_from_uniform(uniform(), lambda);
        up += ttf.min(horizon - t);
        t += ttf;
        if t >= horizon {
            break;
        }
        failures += 1;
        let ttr = ttr_from_uniform(uniform(), r, mode);
        down += ttr.min(horizon - t);
        t += ttr;
        if t >= horizon {
            break;
        }
    }
    Ok(RenewalEstimate {
        unavailability: down / horizon,
        up_hours: up,
        down_hours: down,
        failures,
        horizon_hours: horizon,
        seed,
        repair_mode: mode,
    })
}
