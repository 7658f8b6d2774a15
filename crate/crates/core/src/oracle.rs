//! Exact probabilities by enumeration of the joint component states.
//!
//! Targets with at most `cap` basic events are enumerated directly. Larger
//! targets are split into modules first: a subexpression whose basic events
//! occur nowhere else (identical copies aside) is an independent event, so
//! it is enumerated on its own and replaced by a single variable carrying
//! its exact probability. Leaves that occur once under an AND/OR gate are
//! bundled into sub-gates the same way. Every level is still a brute-force
//! enumeration of the product space; no closed-form rule is used.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::lifetime::Assignment;
use crate::space::{FiniteSpace, DEFAULT_ENUMERATION_CAP};
use crate::target::Target;

pub const CAP_ENV: &str = "CCD_ORACLE_CAP";
/// 2^26 outcome weights already take 512 MiB.
pub const MAX_CAP: usize = 26;

/// Enumeration cap from `CCD_ORACLE_CAP`, or the default when unset.
pub fn cap_from_env() -> Result<usize> {
    match std::env::var(CAP_ENV) {
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(cap) if (1..=MAX_CAP).contains(&cap) => Ok(cap),
            _ => Err(Error::InvalidArgument(format!(
                "{CAP_ENV} must be an integer between 1 and {MAX_CAP}, got `{raw}`"
            ))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "lowercase")]
pub enum OracleRoute {
    Direct { events: usize },
    /// `widest` is the largest space enumerated at any level.
    Factored { events: usize, modules: usize, widest: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub probability: f64,
    #[serde(flatten)]
    pub route: OracleRoute,
}

pub fn exact_prob(target: Target<'_>, assign: &Assignment, cap: usize) -> Result<OracleValue> {
    let events = target.leaves().len();
    if events <= cap {
        let probs = target
            .leaves()
            .into_iter()
            .map(|id| Ok((id, assign.get(id)?)))
            .collect::<Result<Vec<_>>>()?;
        let space = FiniteSpace::build_with_cap(&probs, cap)?;
        let probability = space.prob(&target.semantics(&space)?)?;
        return Ok(OracleValue { probability, route: OracleRoute::Direct { events } });
    }
    let formula = target.formula()?;
    let mut f = Factorer { assign, cap, probs: HashMap::new(), modules: 0, widest: 0 };
    let probability = f.prob(&formula)?;
    Ok(OracleValue {
        probability,
        route: OracleRoute::Factored { events, modules: f.modules, widest: f.widest },
    })
}

struct Factorer<'a> {
    assign: &'a Assignment,
    cap: usize,
    /// Module variables and their exact probabilities.
    probs: HashMap<String, f64>,
    modules: usize,
    widest: usize,
}

fn count_leaves<'e>(e: &'e FtExpr, into: &mut HashMap<&'e str, usize>) {
    match e {
        FtExpr::Atomic(id) => *into.entry(id.as_str()).or_default() += 1,
        FtExpr::Not(c) => count_leaves(c, into),
        FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().for_each(|c| count_leaves(c, into)),
    }
}

fn count_subtrees<'e>(e: &'e FtExpr, into: &mut HashMap<&'e FtExpr, usize>) {
    *into.entry(e).or_default() += 1;
    match e {
        FtExpr::Atomic(_) => {}
        FtExpr::Not(c) => count_subtrees(c, into),
        FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().for_each(|c| count_subtrees(c, into)),
    }
}

struct Counts<'e> {
    leaves: HashMap<&'e str, usize>,
    subtrees: HashMap<&'e FtExpr, usize>,
}

impl Counts<'_> {
    /// Every occurrence of the subtree's leaves lies inside a copy of it.
    fn is_module(&self, e: &FtExpr) -> bool {
        let copies = self.subtrees[e];
        let mut inner = HashMap::new();
        count_leaves(e, &mut inner);
        inner.iter().all(|(leaf, n)| self.leaves[leaf] == copies * n)
    }
}

impl Factorer<'_> {
    fn leaf_prob(&self, id: &str) -> Result<f64> {
        match self.probs.get(id) {
            Some(&p) => Ok(p),
            None => self.assign.get(id),
        }
    }

    fn enumerate(&mut self, e: &FtExpr) -> Result<f64> {
        let leaves: BTreeSet<&str> = e.leaf_set();
        let probs = leaves
            .iter()
            .map(|id| Ok((*id, self.leaf_prob(id)?)))
            .collect::<Result<Vec<_>>>()?;
        let space = FiniteSpace::build_with_cap(&probs, self.cap)?;
        self.widest = self.widest.max(leaves.len());
        space.prob(&e.semantics(&space)?)
    }

    fn fresh(&mut self, p: f64) -> String {
        self.modules += 1;
        // Control characters cannot collide with model identifiers.
        let var = format!("\u{1}m{}", self.modules);
        self.probs.insert(var.clone(), p);
        var
    }

    fn prob(&mut self, e: &FtExpr) -> Result<f64> {
        if e.leaf_set().len() <= self.cap {
            return self.enumerate(e);
        }
        let mut counts = Counts { leaves: HashMap::new(), subtrees: HashMap::new() };
        count_leaves(e, &mut counts.leaves);
        count_subtrees(e, &mut counts.subtrees);
        let mut shared = HashMap::new();
        let reduced = self.rewrite(e, true, &counts, &mut shared)?;
        let width = reduced.leaf_set().len();
        if width > self.cap {
            return Err(Error::CapExceeded { n: width, cap: self.cap });
        }
        self.enumerate(&reduced)
    }

    fn rewrite(
        &mut self,
        e: &FtExpr,
        is_root: bool,
        counts: &Counts<'_>,
        shared: &mut HashMap<FtExpr, String>,
    ) -> Result<FtExpr> {
        if !is_root && !matches!(e, FtExpr::Atomic(_)) && counts.is_module(e) {
            if let Some(var) = shared.get(e) {
                return Ok(FtExpr::Atomic(var.clone()));
            }
            let p = self.prob(e)?;
            let var = self.fresh(p);
            shared.insert(e.clone(), var.clone());
            return Ok(FtExpr::Atomic(var));
        }
        Ok(match e {
            FtExpr::Atomic(_) => e.clone(),
            FtExpr::Not(c) => FtExpr::Not(Box::new(self.rewrite(c, false, counts, shared)?)),
            FtExpr::And(cs) => FtExpr::And(self.rewrite_gate(cs, true, counts, shared)?),
            FtExpr::Or(cs) => FtExpr::Or(self.rewrite_gate(cs, false, counts, shared)?),
        })
    }

    fn rewrite_gate(
        &mut self,
        children: &[FtExpr],
        is_and: bool,
        counts: &Counts<'_>,
        shared: &mut HashMap<FtExpr, String>,
    ) -> Result<Vec<FtExpr>> {
        let mut private = Vec::new();
        let mut rest = Vec::new();
        for c in children {
            let r = self.rewrite(c, false, counts, shared)?;
            // A leaf seen once overall, or a module with a single copy.
            let is_private = match (&r, c) {
                (FtExpr::Atomic(_), FtExpr::Atomic(id)) => counts.leaves[id.as_str()] == 1,
                (FtExpr::Atomic(_), _) => counts.subtrees[c] == 1,
                _ => false,
            };
            if is_private {
                private.push(r);
            } else {
                rest.push(r);
            }
        }
        let gate = |cs: Vec<FtExpr>| if is_and { FtExpr::And(cs) } else { FtExpr::Or(cs) };
        // Private children beside shared ones always collapse into one
        // variable; a gate made only of private children is split just
        // enough to fit the cap.
        while private.len() > 1 && (!rest.is_empty() || private.len() > self.cap) {
            let mut bundled = Vec::new();
            for chunk in private.chunks(self.cap) {
                if chunk.len() == 1 {
                    bundled.push(chunk[0].clone());
                } else {
                    let p = self.enumerate(&gate(chunk.to_vec()))?;
                    bundled.push(FtExpr::Atomic(self.fresh(p)));
                }
            }
            private = bundled;
        }
        rest.extend(private);
        Ok(rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccd::{ConsequenceBox, ConsequencePath, DecisionBox, Selector};
    use crate::space::EXACT_TOL;

    fn asg(n: usize, p: impl Fn(usize) -> f64) -> Assignment {
        Assignment::from_probs((0..n).map(|i| (format!("e{i}"), p(i)))).unwrap()
    }

    #[test]
    fn direct_route_for_small_targets() {
        let a = asg(3, |i| 0.1 * (i + 1) as f64);
        let ft = FtExpr::or_of(["e0", "e1", "e2"]);
        let v = exact_prob(Target::Ft(&ft), &a, 20).unwrap();
        assert_eq!(v.route, OracleRoute::Direct { events: 3 });
        assert!((v.probability - (1.0 - 0.9 * 0.8 * 0.7)).abs() < EXACT_TOL);
    }

    #[test]
    fn factored_matches_direct() {
        // OR of two ANDs sharing nothing, plus a repeated module under NOT.
        let a = asg(10, |i| 0.05 + 0.08 * i as f64);
        let m = FtExpr::and_of(["e0", "e1", "e2"]);
        let ft = FtExpr::Or(vec![
            FtExpr::And(vec![m.clone(), FtExpr::or_of(["e3", "e4"])]),
            FtExpr::And(vec![m.clone().not(), FtExpr::or_of(["e5", "e6", "e7"]), FtExpr::atomic("e8")]),
            FtExpr::atomic("e9"),
        ]);
        let direct = exact_prob(Target::Ft(&ft), &a, 20).unwrap();
        let factored = exact_prob(Target::Ft(&ft), &a, 4).unwrap();
        assert!(matches!(factored.route, OracleRoute::Factored { widest, .. } if widest <= 4));
        assert!((direct.probability - factored.probability).abs() < EXACT_TOL);
    }

    #[test]
    fn wide_flat_gate_is_bundled() {
        let a = asg(40, |i| 0.01 * (i % 7 + 1) as f64);
        let ids: Vec<String> = (0..40).map(|i| format!("e{i}")).collect();
        let ft = FtExpr::or_of(ids.iter().map(String::as_str));
        let v = exact_prob(Target::Ft(&ft), &a, 6).unwrap();
        let none: f64 = (0..40).map(|i| 1.0 - 0.01 * (i % 7 + 1) as f64).product();
        assert!((v.probability - (1.0 - none)).abs() < EXACT_TOL);
    }

    #[test]
    fn shared_boxes_across_paths() {
        // Exactly one of four supplies out, each supply an OR of 7 events.
        let a = asg(28, |i| 0.02 + 0.01 * (i % 5) as f64);
        let fts: Vec<FtExpr> = (0..4)
            .map(|g| FtExpr::or_of((0..7).map(|k| format!("e{}", g * 7 + k))))
            .collect();
        let paths = (0..4)
            .map(|out| {
                let boxes = (0..4)
                    .map(|g| {
                        let sel = if g == out { Selector::No } else { Selector::Yes };
                        DecisionBox::new(format!("G{g}"), fts[g].clone(), sel)
                    })
                    .collect();
                ConsequencePath::new(format!("p{out}"), boxes)
            })
            .collect();
        let cb = ConsequenceBox::new("one_out", paths);
        let v = exact_prob(Target::Box(&cb), &a, 20).unwrap();
        assert!(matches!(v.route, OracleRoute::Factored { widest, .. } if widest <= 20));
        let fors: Vec<f64> = fts.iter().map(|f| f.prob_closed(&a).unwrap()).collect();
        let want = crate::metrics::partial_blackout_prob(&fors).unwrap();
        assert!((v.probability - want).abs() < EXACT_TOL);
    }

    #[test]
    fn irreducible_target_exceeds_cap() {
        // Every leaf appears twice in different contexts: no module exists.
        let a = asg(6, |_| 0.5);
        let ft = FtExpr::And(vec![
            FtExpr::or_of(["e0", "e1", "e2", "e3", "e4", "e5"]),
            FtExpr::Or(vec![
                FtExpr::and_of(["e0", "e1"]),
                FtExpr::and_of(["e2", "e3"]),
                FtExpr::and_of(["e4", "e5"]),
            ]),
        ]);
        assert_eq!(exact_prob(Target::Ft(&ft), &a, 3).unwrap_err(), Error::CapExceeded { n: 6, cap: 3 });
    }

    #[test]
    fn env_cap() {
        // Single test touching the variable to avoid races between tests.
        std::env::remove_var(CAP_ENV);
        assert_eq!(cap_from_env().unwrap(), DEFAULT_ENUMERATION_CAP);
        std::env::set_var(CAP_ENV, "12");
        assert_eq!(cap_from_env().unwrap(), 12);
        std::env::set_var(CAP_ENV, "zero");
        assert!(cap_from_env().is_err());
        std::env::set_var(CAP_ENV, "64");
        assert!(cap_from_env().is_err());
        std::env::remove_var(CAP_ENV);
    }
}
