//! Static fault-tree gate expressions.
//!
//! [`FtExpr::semantics`] maps a tree onto an event of a [`FiniteSpace`]
//! (union for OR, intersection for AND, complement for NOT).
//! [`FtExpr::prob_closed`] is the product-form evaluation that is exact only
//! when all leaves are distinct independent events; it refuses repeated
//! leaves instead of silently mis-multiplying.
//!
//! Empty gates follow the neutral elements: `AND()` is the certain event and
//! `OR()` the impossible one.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::diagnostics::{Code, Diagnostic};
use crate::error::{Error, Result};
use crate::lifetime::Assignment;
use crate::space::{EventSet, FiniteSpace};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FtExpr {
    Atomic(String),
    And(Vec<FtExpr>),
    Or(Vec<FtExpr>),
    Not(Box<FtExpr>),
}

impl FtExpr {
    pub fn atomic(id: impl Into<String>) -> Self {
        FtExpr::Atomic(id.into())
    }

    pub fn and_of<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FtExpr::And(ids.into_iter().map(|s| FtExpr::Atomic(s.into())).collect())
    }

    pub fn or_of<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FtExpr::Or(ids.into_iter().map(|s| FtExpr::Atomic(s.into())).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        FtExpr::Not(Box::new(self))
    }

    /// Leaf ids in left-to-right order, repeats included.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            FtExpr::Atomic(id) => out.push(id),
            FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().for_each(|c| c.collect_leaves(out)),
            FtExpr::Not(c) => c.collect_leaves(out),
        }
    }

    pub fn leaf_set(&self) -> BTreeSet<&str> {
        self.leaves().into_iter().collect()
    }

    /// First leaf that occurs more than once, if any.
    pub fn repeated_leaf(&self) -> Option<&str> {
        let mut seen = HashSet::new();
        self.leaves().into_iter().find(|l| !seen.insert(*l))
    }

    pub fn contains_not(&self) -> bool {
        match self {
            FtExpr::Atomic(_) => false,
            FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().any(FtExpr::contains_not),
            FtExpr::Not(_) => true,
        }
    }

    /// Set semantics over an exact space.
    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        match self {
            FtExpr::Atomic(id) => space.atomic(id),
            FtExpr::Or(cs) => cs.iter().try_fold(space.empty(), |acc, c| Ok(acc.union(&c.semantics(space)?))),
            FtExpr::And(cs) => {
                cs.iter().try_fold(space.full(), |acc, c| Ok(acc.intersection(&c.semantics(space)?)))
            }
            FtExpr::Not(c) => Ok(c.semantics(space)?.complement()),
        }
    }

    /// Closed-form probability under independent, distinct leaves.
    pub fn prob_closed(&self, assign: &Assignment) -> Result<f64> {
        if let Some(leaf) = self.repeated_leaf() {
            return Err(Error::SharedLeaf(leaf.to_string()));
        }
        self.prob_unchecked(assign)
    }

    pub(crate) fn prob_unchecked(&self, assign: &Assignment) -> Result<f64> {
        match self {
            FtExpr::Atomic(id) => assign.get(id),
            FtExpr::And(cs) => cs.iter().try_fold(1.0, |acc, c| Ok(acc * c.prob_unchecked(assign)?)),
            FtExpr::Or(cs) => {
                let survive = cs.iter().try_fold(1.0, |acc, c| Ok(acc * (1.0 - c.prob_unchecked(assign)?)))?;
                Ok(1.0 - survive)
            }
            FtExpr::Not(c) => Ok(1.0 - c.prob_unchecked(assign)?),
        }
    }

    /// Boolean evaluation for one joint component state.
    pub fn eval_bool(&self, failed: &dyn Fn(&str) -> bool) -> bool {
        match self {
            FtExpr::Atomic(id) => failed(id),
            FtExpr::And(cs) => cs.iter().all(|c| c.eval_bool(failed)),
            FtExpr::Or(cs) => cs.iter().any(|c| c.eval_bool(failed)),
            FtExpr::Not(c) => !c.eval_bool(failed),
        }
    }

    /// Structural checks: unknown leaves, repeated leaves, empty gates.
    pub fn validate(&self, is_known: &dyn Fn(&str) -> bool) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut reported = HashSet::new();
        for leaf in self.leaves() {
            if !is_known(leaf) && reported.insert(leaf) {
                diags.push(Diagnostic::error(Code::UnknownEvent, format!("unknown event `{leaf}`")));
            }
        }
        let mut seen = HashSet::new();
        let mut repeated = BTreeSet::new();
        for leaf in self.leaves() {
            if !seen.insert(leaf) {
                repeated.insert(leaf);
            }
        }
        for leaf in repeated {
            diags.push(Diagnostic::warning(
                Code::SharedLeaf,
                format!("leaf `{leaf}` repeats; closed-form evaluation is refused, use the oracle"),
            ));
        }
        self.visit_empty_gates(&mut diags);
        diags
    }

    fn visit_empty_gates(&self, diags: &mut Vec<Diagnostic>) {
        match self {
            FtExpr::Atomic(_) => {}
            FtExpr::And(cs) if cs.is_empty() => {
                diags.push(Diagnostic::notice(Code::EmptyGate, "AND() is the certain event"))
            }
            FtExpr::Or(cs) if cs.is_empty() => {
                diags.push(Diagnostic::notice(Code::EmptyGate, "OR() is the impossible event"))
            }
            FtExpr::And(cs) | FtExpr::Or(cs) => cs.iter().for_each(|c| c.visit_empty_gates(diags)),
            FtExpr::Not(c) => c.visit_empty_gates(diags),
        }
    }

    /// Rewrites every leaf through `f`.
    pub fn map_leaves(&self, f: &mut dyn FnMut(&str) -> FtExpr) -> FtExpr {
        match self {
            FtExpr::Atomic(id) => f(id),
            FtExpr::And(cs) => FtExpr::And(cs.iter().map(|c| c.map_leaves(f)).collect()),
            FtExpr::Or(cs) => FtExpr::Or(cs.iter().map(|c| c.map_leaves(f)).collect()),
            FtExpr::Not(c) => FtExpr::Not(Box::new(c.map_leaves(f))),
        }
    }
}

/// Renders in model-file syntax, e.g. `OR(a, NOT(b))`.
impl fmt::Display for FtExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, cs: &[FtExpr]| {
            write!(f, "{name}(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        };
        match self {
            FtExpr::Atomic(id) => f.write_str(id),
            FtExpr::And(cs) => list(f, "AND", cs),
            FtExpr::Or(cs) => list(f, "OR", cs),
            FtExpr::Not(c) => write!(f, "NOT({c})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::EXACT_TOL;

    fn ab_space() -> FiniteSpace {
        FiniteSpace::build(&[("a", 0.2), ("b", 0.3)]).unwrap()
    }

    fn ab_assign() -> Assignment {
        Assignment::from_probs([("a", 0.2), ("b", 0.3)]).unwrap()
    }

    #[test]
    fn semantics_examples() {
        let s = ab_space();
        let a = FtExpr::atomic("a");
        assert!((s.prob(&a.semantics(&s).unwrap()).unwrap() - 0.2).abs() < EXACT_TOL);
        let or = FtExpr::or_of(["a", "b"]);
        // outcomes {a}, {b}, {a,b}: 0.14 + 0.24 + 0.06
        assert!((s.prob(&or.semantics(&s).unwrap()).unwrap() - 0.44).abs() < EXACT_TOL);
        let not_a = a.clone().not();
        assert!((s.prob(&not_a.semantics(&s).unwrap()).unwrap() - 0.8).abs() < EXACT_TOL);
        assert_eq!(
            FtExpr::atomic("zz").semantics(&s).unwrap_err(),
            Error::UnknownEvent("zz".into())
        );
    }

    #[test]
    fn closed_form_examples() {
        let asg = ab_assign();
        assert!((FtExpr::and_of(["a", "b"]).prob_closed(&asg).unwrap() - 0.06).abs() < EXACT_TOL);
        assert!((FtExpr::or_of(["a", "b"]).prob_closed(&asg).unwrap() - 0.44).abs() < EXACT_TOL);
        assert_eq!(
            FtExpr::or_of(["a", "a"]).prob_closed(&asg).unwrap_err(),
            Error::SharedLeaf("a".into())
        );
        assert_eq!(
            FtExpr::atomic("c").prob_closed(&asg).unwrap_err(),
            Error::UnknownEvent("c".into())
        );
    }

    #[test]
    fn pv_shape_all_equal_leaves() {
        // OR of two OR gates of four leaves each, every leaf at q.
        let q = 0.1;
        let ids: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
        let ft = FtExpr::Or(vec![FtExpr::or_of(ids[..4].to_vec()), FtExpr::or_of(ids[4..].to_vec())]);
        let asg = Assignment::from_probs(ids.iter().map(|i| (i.clone(), q))).unwrap();
        let space = FiniteSpace::build(&ids.iter().map(|i| (i.clone(), q)).collect::<Vec<_>>()).unwrap();
        let oracle = space.prob(&ft.semantics(&space).unwrap()).unwrap();
        let closed = ft.prob_closed(&asg).unwrap();
        assert!((closed - oracle).abs() < EXACT_TOL);
        assert!((closed - (1.0 - 0.9f64.powi(8))).abs() < EXACT_TOL);
        assert!((closed - 0.5695).abs() < 1e-4);
    }

    #[test]
    fn empty_gates() {
        let s = ab_space();
        let asg = ab_assign();
        assert_eq!(FtExpr::And(vec![]).prob_closed(&asg).unwrap(), 1.0);
        assert_eq!(FtExpr::Or(vec![]).prob_closed(&asg).unwrap(), 0.0);
        assert!(FtExpr::And(vec![]).semantics(&s).unwrap().is_full());
        assert!(FtExpr::Or(vec![]).semantics(&s).unwrap().is_empty());
    }

    #[test]
    fn nested_not() {
        let asg = ab_assign();
        let e = FtExpr::atomic("a").not().not();
        assert!((e.prob_closed(&asg).unwrap() - 0.2).abs() < EXACT_TOL);
    }

    #[test]
    fn validate_examples() {
        let known = |s: &str| ["a", "b"].contains(&s);
        let d = FtExpr::or_of(["a", "a"]).validate(&known);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::SharedLeaf);

        let d = FtExpr::And(vec![]).validate(&known);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::EmptyGate);

        let steam = FtExpr::And(vec![
            FtExpr::and_of(["BO1", "TA1"]),
            FtExpr::and_of(["BO2", "TA2"]),
            FtExpr::and_of(["BO3", "TA3"]),
        ]);
        assert!(steam.validate(&|_| true).is_empty());

        let d = FtExpr::atomic("q").validate(&known);
        assert_eq!(d[0].code, Code::UnknownEvent);
    }

    #[test]
    fn display_round_trips_syntax() {
        let e = FtExpr::Or(vec![FtExpr::atomic("a"), FtExpr::atomic("b").not(), FtExpr::And(vec![])]);
        assert_eq!(e.to_string(), "OR(a, NOT(b), AND())");
    }
}
