//! Event-tree NODE/BRANCH combinators and their probability rules.
//!
//! `Node(xs)` is the union of its children. `Branch(x, xs)` is the
//! conditioning event intersected with the union of its children. Both are
//! the impossible event when they have no children.

use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::space::{EventSet, FiniteSpace, EXACT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum EtLeaf {
    Set(EventSet),
    Ft(FtExpr),
}

impl EtLeaf {
    pub fn resolve(&self, space: &FiniteSpace) -> Result<EventSet> {
        match self {
            EtLeaf::Set(e) => {
                // Route through the space so foreign sets are rejected.
                space.prob(e)?;
                Ok(e.clone())
            }
            EtLeaf::Ft(ft) => ft.semantics(space),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtExpr {
    Atomic(EtLeaf),
    Node(Vec<EtExpr>),
    Branch(EtLeaf, Vec<EtExpr>),
}

impl EtExpr {
    pub fn set(e: EventSet) -> Self {
        EtExpr::Atomic(EtLeaf::Set(e))
    }

    pub fn ft(ft: FtExpr) -> Self {
        EtExpr::Atomic(EtLeaf::Ft(ft))
    }

    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        match self {
            EtExpr::Atomic(leaf) => leaf.resolve(space),
            EtExpr::Node(children) => union_of(children, space),
            EtExpr::Branch(cond, children) => {
                let x = cond.resolve(space)?;
                Ok(x.intersection(&union_of(children, space)?))
            }
        }
    }
}

fn union_of(children: &[EtExpr], space: &FiniteSpace) -> Result<EventSet> {
    children
        .iter()
        .try_fold(space.empty(), |acc, c| Ok(acc.union(&c.semantics(space)?)))
}

/// Probability of a NODE over pairwise disjoint children.
pub fn node_prob(children: &[f64]) -> Result<f64> {
    for &p in children {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { id: "child".into(), value: p });
        }
    }
    let total: f64 = children.iter().sum();
    if total > 1.0 + EXACT_TOL {
        return Err(Error::NotDisjoint(format!("child probabilities sum to {total} > 1")));
    }
    Ok(total.min(1.0))
}

/// Probability of a BRANCH whose condition is independent of its disjoint
/// children.
pub fn branch_prob(y: f64, children: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidProbability { id: "condition".into(), value: y });
    }
    Ok(y * node_prob(children)?)
}

/// [`node_prob`] with the disjointness hypothesis checked on the oracle.
pub fn node_prob_checked(space: &FiniteSpace, children: &[EventSet]) -> Result<f64> {
    if !space.check_disjoint(children)? {
        return Err(Error::NotDisjoint("NODE children overlap".into()));
    }
    let probs = children.iter().map(|c| space.prob(c)).collect::<Result<Vec<_>>>()?;
    node_prob(&probs)
}

/// [`branch_prob`] with both hypotheses checked on the oracle: the children
/// are pairwise disjoint and the condition is independent of their union.
pub fn branch_prob_checked(space: &FiniteSpace, y: &EventSet, children: &[EventSet]) -> Result<f64> {
    if !space.check_disjoint(children)? {
        return Err(Error::NotDisjoint("BRANCH children overlap".into()));
    }
    let union = children.iter().fold(space.empty(), |acc, c| acc.union(c));
    if !space.check_mutual_independence(&[y.clone(), union])? {
        return Err(Error::NotIndependent);
    }
    let probs = children.iter().map(|c| space.prob(c)).collect::<Result<Vec<_>>>()?;
    branch_prob(space.prob(y)?, &probs)
}
