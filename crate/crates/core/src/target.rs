//! Anything whose probability can be asked for: a fault tree, a consequence
//! path or a consequence box.

use crate::ccd::{ConsequenceBox, ConsequencePath, Selector};
use crate::error::{Error, Result};
use crate::fault_tree::FtExpr;
use crate::space::{EventSet, FiniteSpace};

#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Ft(&'a FtExpr),
    Path(&'a ConsequencePath),
    Box(&'a ConsequenceBox),
}

impl<'a> Target<'a> {
    pub fn kind(&self) -> &'static str {
        match self {
            Target::Ft(_) => "ft",
            Target::Path(_) => "path",
            Target::Box(_) => "consequence",
        }
    }

    /// Distinct basic events the target depends on.
    pub fn leaves(&self) -> Vec<&'a str> {
        match self {
            Target::Ft(ft) => ft.leaf_set().into_iter().collect(),
            Target::Path(p) => p.leaves(),
            Target::Box(b) => b.leaves(),
        }
    }

    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        match self {
            Target::Ft(ft) => ft.semantics(space),
            Target::Path(p) => p.semantics(space),
            Target::Box(b) => b.semantics(space),
        }
    }

    /// The same event written as a single gate expression.
    pub fn formula(&self) -> Result<FtExpr> {
        match self {
            Target::Ft(ft) => Ok((*ft).clone()),
            Target::Path(p) => path_formula(p),
            Target::Box(b) => Ok(FtExpr::Or(b.paths.iter().map(path_formula).collect::<Result<_>>()?)),
        }
    }
}

fn path_formula(p: &ConsequencePath) -> Result<FtExpr> {
    if p.boxes.is_empty() {
        return Err(Error::EmptyPath(p.id.clone()));
    }
    Ok(FtExpr::And(
        p.relevant_boxes()
            .map(|b| match b.selector {
                Selector::No => b.failure.clone(),
                _ => b.failure.clone().not(),
            })
            .collect(),
    ))
}
