//! Cause-consequence diagrams over independent basic events.
//!
//! Fault trees describe how basic component failures combine into a system
//! failure. Decision boxes branch on whether that failure happened, and
//! consequence paths chain boxes together. A consequence box collects the
//! paths that lead to one outcome.
//!
//! Every probability has two routes: a closed form that relies on
//! independence and disjointness, and an exact enumeration of the product
//! Bernoulli space ([`space::FiniteSpace`]) that makes no such assumption.

pub mod case_study;
pub mod ccd;
pub mod diagnostics;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod event_tree;
pub mod fault_tree;
pub mod lifetime;
pub mod metrics;
pub mod montecarlo;
pub mod oracle;
pub mod space;
pub mod target;

pub use ccd::{ConsequenceBox, ConsequencePath, DecisionBox, Selector};
pub use diagnostics::{Diagnostic, Severity};
pub use error::{Error, Result};
pub use fault_tree::FtExpr;
pub use lifetime::{Assignment, BasicEvent};
pub use space::{EventSet, FiniteSpace};
