//! Cause-consequence diagrams: decision boxes, consequence paths and
//! consequence boxes.
//!
//! A [`DecisionBox`] carries the fault tree of one component. Its NO outcome
//! is the fault-tree event, its YES outcome the exact complement, and an
//! irrelevant box is the whole sample space. A [`ConsequencePath`] is the
//! left fold of event-tree BRANCH over its boxes, i.e. the intersection of
//! their outcomes. A [`ConsequenceBox`] is the NODE (union) of its paths.
//!
//! The closed forms assume that distinct boxes in a path share no basic
//! events and that the paths of a consequence box are pairwise disjoint and
//! distinct. Violations are reported as errors; the oracle remains available
//! for models that break these assumptions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::diagnostics::{Code, Diagnostic};
use crate::error::{Error, Result};
use crate::event_tree::{EtExpr, EtLeaf};
use crate::fault_tree::FtExpr;
use crate::lifetime::Assignment;
use crate::space::{EventSet, FiniteSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    No,
    Yes,
    Irrelevant,
}

impl Selector {
    /// 0 is NO, 1 is YES, anything else marks the box irrelevant.
    pub fn from_code(code: i64) -> Self {
        match code {
            0 => Selector::No,
            1 => Selector::Yes,
            _ => Selector::Irrelevant,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Selector::No => 0,
            Selector::Yes => 1,
            Selector::Irrelevant => 2,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Selector::No => "no",
            Selector::Yes => "yes",
            Selector::Irrelevant => "skip",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Selector::No => Selector::Yes,
            Selector::Yes => Selector::No,
            Selector::Irrelevant => Selector::Irrelevant,
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionBox {
    pub id: String,
    pub failure: FtExpr,
    pub selector: Selector,
}

impl DecisionBox {
    pub fn new(id: impl Into<String>, failure: FtExpr, selector: Selector) -> Self {
        Self { id: id.into(), failure, selector }
    }

    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        match self.selector {
            Selector::No => self.failure.semantics(space),
            Selector::Yes => Ok(self.failure.semantics(space)?.complement()),
            Selector::Irrelevant => Ok(space.full()),
        }
    }

    pub fn prob_closed(&self, assign: &Assignment) -> Result<f64> {
        match self.selector {
            Selector::No => self.failure.prob_closed(assign),
            Selector::Yes => Ok(1.0 - self.failure.prob_closed(assign)?),
            Selector::Irrelevant => Ok(1.0),
        }
    }

    /// The box as a fault-tree event: `NOT(failure)` for YES, `failure` for NO.
    pub fn outcome_ft(&self) -> Option<FtExpr> {
        match self.selector {
            Selector::No => Some(self.failure.clone()),
            Selector::Yes => Some(self.failure.clone().not()),
            Selector::Irrelevant => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequencePath {
    pub id: String,
    pub boxes: Vec<DecisionBox>,
}

impl ConsequencePath {
    pub fn new(id: impl Into<String>, boxes: Vec<DecisionBox>) -> Self {
        Self { id: id.into(), boxes }
    }

    /// Left fold of BRANCH over the box outcomes.
    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        let (first, rest) = self.boxes.split_first().ok_or_else(|| Error::EmptyPath(self.id.clone()))?;
        let mut acc = first.semantics(space)?;
        for b in rest {
            let step = EtExpr::Branch(EtLeaf::Set(acc), vec![EtExpr::set(b.semantics(space)?)]);
            acc = step.semantics(space)?;
        }
        Ok(acc)
    }

    /// Boxes that are not irrelevant.
    pub fn relevant_boxes(&self) -> impl Iterator<Item = &DecisionBox> {
        self.boxes.iter().filter(|b| b.selector != Selector::Irrelevant)
    }

    /// Checks the independence hypothesis of the product law: leaves are
    /// distinct inside each relevant box and no leaf is shared by two boxes.
    pub fn check_closed_form(&self) -> Result<()> {
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for b in self.relevant_boxes() {
            if let Some(leaf) = b.failure.repeated_leaf() {
                return Err(Error::SharedLeaf(leaf.to_string()));
            }
            for leaf in b.failure.leaf_set() {
                if let Some(prev) = owner.insert(leaf, &b.id) {
                    return Err(Error::SharedLeafAcrossBoxes {
                        leaf: leaf.to_string(),
                        first: prev.to_string(),
                        second: b.id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Product of the box outcome probabilities.
    pub fn prob_closed(&self, assign: &Assignment) -> Result<f64> {
        if self.boxes.is_empty() {
            return Err(Error::EmptyPath(self.id.clone()));
        }
        self.check_closed_form()?;
        self.boxes.iter().try_fold(1.0, |acc, b| Ok(acc * b.prob_closed(assign)?))
    }

    /// Distinct leaves of the relevant boxes.
    pub fn leaves(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for b in self.relevant_boxes() {
            for leaf in b.failure.leaves() {
                if seen.insert(leaf) {
                    out.push(leaf);
                }
            }
        }
        out
    }

    /// Order-independent identity of the event this path denotes, as far as
    /// it can be read off the structure.
    fn canonical(&self) -> Vec<(String, Selector)> {
        let mut key: Vec<(String, Selector)> =
            self.relevant_boxes().map(|b| (b.failure.to_string(), b.selector)).collect();
        key.sort();
        key.dedup();
        key
    }

    /// True when some fault tree is YES on one path and NO on the other.
    pub fn structurally_disjoint(&self, other: &ConsequencePath) -> bool {
        self.relevant_boxes().any(|a| {
            other
                .relevant_boxes()
                .any(|b| a.failure == b.failure && a.selector == b.selector.flipped())
        })
    }

    /// Boolean evaluation for one joint component state.
    pub fn eval_bool(&self, failed: &dyn Fn(&str) -> bool) -> bool {
        self.boxes.iter().all(|b| match b.selector {
            Selector::No => b.failure.eval_bool(failed),
            Selector::Yes => !b.failure.eval_bool(failed),
            Selector::Irrelevant => true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequenceBox {
    pub label: String,
    pub paths: Vec<ConsequencePath>,
}

/// Outcome of the pairwise path check for one consequence box.
#[derive(Debug, Clone, PartialEq)]
enum PairVerdict {
    Disjoint,
    Duplicate,
    Overlap,
    Unverified,
}

impl ConsequenceBox {
    pub fn new(label: impl Into<String>, paths: Vec<ConsequencePath>) -> Self {
        Self { label: label.into(), paths }
    }

    /// NODE over the path events.
    pub fn semantics(&self, space: &FiniteSpace) -> Result<EventSet> {
        let children = self
            .paths
            .iter()
            .map(|p| Ok(EtExpr::set(p.semantics(space)?)))
            .collect::<Result<Vec<_>>>()?;
        EtExpr::Node(children).semantics(space)
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.paths
            .iter()
            .flat_map(|p| p.leaves())
            .filter(|l| seen.insert(*l))
            .collect()
    }

    fn pair_verdicts(&self, space: Option<&FiniteSpace>) -> Result<Vec<(usize, usize, PairVerdict)>> {
        let sets = match space {
            Some(s) => Some(self.paths.iter().map(|p| p.semantics(s)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let keys: Vec<_> = self.paths.iter().map(ConsequencePath::canonical).collect();
        let mut out = Vec::new();
        for i in 0..self.paths.len() {
            for j in i + 1..self.paths.len() {
                let verdict = if keys[i] == keys[j] {
                    PairVerdict::Duplicate
                } else if self.paths[i].structurally_disjoint(&self.paths[j]) {
                    PairVerdict::Disjoint
                } else if let Some(sets) = &sets {
                    if sets[i] == sets[j] && !sets[i].is_empty() {
                        PairVerdict::Duplicate
                    } else if sets[i].is_disjoint(&sets[j]) {
                        PairVerdict::Disjoint
                    } else {
                        PairVerdict::Overlap
                    }
                } else {
                    PairVerdict::Unverified
                };
                out.push((i, j, verdict));
            }
        }
        Ok(out)
    }

    /// Sum of the path probabilities, after checking that the paths are
    /// pairwise disjoint and distinct. Without a space, disjointness must be
    /// evident from the structure.
    pub fn prob_closed(&self, assign: &Assignment, space: Option<&FiniteSpace>) -> Result<f64> {
        for (i, j, verdict) in self.pair_verdicts(space)? {
            let (a, b) = (&self.paths[i].id, &self.paths[j].id);
            match verdict {
                PairVerdict::Disjoint => {}
                PairVerdict::Duplicate => return Err(Error::DuplicatePath(b.clone())),
                PairVerdict::Overlap => {
                    return Err(Error::NotDisjoint(format!("paths `{a}` and `{b}` overlap")))
                }
                PairVerdict::Unverified => {
                    return Err(Error::NotDisjoint(format!(
                        "disjointness of paths `{a}` and `{b}` is not structurally evident; check with the oracle"
                    )))
                }
            }
        }
        let mut total = 0.0;
        for p in &self.paths {
            total += p.prob_closed(assign)?;
        }
        Ok(total)
    }

    /// Diagnostics for the hypotheses of the sum law.
    pub fn validate(&self, space: Option<&FiniteSpace>) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.paths.is_empty() {
            diags.push(Diagnostic::notice(
                Code::EmptyConsequence,
                format!("consequence `{}` has no paths and evaluates to 0", self.label),
            ));
            return diags;
        }
        let verdicts = match self.pair_verdicts(space) {
            Ok(v) => v,
            Err(e) => {
                diags.push(Diagnostic::error(Code::UnknownEvent, e.to_string()));
                return diags;
            }
        };
        for (i, j, verdict) in verdicts {
            let (a, b) = (&self.paths[i].id, &self.paths[j].id);
            let label = &self.label;
            match verdict {
                PairVerdict::Disjoint => {}
                PairVerdict::Duplicate => diags.push(Diagnostic::error(
                    Code::DuplicatePath,
                    format!("consequence `{label}`: paths `{a}` and `{b}` denote the same event"),
                )),
                PairVerdict::Overlap => diags.push(Diagnostic::error(
                    Code::NotDisjoint,
                    format!("consequence `{label}`: paths `{a}` and `{b}` overlap"),
                )),
                PairVerdict::Unverified => diags.push(Diagnostic::warning(
                    Code::DisjointnessUnverified,
                    format!("consequence `{label}`: disjointness of `{a}` and `{b}` is not structurally evident"),
                )),
            }
        }
        diags
    }

    pub fn eval_bool(&self, failed: &dyn Fn(&str) -> bool) -> bool {
        self.paths.iter().any(|p| p.eval_bool(failed))
    }
}

/// Every selector vector over `boxes` as one consequence box (2^k paths).
/// The result is a partition of the sample space.
pub fn full_expansion(label: &str, boxes: &[(String, FtExpr)]) -> ConsequenceBox {
    let k = boxes.len();
    let paths = (0..1usize << k)
        .map(|mask| {
            let bs = boxes
                .iter()
                .enumerate()
                .map(|(i, (id, ft))| {
                    let sel = if mask >> i & 1 == 1 { Selector::Yes } else { Selector::No };
                    DecisionBox::new(id.clone(), ft.clone(), sel)
                })
                .collect();
            ConsequencePath::new(format!("{label}_{mask}"), bs)
        })
        .collect();
    ConsequenceBox::new(label, paths)
}

// ============================================================================
// Reduction
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedBox {
    pub consequence: String,
    pub path: String,
    pub decision_box: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub boxes: Vec<ConsequenceBox>,
    pub dropped: Vec<DroppedBox>,
    /// (consequence, path) pairs whose boxes were all irrelevant.
    pub removed_paths: Vec<(String, String)>,
}

impl Reduction {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.removed_paths
            .iter()
            .map(|(c, p)| {
                Diagnostic::warning(
                    Code::AllSkipPath,
                    format!("consequence `{c}`: path `{p}` has only irrelevant boxes and was removed"),
                )
            })
            .collect()
    }
}

/// Drops every irrelevant box; paths left empty are removed.
pub fn reduce(ccd: &[ConsequenceBox]) -> Reduction {
    let mut dropped = Vec::new();
    let mut removed_paths = Vec::new();
    let boxes = ccd
        .iter()
        .map(|cbox| {
            let paths = cbox
                .paths
                .iter()
                .filter_map(|path| {
                    let kept: Vec<DecisionBox> = path
                        .boxes
                        .iter()
                        .filter(|b| {
                            let keep = b.selector != Selector::Irrelevant;
                            if !keep {
                                dropped.push(DroppedBox {
                                    consequence: cbox.label.clone(),
                                    path: path.id.clone(),
                                    decision_box: b.id.clone(),
                                });
                            }
                            keep
                        })
                        .cloned()
                        .collect();
                    if kept.is_empty() {
                        removed_paths.push((cbox.label.clone(), path.id.clone()));
                        None
                    } else {
                        Some(ConsequencePath::new(path.id.clone(), kept))
                    }
                })
                .collect();
            ConsequenceBox::new(cbox.label.clone(), paths)
        })
        .collect();
    Reduction { boxes, dropped, removed_paths }
}

// ============================================================================
// Homogeneous N-level paths
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathType {
    /// Every box carries an AND fault tree.
    A,
    /// Every box carries an OR fault tree.
    B,
    /// AND and OR boxes mixed.
    C,
}

/// Named leaf probabilities of one decision box.
pub type LeafGroup = Vec<(String, f64)>;

/// Leaf groups of an N-level path, split by gate and outcome. Each group
/// becomes one decision box.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HomogeneousGroups {
    pub and_no: Vec<LeafGroup>,
    pub and_yes: Vec<LeafGroup>,
    pub or_no: Vec<LeafGroup>,
    pub or_yes: Vec<LeafGroup>,
}

impl HomogeneousGroups {
    pub fn box_count(&self) -> usize {
        self.and_no.len() + self.and_yes.len() + self.or_no.len() + self.or_yes.len()
    }

    /// Product form evaluated straight from the leaf probabilities:
    /// `Π ΠF` for AND/NO, `Π (1 - ΠF)` for AND/YES,
    /// `Π (1 - Π(1-F))` for OR/NO and `Π Π(1-F)` for OR/YES.
    pub fn formula(&self) -> f64 {
        let all_fail = |g: &LeafGroup| g.iter().map(|(_, p)| p).product::<f64>();
        let all_survive = |g: &LeafGroup| g.iter().map(|(_, p)| 1.0 - p).product::<f64>();
        let and_no: f64 = self.and_no.iter().map(all_fail).product();
        let and_yes: f64 = self.and_yes.iter().map(|g| 1.0 - all_fail(g)).product();
        let or_no: f64 = self.or_no.iter().map(|g| 1.0 - all_survive(g)).product();
        let or_yes: f64 = self.or_yes.iter().map(all_survive).product();
        and_no * and_yes * or_no * or_yes
    }
}

/// Builds the N-level path for the given groups (boxes ordered AND/NO,
/// AND/YES, OR/NO, OR/YES) together with the assignment of its leaves.
pub fn build_homogeneous_path(
    kind: PathType,
    groups: &HomogeneousGroups,
) -> Result<(ConsequencePath, Assignment)> {
    let has_and = !groups.and_no.is_empty() || !groups.and_yes.is_empty();
    let has_or = !groups.or_no.is_empty() || !groups.or_yes.is_empty();
    match kind {
        PathType::A if has_or => {
            return Err(Error::InvalidArgument("type A paths contain only AND boxes".into()))
        }
        PathType::B if has_and => {
            return Err(Error::InvalidArgument("type B paths contain only OR boxes".into()))
        }
        _ => {}
    }
    if groups.box_count() == 0 {
        return Err(Error::EmptyPath(format!("type {kind:?}")));
    }

    let sections: [(&[LeafGroup], bool, Selector, &str); 4] = [
        (&groups.and_no, true, Selector::No, "and_no"),
        (&groups.and_yes, true, Selector::Yes, "and_yes"),
        (&groups.or_no, false, Selector::No, "or_no"),
        (&groups.or_yes, false, Selector::Yes, "or_yes"),
    ];
    let mut boxes = Vec::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    let mut probs = Vec::new();
    for (section, is_and, selector, tag) in sections {
        for (i, group) in section.iter().enumerate() {
            let box_id = format!("{tag}{i}");
            for (leaf, p) in group {
                if let Some(prev) = owner.insert(leaf.clone(), box_id.clone()) {
                    return Err(Error::SharedLeafAcrossBoxes {
                        leaf: leaf.clone(),
                        first: prev,
                        second: box_id,
                    });
                }
                probs.push((leaf.clone(), *p));
            }
            let ids = group.iter().map(|(l, _)| l.clone());
            let ft = if is_and { FtExpr::and_of(ids) } else { FtExpr::or_of(ids) };
            boxes.push(DecisionBox::new(box_id, ft, selector));
        }
    }
    let path = ConsequencePath::new(format!("type_{kind:?}"), boxes);
    Ok((path, Assignment::from_probs(probs)?))
}
