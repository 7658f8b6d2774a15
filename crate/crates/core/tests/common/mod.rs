//! Random instance generators shared by the property, fixture and
//! acceptance suites. Everything is driven by a seeded ChaCha stream so a
//! failing case can be replayed from its seed.

#![allow(dead_code)]

use ccd_core::ccd::{ConsequenceBox, ConsequencePath, DecisionBox, Selector};
use ccd_core::{Assignment, FiniteSpace, FtExpr};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Gen = ChaCha8Rng;

pub fn gen(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Mostly interior values with the occasional certain or impossible event.
pub fn prob(g: &mut Gen) -> f64 {
    match g.random_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => g.random::<f64>(),
    }
}

pub fn probs(g: &mut Gen, ids: &[String]) -> Vec<(String, f64)> {
    ids.iter().map(|id| (id.clone(), prob(g))).collect()
}

pub struct World {
    pub space: FiniteSpace,
    pub assign: Assignment,
}

impl World {
    pub fn new(events: &[(String, f64)]) -> Self {
        World {
            space: FiniteSpace::build(events).expect("space"),
            assign: Assignment::from_probs(events.iter().cloned()).expect("assignment"),
        }
    }

    pub fn random(g: &mut Gen, ids: &[String]) -> Self {
        Self::new(&probs(g, ids))
    }

    pub fn prob_ft(&self, ft: &FtExpr) -> f64 {
        self.space.prob(&ft.semantics(&self.space).unwrap()).unwrap()
    }

    pub fn prob_path(&self, p: &ConsequencePath) -> f64 {
        self.space.prob(&p.semantics(&self.space).unwrap()).unwrap()
    }

    pub fn prob_box(&self, b: &ConsequenceBox) -> f64 {
        self.space.prob(&b.semantics(&self.space).unwrap()).unwrap()
    }
}

/// Splits `items` into `k` non-empty groups after a shuffle.
pub fn split<T: Clone>(g: &mut Gen, items: &[T], k: usize) -> Vec<Vec<T>> {
    assert!(k >= 1 && k <= items.len());
    let mut shuffled = items.to_vec();
    shuffled.shuffle(g);
    let mut cuts: Vec<usize> = (1..items.len()).collect();
    cuts.shuffle(g);
    let mut cuts = cuts[..k - 1].to_vec();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts.into_iter().chain([items.len()]) {
        out.push(shuffled[start..c].to_vec());
        start = c;
    }
    out
}

/// A fault tree using each of `leaves` exactly once.
pub fn ft_over(g: &mut Gen, leaves: &[String], allow_not: bool) -> FtExpr {
    let ft = if leaves.len() == 1 {
        FtExpr::atomic(leaves[0].clone())
    } else {
        let k = g.random_range(2..=leaves.len().min(4));
        let mut children: Vec<FtExpr> =
            split(g, leaves, k).iter().map(|grp| ft_over(g, grp, allow_not)).collect();
        if g.random_range(0..20) == 0 {
            children.push(if g.random_bool(0.5) { FtExpr::And(vec![]) } else { FtExpr::Or(vec![]) });
        }
        if g.random_bool(0.5) {
            FtExpr::And(children)
        } else {
            FtExpr::Or(children)
        }
    };
    if allow_not && g.random_range(0..6) == 0 {
        ft.not()
    } else {
        ft
    }
}

/// A fault tree of `size` leaf slots drawn from `pool` with repetition.
pub fn ft_with_repeats(g: &mut Gen, pool: &[String], size: usize) -> FtExpr {
    if size <= 1 {
        let leaf = FtExpr::atomic(pool[g.random_range(0..pool.len())].clone());
        return if g.random_range(0..6) == 0 { leaf.not() } else { leaf };
    }
    let k = g.random_range(2..=size.min(3));
    let slots: Vec<usize> = (0..size).collect();
    let children = split(g, &slots, k).iter().map(|s| ft_with_repeats(g, pool, s.len())).collect();
    if g.random_bool(0.5) {
        FtExpr::And(children)
    } else {
        FtExpr::Or(children)
    }
}

pub fn selector(g: &mut Gen, allow_skip: bool) -> Selector {
    match g.random_range(0..if allow_skip { 5 } else { 4 }) {
        0 | 1 => Selector::No,
        2 | 3 => Selector::Yes,
        _ => Selector::Irrelevant,
    }
}

/// Box fault trees over disjoint slices of `leaves`.
pub fn boxes_over(g: &mut Gen, leaves: &[String], max_boxes: usize) -> Vec<(String, FtExpr)> {
    let k = g.random_range(1..=leaves.len().min(max_boxes));
    split(g, leaves, k)
        .iter()
        .enumerate()
        .map(|(i, grp)| (format!("X{i}"), ft_over(g, grp, true)))
        .collect()
}

pub fn random_path(g: &mut Gen, leaves: &[String], allow_skip: bool) -> ConsequencePath {
    let boxes = boxes_over(g, leaves, 4)
        .into_iter()
        .map(|(id, ft)| DecisionBox::new(id, ft, selector(g, allow_skip)))
        .collect();
    ConsequencePath::new("P", boxes)
}

pub fn path_with(id: &str, boxes: &[(String, FtExpr)], sels: &[Selector]) -> ConsequencePath {
    let bs = boxes
        .iter()
        .zip(sels)
        .map(|((bid, ft), s)| DecisionBox::new(bid.clone(), ft.clone(), *s))
        .collect();
    ConsequencePath::new(id, bs)
}

/// Selector vectors of a random decision tree over `k` boxes: each level
/// either splits on the box or skips it. The vectors partition the space
/// and the first box always splits, so no vector is all-skip.
pub fn decision_tree(g: &mut Gen, k: usize) -> Vec<Vec<Selector>> {
    fn grow(g: &mut Gen, k: usize, prefix: Vec<Selector>, out: &mut Vec<Vec<Selector>>) {
        if prefix.len() == k {
            out.push(prefix);
            return;
        }
        if !prefix.is_empty() && g.random_range(0..4) == 0 {
            let mut p = prefix;
            p.push(Selector::Irrelevant);
            grow(g, k, p, out);
        } else {
            for s in [Selector::No, Selector::Yes] {
                let mut p = prefix.clone();
                p.push(s);
                grow(g, k, p, out);
            }
        }
    }
    let mut out = Vec::new();
    grow(g, k, Vec::new(), &mut out);
    out
}

/// A consequence box made of a random non-empty subset of the leaves of a
/// random decision tree, so its paths are disjoint by construction.
pub fn random_consequence(g: &mut Gen, label: &str, boxes: &[(String, FtExpr)]) -> ConsequenceBox {
    let vectors = decision_tree(g, boxes.len());
    let mut chosen: Vec<usize> = (0..vectors.len()).filter(|_| g.random_bool(0.6)).collect();
    if chosen.is_empty() {
        chosen.push(g.random_range(0..vectors.len()));
    }
    let paths = chosen
        .iter()
        .map(|&i| path_with(&format!("{label}_{i}"), boxes, &vectors[i]))
        .collect();
    ConsequenceBox::new(label, paths)
}

/// Every consequence of one decision tree: the tree leaves dealt out over
/// `labels` consequence boxes.
pub fn random_ccd(g: &mut Gen, boxes: &[(String, FtExpr)], labels: usize) -> Vec<ConsequenceBox> {
    let vectors = decision_tree(g, boxes.len());
    let mut paths: Vec<Vec<ConsequencePath>> = vec![Vec::new(); labels];
    for (i, v) in vectors.iter().enumerate() {
        paths[g.random_range(0..labels)].push(path_with(&format!("P{i}"), boxes, v));
    }
    paths
        .into_iter()
        .enumerate()
        .map(|(i, ps)| ConsequenceBox::new(format!("C{i}"), ps))
        .collect()
}

const IDENT_START: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
const IDENT_REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";

fn ident(g: &mut Gen, used: &mut std::collections::HashSet<String>) -> String {
    loop {
        let len = g.random_range(1..8);
        let mut s = String::new();
        s.push(IDENT_START[g.random_range(0..IDENT_START.len())] as char);
        for _ in 1..len {
            s.push(IDENT_REST[g.random_range(0..IDENT_REST.len())] as char);
        }
        if !matches!(s.as_str(), "AND" | "OR" | "NOT") && used.insert(s.clone()) {
            return s;
        }
    }
}

fn float_text(g: &mut Gen, lo: f64, hi: f64) -> String {
    let x = g.random_range(lo..hi);
    match g.random_range(0..4) {
        0 => format!("{x:e}"),
        1 => format!("{x:.3}"),
        _ => format!("{x}"),
    }
}

fn expr_text(g: &mut Gen, refs: &[String], depth: usize) -> String {
    if depth == 0 || g.random_range(0..3) == 0 {
        return refs[g.random_range(0..refs.len())].clone();
    }
    match g.random_range(0..4) {
        0 => format!("NOT({})", expr_text(g, refs, depth - 1)),
        k => {
            let gate = if k == 1 { "AND" } else { "OR" };
            let n = g.random_range(0..4);
            let args: Vec<String> = (0..n).map(|_| expr_text(g, refs, depth - 1)).collect();
            format!("{gate}({})", args.join(", "))
        }
    }
}

/// Text of a random model that parses: every reference resolves and names
/// are unique. Declarations appear in shuffled order with comments and
/// blank lines mixed in.
pub fn model_text(g: &mut Gen) -> String {
    let mut used = std::collections::HashSet::new();
    let mut lines = Vec::new();
    if g.random_bool(0.7) {
        let name: String = (0..g.random_range(0..6))
            .map(|_| *b"a\"\\ z\t".choose(g).unwrap() as char)
            .collect();
        let escaped = name.replace('\\', "\\\\").replace('"', "\\\"").replace('\t', "\\t");
        lines.push(format!("model \"{escaped}\""));
    }
    if g.random_bool(0.5) {
        let unit = if g.random_bool(0.5) { "years" } else { "hours" };
        lines.push(format!("mission t={} unit={unit}", float_text(g, 0.0, 50.0)));
    }
    let events: Vec<String> = (0..g.random_range(1..10)).map(|_| ident(g, &mut used)).collect();
    for e in &events {
        if g.random_bool(0.5) {
            lines.push(format!("event {e} rate={}", float_text(g, 0.0, 5.0)));
        } else {
            lines.push(format!("event {e} prob={}", float_text(g, 0.0, 1.0)));
        }
    }
    let mut refs = events.clone();
    let mut fts = Vec::new();
    for _ in 0..g.random_range(0..5) {
        let name = ident(g, &mut used);
        lines.push(format!("ft {name} = {}", expr_text(g, &refs, 3)));
        refs.push(name.clone());
        fts.push(name);
    }
    let boxes: Vec<String> = (0..g.random_range(0..5)).map(|_| ident(g, &mut used)).collect();
    for b in &boxes {
        lines.push(format!("box {b} = dec({})", refs[g.random_range(0..refs.len())]));
    }
    let mut paths = Vec::new();
    if !boxes.is_empty() {
        for _ in 0..g.random_range(0..5) {
            let name = ident(g, &mut used);
            let steps: Vec<String> = (0..g.random_range(0..4))
                .map(|_| {
                    let b = &boxes[g.random_range(0..boxes.len())];
                    let sel = ["yes", "no", "skip", "0", "1", "2", "7"][g.random_range(0..7)];
                    format!("{b}:{sel}")
                })
                .collect();
            lines.push(format!("path {name} = [{}]", steps.join(", ")));
            paths.push(name);
        }
    }
    let mut consequences = Vec::new();
    for _ in 0..g.random_range(0..3) {
        let name = ident(g, &mut used);
        let members: Vec<String> =
            paths.iter().filter(|_| g.random_bool(0.5)).cloned().collect();
        lines.push(format!("consequence {name} = {{ {} }}", members.join(", ")));
        consequences.push(name);
    }
    for c in &consequences {
        if g.random_bool(0.5) {
            let name = ident(g, &mut used);
            lines.push(format!(
                "load {name} consequence={c} mttr={} customers={}",
                float_text(g, 0.5, 50.0),
                g.random_range(1..10_000)
            ));
        }
    }
    lines.shuffle(g);
    let mut out = String::new();
    for l in lines {
        if g.random_range(0..5) == 0 {
            out.push_str("# note\n\n");
        }
        out.push_str(&l);
        out.push('\n');
    }
    out
}
