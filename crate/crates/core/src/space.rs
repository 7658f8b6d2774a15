//! Exact finite probability space over independent Bernoulli basic events.
//!
//! A [`FiniteSpace`] materializes all `2^n` joint states of `n` independent
//! components. Outcome `ω` is an index whose bit `i` is set when event `i`
//! occurred (the component failed). An [`EventSet`] is a bitset over those
//! outcomes, tagged with the identity of the space that produced it, so
//! probabilities are plain weighted sums.
//!
//! This is the reference oracle for every closed-form result in the crate.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default number of basic events the oracle will enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Tolerance for exact-arithmetic comparisons.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for mutual-independence checks.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

static NEXT_SPACE_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct FiniteSpace {
    id: u64,
    ids: Vec<String>,
    probs: Vec<f64>,
    index: HashMap<String, usize>,
    weights: Vec<f64>,
}

impl FiniteSpace {
    /// Builds the product space with the default enumeration cap.
    pub fn build<S: AsRef<str>>(events: &[(S, f64)]) -> Result<Self> {
        Self::build_with_cap(events, DEFAULT_ENUMERATION_CAP)
    }

    pub fn build_with_cap<S: AsRef<str>>(events: &[(S, f64)], cap: usize) -> Result<Self> {
        let n = events.len();
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        // 2^n has to be addressable regardless of the configured cap.
        if n >= usize::BITS as usize - 1 {
            return Err(Error::CapExceeded { n, cap: usize::BITS as usize - 2 });
        }

        let mut ids = Vec::with_capacity(n);
        let mut probs = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        for (i, (id, p)) in events.iter().enumerate() {
            let id = id.as_ref();
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidProbability { id: id.to_string(), value: *p });
            }
            if index.insert(id.to_string(), i).is_some() {
                return Err(Error::DuplicateEvent(id.to_string()));
            }
            ids.push(id.to_string());
            probs.push(*p);
        }

        // Doubling construction: after step i the first 2^(i+1) entries hold
        // the joint weights of events 0..=i.
        let mut weights = vec![0.0; 1usize << n];
        weights[0] = 1.0;
        for (i, &p) in probs.iter().enumerate() {
            let half = 1usize << i;
            for w in 0..half {
                let base = weights[w];
                weights[w + half] = base * p;
                weights[w] = base * (1.0 - p);
            }
        }

        Ok(Self {
            id: NEXT_SPACE_ID.fetch_add(1, Ordering::Relaxed),
            ids,
            probs,
            index,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn outcome_count(&self) -> usize {
        self.weights.len()
    }

    pub fn event_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn event_prob(&self, id: &str) -> Option<f64> {
        self.index.get(id).map(|&i| self.probs[i])
    }

    pub fn weight(&self, outcome: usize) -> f64 {
        self.weights[outcome]
    }

    /// True if event `i` occurred in `outcome`.
    pub fn occurred(&self, outcome: usize, event: usize) -> bool {
        outcome >> event & 1 == 1
    }

    pub fn empty(&self) -> EventSet {
        EventSet::new(self.id, self.outcome_count(), false)
    }

    pub fn full(&self) -> EventSet {
        EventSet::new(self.id, self.outcome_count(), true)
    }

    /// The event "basic event `id` occurred".
    pub fn atomic(&self, id: &str) -> Result<EventSet> {
        let i = *self.index.get(id).ok_or_else(|| Error::UnknownEvent(id.to_string()))?;
        Ok(self.from_predicate(|w| w >> i & 1 == 1))
    }

    pub fn from_predicate(&self, pred: impl Fn(usize) -> bool) -> EventSet {
        let mut set = self.empty();
        for w in 0..self.outcome_count() {
            if pred(w) {
                set.insert(w);
            }
        }
        set
    }

    fn owns(&self, e: &EventSet) -> bool {
        e.space == self.id && e.outcomes == self.outcome_count()
    }

    /// Σ of outcome weights in `e`.
    pub fn prob(&self, e: &EventSet) -> Result<f64> {
        if !self.owns(e) {
            return Err(Error::ForeignEvent);
        }
        let mut sum = NeumaierSum::default();
        for w in e.iter() {
            sum.add(self.weights[w]);
        }
        Ok(sum.value().clamp(0.0, 1.0))
    }

    pub fn complement(&self, e: &EventSet) -> Result<EventSet> {
        if !self.owns(e) {
            return Err(Error::ForeignEvent);
        }
        Ok(e.complement())
    }

    pub fn check_disjoint(&self, es: &[EventSet]) -> Result<bool> {
        if es.iter().any(|e| !self.owns(e)) {
            return Err(Error::ForeignEvent);
        }
        for (i, a) in es.iter().enumerate() {
            for b in &es[i + 1..] {
                if !a.is_disjoint(b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// True iff every non-empty sub-collection has intersection probability
    /// equal to the product of the individual probabilities.
    pub fn check_mutual_independence(&self, es: &[EventSet]) -> Result<bool> {
        const MAX_EVENTS: usize = 20;
        if es.len() > MAX_EVENTS {
            return Err(Error::CapExceeded { n: es.len(), cap: MAX_EVENTS });
        }
        if es.iter().any(|e| !self.owns(e)) {
            return Err(Error::ForeignEvent);
        }
        let marginals = es.iter().map(|e| self.prob(e)).collect::<Result<Vec<_>>>()?;
        for mask in 1usize..(1 << es.len()) {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut inter = self.full();
            let mut product = 1.0;
            for (i, e) in es.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    inter = inter.intersection(e);
                    product *= marginals[i];
                }
            }
            if (self.prob(&inter)? - product).abs() > INDEPENDENCE_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Set of outcomes of one [`FiniteSpace`].
///
/// Representation is canonical: two sets from the same space are equal iff
/// they contain the same outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    space: u64,
    outcomes: usize,
    words: Vec<u64>,
}

impl EventSet {
    fn new(space: u64, outcomes: usize, filled: bool) -> Self {
        let nwords = outcomes.div_ceil(64);
        let mut words = vec![if filled { u64::MAX } else { 0 }; nwords];
        if filled {
            let tail = outcomes % 64;
            if tail != 0 {
                if let Some(last) = words.last_mut() {
                    *last = (1u64 << tail) - 1;
                }
            }
        }
        Self { space, outcomes, words }
    }

    fn insert(&mut self, w: usize) {
        self.words[w / 64] |= 1 << (w % 64);
    }

    pub fn contains(&self, w: usize) -> bool {
        w < self.outcomes && self.words[w / 64] >> (w % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.outcomes
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + tz)
            })
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.space, other.space, "event sets from different spaces");
        Self {
            space: self.space,
            outcomes: self.outcomes,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// # Panics
    /// If the sets come from different spaces.
    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    /// # Panics
    /// If the sets come from different spaces.
    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let full = Self::new(self.space, self.outcomes, true);
        full.difference(self)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.space == other.space && self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.space == other.space && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.space == other.space
    }
}

/// Compensated summation; keeps the oracle's error well below 1e-12 for
/// spaces with up to a million outcomes.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> FiniteSpace {
        FiniteSpace::build(&[("a", 0.2), ("b", 0.3)]).unwrap()
    }

    #[test]
    fn two_event_weights() {
        let s = ab();
        assert_eq!(s.outcome_count(), 4);
        // bit0 = a, bit1 = b
        let expected = [0.8 * 0.7, 0.2 * 0.7, 0.8 * 0.3, 0.2 * 0.3];
        for (w, e) in expected.iter().enumerate() {
            assert!((s.weight(w) - e).abs() < 1e-15);
        }
        let mut sorted: Vec<f64> = (0..4).map(|w| s.weight(w)).collect();
        sorted.sort_by(f64::total_cmp);
        for (got, want) in sorted.iter().zip([0.06, 0.14, 0.24, 0.56]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((s.prob(&s.full()).unwrap() - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn empty_space_has_one_outcome() {
        let s = FiniteSpace::build::<&str>(&[]).unwrap();
        assert_eq!(s.outcome_count(), 1);
        assert_eq!(s.prob(&s.full()).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_bernoulli() {
        let s = FiniteSpace::build(&[("a", 1.0)]).unwrap();
        assert_eq!(s.weight(1), 1.0);
        assert_eq!(s.weight(0), 0.0);
    }

    #[test]
    fn build_errors() {
        let events: Vec<(String, f64)> = (0..21).map(|i| (format!("e{i}"), 0.5)).collect();
        assert_eq!(FiniteSpace::build(&events).unwrap_err(), Error::CapExceeded { n: 21, cap: 20 });
        assert!(matches!(
            FiniteSpace::build(&[("a", 1.5)]),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            FiniteSpace::build(&[("a", -0.1)]),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            FiniteSpace::build(&[("a", f64::NAN)]),
            Err(Error::InvalidProbability { .. })
        ));
        assert_eq!(
            FiniteSpace::build(&[("a", 0.1), ("a", 0.2)]).unwrap_err(),
            Error::DuplicateEvent("a".into())
        );
    }

    #[test]
    fn prob_basics() {
        let s = ab();
        let a = s.atomic("a").unwrap();
        assert!((s.prob(&a).unwrap() - 0.2).abs() < EXACT_TOL);
        assert_eq!(s.prob(&s.empty()).unwrap(), 0.0);
        assert!((s.prob(&s.full()).unwrap() - 1.0).abs() < EXACT_TOL);
        assert_eq!(s.atomic("zzz").unwrap_err(), Error::UnknownEvent("zzz".into()));
    }

    #[test]
    fn foreign_event_rejected() {
        let s1 = ab();
        let s2 = ab();
        let e = s2.atomic("a").unwrap();
        assert_eq!(s1.prob(&e).unwrap_err(), Error::ForeignEvent);
        assert_eq!(s1.check_disjoint(&[e]).unwrap_err(), Error::ForeignEvent);
    }

    #[test]
    fn disjointness() {
        let s = ab();
        let a = s.atomic("a").unwrap();
        let b = s.atomic("b").unwrap();
        assert!(s.check_disjoint(&[a.clone(), a.complement()]).unwrap());
        assert!(!s.check_disjoint(&[a.clone(), b]).unwrap());
        assert!(s.check_disjoint(&[a]).unwrap());
        assert!(s.check_disjoint(&[]).unwrap());
    }

    #[test]
    fn independence() {
        let s = ab();
        let a = s.atomic("a").unwrap();
        let b = s.atomic("b").unwrap();
        assert!(s.check_mutual_independence(&[a.clone(), b.clone()]).unwrap());
        // P(a ∩ a) = 0.2, P(a)P(a) = 0.04
        assert!(!s.check_mutual_independence(&[a.clone(), a.clone()]).unwrap());
        // Adding the certain event changes nothing.
        assert!(s.check_mutual_independence(&[a.clone(), b, s.full()]).unwrap());
        assert!(!s.check_mutual_independence(&[a.clone(), a, s.full()]).unwrap());
    }

    #[test]
    fn set_algebra() {
        let s = FiniteSpace::build(&[("a", 0.5), ("b", 0.5), ("c", 0.5)]).unwrap();
        let a = s.atomic("a").unwrap();
        let b = s.atomic("b").unwrap();
        assert_eq!(a.union(&b).len(), 6);
        assert_eq!(a.intersection(&b).len(), 2);
        assert!(a.intersection(&b).is_subset(&a));
        assert_eq!(a.complement().complement(), a);
        assert!(s.full().is_full());
        assert!(s.empty().is_empty());
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn large_space_sums_to_one() {
        let events: Vec<(String, f64)> =
            (0..20).map(|i| (format!("e{i}"), 0.013 + 0.047 * i as f64)).collect();
        let s = FiniteSpace::build(&events).unwrap();
        assert!((s.prob(&s.full()).unwrap() - 1.0).abs() < EXACT_TOL);
    }
}
