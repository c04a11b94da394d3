//! Symbols, finite pasts and the occurrence predicates built on them.
//!
//! Every string in this crate is stored oldest-first: for a past `v` of
//! length `n`, `v[n - 1]` is the most recent symbol (time `-1`) and `v[0]`
//! sits at time `-n`. Writing a conditioning past as `b · w · c` means `b`
//! occupies the most recent slots, then `w`, then `c`; as a slice that is
//! `[c, w, b]`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the alphabet size.
pub const MAX_ALPHABET: usize = 64;

/// Dense index into a finite alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u8);

impl Symbol {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite alphabet with human-readable labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::with_limit(labels, MAX_ALPHABET)
    }

    pub fn with_limit<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        limit: usize,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 || labels.len() > limit.min(256) {
            return Err(Error::ParameterOutOfRange(format!(
                "alphabet size {} outside [2, {}]",
                labels.len(),
                limit.min(256)
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::ParameterOutOfRange(format!("duplicate label {l:?}")));
            }
        }
        Ok(Alphabet { labels })
    }

    /// Alphabet labelled `"1"`, `"2"`, ..., `"size"`.
    pub fn numbered(size: usize) -> Result<Self> {
        Self::new((1..=size).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.labels.len()).map(|i| Symbol(i as u8))
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.labels[s.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parse(&self, label: &str) -> Option<Symbol> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| Symbol(i as u8))
    }

    pub fn parse_string<S: AsRef<str>>(&self, labels: &[S]) -> Result<SuffixString> {
        labels
            .iter()
            .map(|l| {
                self.parse(l.as_ref()).ok_or_else(|| {
                    Error::ParameterOutOfRange(format!("unknown symbol label {:?}", l.as_ref()))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(SuffixString::from)
    }
}

/// A finite string of past symbols, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuffixString(Vec<Symbol>);

impl SuffixString {
    pub fn empty() -> Self {
        SuffixString(Vec::new())
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self · other` in time order: `other` is the more recent block.
    pub fn then(&self, other: &[Symbol]) -> SuffixString {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        SuffixString(v)
    }

    /// The `len` most recent symbols.
    pub fn suffix(&self, len: usize) -> &[Symbol] {
        &self.0[self.0.len() - len.min(self.0.len())..]
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }
}

impl From<Vec<Symbol>> for SuffixString {
    fn from(v: Vec<Symbol>) -> Self {
        SuffixString(v)
    }
}

impl From<&[Symbol]> for SuffixString {
    fn from(v: &[Symbol]) -> Self {
        SuffixString(v.to_vec())
    }
}

impl std::ops::Deref for SuffixString {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

/// Backward distance to the most recent occurrence of `w` in `v`:
/// the least `k >= 0` with `v[-k-|w| .. -k-1] = w`, or `None` for +infinity.
pub fn m_w(w: &[Symbol], v: &[Symbol]) -> Option<usize> {
    assert!(!w.is_empty(), "reference string must be nonempty");
    let n = v.len();
    if n < w.len() {
        return None;
    }
    let last = *w.last().unwrap();
    (0..=n - w.len()).find(|&k| {
        let end = n - k;
        v[end - 1] == last && &v[end - w.len()..end] == w
    })
}

/// Whether appending `v` after `w` keeps `w · v` with a single occurrence of
/// `w`, i.e. `v` is a possible block between the last occurrence of `w` and
/// the present.
pub fn in_i_k_wbar(w: &[Symbol], v: &[Symbol]) -> bool {
    let mut joined = Vec::with_capacity(w.len() + v.len());
    joined.extend_from_slice(w);
    joined.extend_from_slice(v);
    joined.windows(w.len()).filter(|win| *win == w).count() == 1
}

/// Whether `w` is absent from `v`.
pub fn in_a_k_wbar(w: &[Symbol], v: &[Symbol]) -> bool {
    !contains(v, w)
}

pub fn contains(v: &[Symbol], w: &[Symbol]) -> bool {
    w.is_empty() || v.windows(w.len()).any(|win| win == w)
}

/// An element of `A^{-N}` with a finite description: a finite recent block
/// preceded by a cycle repeated forever into the past.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Past {
    recent: Vec<Symbol>,
    cycle: Vec<Symbol>,
}

impl Past {
    /// `cycle` is repeated to the left of `recent`; its last symbol is
    /// adjacent to `recent[0]`.
    pub fn new(recent: Vec<Symbol>, cycle: Vec<Symbol>) -> Self {
        assert!(!cycle.is_empty(), "tail cycle must be nonempty");
        Past { recent, cycle }
    }

    /// `...s s s` followed by `recent`.
    pub fn constant_tail(recent: Vec<Symbol>, s: Symbol) -> Self {
        Past::new(recent, vec![s])
    }

    pub fn recent(&self) -> &[Symbol] {
        &self.recent
    }

    pub fn cycle(&self) -> &[Symbol] {
        &self.cycle
    }

    /// Symbol at time `-back` (`back >= 1`).
    pub fn at(&self, back: usize) -> Symbol {
        debug_assert!(back >= 1);
        let r = self.recent.len();
        if back <= r {
            self.recent[r - back]
        } else {
            let c = self.cycle.len();
            let j = (back - r - 1) % c;
            self.cycle[c - 1 - j]
        }
    }

    /// The `len` most recent symbols, oldest first.
    pub fn suffix(&self, len: usize) -> Vec<Symbol> {
        (1..=len).rev().map(|b| self.at(b)).collect()
    }

    /// Length after which the past is purely periodic.
    pub fn periodic_horizon(&self) -> usize {
        self.recent.len() + self.cycle.len()
    }

    /// `m_w` over the whole infinite past.
    pub fn m_w(&self, w: &[Symbol]) -> Option<usize> {
        let horizon = self.periodic_horizon() + w.len();
        m_w(w, &self.suffix(horizon))
    }
}

/// Time-indexed partial knowledge of a chain: each slot holds a symbol or
/// the unknown marker.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialPast {
    slots: BTreeMap<i64, Option<Symbol>>,
}

impl PartialPast {
    pub fn new() -> Self {
        Self::default()
    }

    /// Contiguous window `start..start+values.len()`.
    pub fn from_window(start: i64, values: impl IntoIterator<Item = Option<Symbol>>) -> Self {
        let slots = values
            .into_iter()
            .enumerate()
            .map(|(k, v)| (start + k as i64, v))
            .collect();
        PartialPast { slots }
    }

    pub fn set(&mut self, time: i64, value: Option<Symbol>) {
        self.slots.insert(time, value);
    }

    pub fn get(&self, time: i64) -> Option<Symbol> {
        self.slots.get(&time).copied().flatten()
    }

    /// Maximal contiguous block of known symbols ending at the right edge.
    pub fn known_suffix(&self) -> SuffixString {
        let mut out = Vec::new();
        let mut expected: Option<i64> = None;
        for (&t, v) in self.slots.iter().rev() {
            if let Some(e) = expected {
                if t != e {
                    break;
                }
            }
            match v {
                Some(s) => out.push(*s),
                None => break,
            }
            expected = Some(t - 1);
        }
        out.reverse();
        SuffixString(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(labels: &[u8]) -> Vec<Symbol> {
        labels.iter().map(|&l| Symbol(l - 1)).collect()
    }

    #[test]
    fn distance_to_last_occurrence() {
        assert_eq!(m_w(&s(&[2]), &s(&[2])), Some(0));
        assert_eq!(m_w(&s(&[2]), &s(&[2, 1, 1])), Some(2));
        assert_eq!(m_w(&s(&[1, 2]), &s(&[1, 2, 1])), Some(1));
        assert_eq!(m_w(&s(&[2]), &s(&[1, 1, 1])), None);
        assert_eq!(m_w(&s(&[1, 2]), &s(&[2])), None);
    }

    #[test]
    fn unique_occurrence_predicate() {
        assert!(in_i_k_wbar(&s(&[2]), &s(&[1, 1])));
        assert!(!in_i_k_wbar(&s(&[2]), &s(&[1, 2])));
        // w·v = 1,2,2,1 holds "12" once
        assert!(in_i_k_wbar(&s(&[1, 2]), &s(&[2, 1])));
        assert!(!in_i_k_wbar(&s(&[1, 2]), &s(&[1, 2])));
        // overlap with w itself creates a new occurrence
        assert!(!in_i_k_wbar(&s(&[2, 2]), &s(&[2])));
        assert!(in_i_k_wbar(&s(&[2]), &[]));
    }

    #[test]
    fn absence_predicate() {
        assert!(in_a_k_wbar(&s(&[2]), &s(&[1, 1, 1])));
        assert!(!in_a_k_wbar(&s(&[2]), &s(&[1, 2, 1])));
        assert!(in_a_k_wbar(&s(&[1, 2]), &s(&[2, 2, 1])));
    }

    #[test]
    fn past_indexing_wraps_cycle() {
        let p = Past::new(s(&[1, 2]), s(&[2, 1, 1]));
        // ... 2 1 1 2 1 1 | 1 2
        assert_eq!(p.at(1), Symbol(1));
        assert_eq!(p.at(2), Symbol(0));
        assert_eq!(p.suffix(7), s(&[1, 1, 2, 1, 1, 1, 2]));
        assert_eq!(p.m_w(&s(&[2, 2])), None);
        assert_eq!(p.m_w(&s(&[2, 1, 1, 1])), Some(1));
    }

    #[test]
    fn partial_past_known_suffix() {
        let p = PartialPast::from_window(-4, [Some(Symbol(0)), None, Some(Symbol(1)), Some(Symbol(0))]);
        assert_eq!(p.known_suffix().as_slice(), &[Symbol(1), Symbol(0)]);
        assert_eq!(PartialPast::new().known_suffix().len(), 0);
    }

    #[test]
    fn alphabet_parsing() {
        let a = Alphabet::numbered(3).unwrap();
        assert_eq!(a.parse_string(&["3", "1"]).unwrap().as_slice(), &[Symbol(2), Symbol(0)]);
        assert!(a.parse_string(&["4"]).is_err());
        assert!(Alphabet::new(["x"]).is_err());
        assert!(Alphabet::new(["x", "x"]).is_err());
    }
}
