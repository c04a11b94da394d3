use std::collections::BTreeSet;

use crate::alphabet::Symbol;
use crate::cftp::LeftVec;
use crate::error::{Error, Result};

/// Per-site data of an arrow chain: the spontaneous symbol (if any) and the
/// level `ell` of the site's uniform.
pub type Site = (Option<Symbol>, i64);

/// A chain of arrows over `(floor, hi]` computed lazily from the right.
///
/// Site `i` points back `L_i` steps: 0 when it is spontaneous, otherwise
/// `m_i + |pattern| + ell_i` with `m_i` the distance to the last complete
/// spontaneous occurrence of the pattern before `i`.
pub struct ArrowChain<F> {
    pattern: Vec<Symbol>,
    site: F,
    hi: i64,
    floor: i64,
    syms: LeftVec<Option<Symbol>>,
    ells: LeftVec<i64>,
    marks: BTreeSet<i64>,
    /// Every end position in `[scanned, hi]` has been checked.
    scanned: i64,
    budget: u64,
    work: u64,
}

impl<F: FnMut(i64) -> Result<Site>> ArrowChain<F> {
    /// `floor` is the lowest site that may be evaluated (`i64::MIN` for an
    /// unbounded past); `budget` caps the sites evaluated.
    pub fn new(pattern: Vec<Symbol>, site: F, hi: i64, floor: i64, budget: u64) -> Self {
        assert!(!pattern.is_empty());
        ArrowChain {
            pattern,
            site,
            hi,
            floor,
            syms: LeftVec::new(hi + 1, None),
            ells: LeftVec::new(hi + 1, 0),
            marks: BTreeSet::new(),
            scanned: hi + 1,
            budget,
            work: 0,
        }
    }

    pub fn pattern_len(&self) -> usize {
        self.pattern.len()
    }

    /// Brings site `i` into the cache; `false` when `i` is below the floor.
    fn ensure(&mut self, i: i64) -> Result<bool> {
        assert!(i <= self.hi, "site {i} beyond the chain end {}", self.hi);
        if i < self.floor {
            return Ok(false);
        }
        while self.syms.first() > i {
            if self.work >= self.budget {
                return Err(Error::StepBudgetExceeded {
                    budget: self.budget,
                });
            }
            self.work += 1;
            let t = self.syms.first() - 1;
            let (s, l) = (self.site)(t)?;
            self.syms.push_front(s);
            self.ells.push_front(l);
        }
        Ok(true)
    }

    pub fn symbol(&mut self, i: i64) -> Result<Option<Symbol>> {
        self.ensure(i)?;
        Ok(self.syms.get(i))
    }

    pub fn ell(&mut self, i: i64) -> Result<i64> {
        self.ensure(i)?;
        Ok(self.ells.get(i))
    }

    fn is_mark(&mut self, e: i64) -> Result<Option<bool>> {
        let start = e - self.pattern.len() as i64 + 1;
        if !self.ensure(start)? {
            return Ok(None);
        }
        Ok(Some(
            self.syms
                .range(start, e + 1)
                .iter()
                .zip(&self.pattern)
                .all(|(s, p)| *s == Some(*p)),
        ))
    }

    /// `min(m_i, cap)`; `None` when the floor is hit before a mark is found.
    pub fn mark_distance(&mut self, i: i64, cap: Option<usize>) -> Result<Option<usize>> {
        loop {
            if let Some(&e) = self.marks.range(..i).next_back() {
                if e >= self.scanned {
                    let d = (i - 1 - e) as usize;
                    return Ok(Some(cap.map_or(d, |c| d.min(c))));
                }
            }
            if self.scanned <= i {
                let d = (i - self.scanned) as usize;
                if let Some(c) = cap {
                    if d >= c {
                        return Ok(Some(c));
                    }
                }
            }
            let e = self.scanned - 1;
            match self.is_mark(e)? {
                None => return Ok(None),
                Some(true) => {
                    self.marks.insert(e);
                }
                Some(false) => {}
            }
            self.scanned = e;
        }
    }

    /// `L_i` (`None`: no mark above the floor).
    pub fn arrow(&mut self, i: i64) -> Result<Option<usize>> {
        self.arrow_capped(i, None)
    }

    /// `min(L_i, cap)` without scanning further back than needed.
    pub fn arrow_capped(&mut self, i: i64, cap: Option<usize>) -> Result<Option<usize>> {
        if self.symbol(i)?.is_some() {
            return Ok(Some(0));
        }
        let ell = self.ell(i)?;
        let w = self.pattern.len() as i64;
        // L = m + w + ell >= cap as soon as m >= cap - w - ell
        let m_cap = cap.map(|c| (c as i64 - w - ell).max(0) as usize);
        Ok(self.mark_distance(i, m_cap)?.map(|m| {
            let l = (m as i64 + w + ell).max(0) as usize;
            cap.map_or(l, |c| l.min(c))
        }))
    }

    /// `max{k <= m : L_i <= i - k for i = k..=n}`.
    pub fn regeneration(&mut self, m: i64, n: i64) -> Result<Option<i64>> {
        assert!(m <= n && n <= self.hi);
        let mut reach = i64::MAX;
        for i in m..=n {
            match self.arrow(i)? {
                Some(l) => reach = reach.min(i - l as i64),
                None => return Ok(None),
            }
        }
        let mut k = m;
        while reach < k {
            k -= 1;
            match self.arrow(k)? {
                Some(l) => reach = reach.min(k - l as i64),
                None => return Ok(None),
            }
        }
        Ok(Some(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(sites: Vec<Site>, lo: i64, pattern: Vec<Symbol>) -> ArrowChain<impl FnMut(i64) -> Result<Site>> {
        let hi = lo + sites.len() as i64 - 1;
        ArrowChain::new(
            pattern,
            move |i| Ok(sites[(i - lo) as usize]),
            hi,
            lo,
            1_000,
        )
    }

    #[test]
    fn distances_and_arrows() {
        let a = Some(Symbol(0));
        let b = Some(Symbol(1));
        // times -3..=2: b a b * * a
        let mut c = chain(
            vec![(b, -1), (a, -1), (b, -1), (None, 0), (None, 2), (a, -1)],
            -3,
            vec![Symbol(1)],
        );
        assert_eq!(c.mark_distance(0, None).unwrap(), Some(0));
        assert_eq!(c.mark_distance(1, None).unwrap(), Some(1));
        assert_eq!(c.mark_distance(-1, None).unwrap(), Some(1));
        assert_eq!(c.mark_distance(-3, None).unwrap(), None);
        assert_eq!(c.arrow(0).unwrap(), Some(1));
        assert_eq!(c.arrow(1).unwrap(), Some(4));
        assert_eq!(c.arrow(2).unwrap(), Some(0));
        assert_eq!(c.arrow_capped(1, Some(2)).unwrap(), Some(2));
        assert_eq!(c.regeneration(0, 0).unwrap(), Some(-1));
        assert_eq!(c.regeneration(0, 2).unwrap(), Some(-3));
    }

    #[test]
    fn two_symbol_pattern() {
        let a = Some(Symbol(0));
        let b = Some(Symbol(1));
        let mut c = chain(
            vec![(a, -1), (b, -1), (None, 0), (b, -1), (None, 1)],
            0,
            vec![Symbol(0), Symbol(1)],
        );
        assert_eq!(c.mark_distance(4, None).unwrap(), Some(2));
        assert_eq!(c.arrow(4).unwrap(), Some(2 + 2 + 1));
        assert_eq!(c.mark_distance(1, None).unwrap(), None);
    }

    #[test]
    fn budget_stops_scan() {
        let mut c = ArrowChain::new(vec![Symbol(1)], |_| Ok((None, 0)), 0, i64::MIN, 50);
        assert_eq!(
            c.arrow(0).unwrap_err(),
            Error::StepBudgetExceeded { budget: 50 }
        );
    }
}
