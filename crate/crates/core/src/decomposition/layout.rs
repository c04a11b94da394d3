use crate::alphabet::{m_w, Symbol};
use crate::kernel::{alpha_of_symbol, Kernel};

use super::thresholds::ThresholdSequence;

/// Half-open interval `[left, left + len)` assigned to `symbol`; `level` is
/// `None` for the past-free intervals `I(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub symbol: Symbol,
    pub level: Option<usize>,
    pub left: f64,
    pub len: f64,
}

impl Interval {
    pub fn right(&self) -> f64 {
        self.left + self.len
    }

    pub fn contains(&self, u: f64) -> bool {
        self.left <= u && u < self.right()
    }

    /// Length of the overlap with `[lo, hi)`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.right().min(hi) - self.left.max(lo)).max(0.0)
    }
}

/// `I(a)` for every symbol, glued in symbol order from 0.
pub fn base_intervals(kernel: &dyn Kernel) -> Vec<Interval> {
    let mut left = 0.0;
    kernel
        .alphabet()
        .symbols()
        .map(|a| {
            let len = alpha_of_symbol(kernel, a);
            let iv = Interval {
                symbol: a,
                level: None,
                left,
                len,
            };
            left += len;
            iv
        })
        .collect()
}

/// Both partitions of `[0, 1)` for one past: the glued intervals
/// `I(a)`, `I^w(a, v, 0)`, `I^w(a, v, 1)`, ... and the cut points
/// `alpha^w_{-1}, ..., alpha^w_depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalLayout {
    pub intervals: Vec<Interval>,
    pub cuts: Vec<f64>,
    pub depth: usize,
    /// `m^w(v) + |w|`: the context length at level 0.
    pub context_base: usize,
}

impl IntervalLayout {
    /// Layout for the suffix `v`, down to `depth` levels or as deep as `v`
    /// allows. `None` when `w` does not occur in `v`.
    pub fn build(
        kernel: &dyn Kernel,
        thresholds: &ThresholdSequence,
        v: &[Symbol],
        depth: usize,
    ) -> Option<Self> {
        let w = &thresholds.w;
        let m = m_w(w, v)?;
        let base = m + w.len();
        let depth = depth.min(v.len() - base);
        let mut intervals = base_intervals(kernel);
        let mut prev: Vec<f64> = intervals.iter().map(|iv| iv.len).collect();
        let mut left = intervals.iter().map(|iv| iv.len).sum::<f64>();
        for level in 0..=depth {
            let ctx = &v[v.len() - base - level..];
            for a in kernel.alphabet().symbols() {
                let hi = kernel.lower_bound(a, ctx);
                let len = (hi - prev[a.index()]).max(0.0);
                prev[a.index()] = hi;
                intervals.push(Interval {
                    symbol: a,
                    level: Some(level),
                    left,
                    len,
                });
                left += len;
            }
        }
        let cuts = (-1..=depth as i64).map(|k| thresholds.get(k)).collect();
        Some(IntervalLayout {
            intervals,
            cuts,
            depth,
            context_base: base,
        })
    }

    /// The symbol whose interval (up to `max_level`) holds `u`.
    pub fn symbol_at(&self, u: f64, max_level: Option<usize>) -> Option<Symbol> {
        self.intervals
            .iter()
            .filter(|iv| level_ok(iv, max_level))
            .find(|iv| iv.contains(u))
            .map(|iv| iv.symbol)
    }

    /// Lebesgue measure of `a`'s intervals up to `max_level` inside `[lo, hi)`.
    pub fn measure(&self, a: Symbol, lo: f64, hi: f64, max_level: Option<usize>) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| iv.symbol == a && level_ok(iv, max_level))
            .map(|iv| iv.overlap(lo, hi))
            .sum()
    }

    /// Total length per symbol over all intervals.
    pub fn totals(&self, alphabet_len: usize) -> Vec<f64> {
        let mut t = vec![0.0; alphabet_len];
        for iv in &self.intervals {
            t[iv.symbol.index()] += iv.len;
        }
        t
    }

    /// Right end of the glued sequence.
    pub fn right_end(&self) -> f64 {
        self.intervals.last().map_or(0.0, Interval::right)
    }
}

fn level_ok(iv: &Interval, max_level: Option<usize>) -> bool {
    match (iv.level, max_level) {
        (None, _) | (_, None) => true,
        (Some(l), Some(max)) => l <= max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MarkovKernel;

    #[test]
    fn markov_layout_by_hand() {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        let w = [Symbol(1)];
        let t = ThresholdSequence::compute(&k, &w, 3).unwrap();
        let l = IntervalLayout::build(&k, &t, &[Symbol(1)], 5).unwrap();
        assert_eq!(l.depth, 0);
        assert_eq!(l.context_base, 1);
        let two = l
            .intervals
            .iter()
            .find(|iv| iv.symbol == Symbol(1) && iv.level == Some(0))
            .unwrap();
        assert!((two.left - 0.8).abs() < 1e-15 && (two.len - 0.2).abs() < 1e-15);
        assert_eq!(l.symbol_at(0.85, None), Some(Symbol(1)));
        assert_eq!(l.symbol_at(0.2, None), Some(Symbol(0)));
        assert_eq!(l.symbol_at(0.5, None), Some(Symbol(1)));

        let l = IntervalLayout::build(&k, &t, &[Symbol(1), Symbol(0)], 5).unwrap();
        assert!((l.measure(Symbol(0), 0.8, 1.0, None) - 0.2).abs() < 1e-15);
        assert_eq!(l.measure(Symbol(1), 0.8, 1.0, None), 0.0);
        assert!(IntervalLayout::build(&k, &t, &[Symbol(0)], 2).is_none());
    }

    #[test]
    fn totals_match_kernel_at_saturation() {
        let k = MarkovKernel::binary_order_one(0.3, 0.8).unwrap();
        let w = [Symbol(1)];
        let t = ThresholdSequence::compute(&k, &w, 3).unwrap();
        let v = [Symbol(0), Symbol(1), Symbol(0), Symbol(0)];
        let l = IntervalLayout::build(&k, &t, &v, 3).unwrap();
        let totals = l.totals(2);
        assert!((totals[0] - 0.7).abs() < 1e-12);
        assert!((totals[1] - 0.3).abs() < 1e-12);
        assert!((l.right_end() - 1.0).abs() < 1e-12);
    }
}
