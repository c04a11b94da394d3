//! The length selector `ell` and the update function `F`.

use std::sync::Arc;

use crate::alphabet::{m_w, Past, Symbol};
use crate::decomposition::{base_intervals, Interval, IntervalLayout, ThresholdSequence};
use crate::error::{Error, Result};
use crate::kernel::{spontaneous_set, Kernel, SpontaneousSet};

/// A determined site: its symbol and how many past symbols were read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constructed {
    pub symbol: Symbol,
    pub lookback: usize,
}

/// Everything `F` needs, built once per kernel and reference string.
#[derive(Debug, Clone)]
pub struct UpdateContext {
    kernel: Arc<dyn Kernel>,
    w: Vec<Symbol>,
    thresholds: ThresholdSequence,
    base: Vec<Interval>,
    spontaneous: SpontaneousSet,
}

impl UpdateContext {
    pub fn new(kernel: Arc<dyn Kernel>, w: &[Symbol], k_max: usize) -> Result<Self> {
        let spontaneous = spontaneous_set(kernel.as_ref(), w)?;
        let thresholds = ThresholdSequence::compute(kernel.as_ref(), w, k_max)?;
        let base = base_intervals(kernel.as_ref());
        Ok(UpdateContext {
            kernel,
            w: w.to_vec(),
            thresholds,
            base,
            spontaneous,
        })
    }

    pub fn kernel(&self) -> &dyn Kernel {
        self.kernel.as_ref()
    }

    pub fn kernel_arc(&self) -> &Arc<dyn Kernel> {
        &self.kernel
    }

    pub fn w(&self) -> &[Symbol] {
        &self.w
    }

    pub fn thresholds(&self) -> &ThresholdSequence {
        &self.thresholds
    }

    pub fn spontaneous(&self) -> &SpontaneousSet {
        &self.spontaneous
    }

    pub fn base_intervals(&self) -> &[Interval] {
        &self.base
    }

    pub fn k_max(&self) -> usize {
        self.thresholds.k_max()
    }

    /// `alpha^w_{-1}`: `u` below it is spontaneous.
    pub fn alpha_minus_one(&self) -> f64 {
        self.thresholds.get(-1)
    }

    /// The unique `k >= -1` with `alpha^w_{k-1} <= u < alpha^w_k`.
    pub fn ell(&self, u: f64) -> Result<i64> {
        let values = self.thresholds.values();
        match values.iter().position(|&a| u < a) {
            Some(idx) => Ok(idx as i64 - 1),
            None => Err(Error::KMaxExceeded {
                u,
                k_max: self.k_max(),
            }),
        }
    }

    /// `a` with `u` in `I(a)`, if `u` is spontaneous.
    pub fn spontaneous_symbol(&self, u: f64) -> Option<Symbol> {
        if u >= self.alpha_minus_one() {
            return None;
        }
        self.base
            .iter()
            .find(|iv| iv.contains(u))
            .or_else(|| self.base.iter().rev().find(|iv| iv.len > 0.0))
            .map(|iv| iv.symbol)
    }

    /// `F(u, known)` with the number of past symbols it read; `None` is the
    /// star outcome.
    pub fn update_with_lookback(&self, u: f64, known: &[Symbol]) -> Result<Option<Constructed>> {
        let level = self.ell(u)?;
        if level < 0 {
            return Ok(self.spontaneous_symbol(u).map(|symbol| Constructed {
                symbol,
                lookback: 0,
            }));
        }
        let level = level as usize;
        let Some(m) = m_w(&self.w, known) else {
            return Ok(None);
        };
        let base = m + self.w.len();
        if known.len() < base + level {
            return Ok(None);
        }
        let kernel = self.kernel.as_ref();
        let n = kernel.alphabet().len();
        let mut prev = [0.0f64; crate::alphabet::MAX_ALPHABET];
        let mut pos = 0.0;
        for iv in &self.base {
            prev[iv.symbol.index()] = iv.len;
            pos += iv.len;
        }
        let mut last_positive = None;
        for k in 0..=level {
            let ctx = &known[known.len() - base - k..];
            for (a, prev_a) in prev.iter_mut().enumerate().take(n) {
                let symbol = Symbol(a as u8);
                let hi = kernel.lower_bound(symbol, ctx);
                let len = (hi - *prev_a).max(0.0);
                *prev_a = hi;
                if len > 0.0 {
                    if u < pos + len {
                        return Ok(Some(Constructed {
                            symbol,
                            lookback: base + level,
                        }));
                    }
                    last_positive = Some(symbol);
                }
                pos += len;
            }
        }
        // rounding can leave u a few ulps past the glued intervals
        Ok(last_positive.map(|symbol| Constructed {
            symbol,
            lookback: base + level,
        }))
    }

    /// `F(u, known)`: a symbol, or `None` for the star outcome.
    pub fn update_f(&self, u: f64, known: &[Symbol]) -> Result<Option<Symbol>> {
        Ok(self.update_with_lookback(u, known)?.map(|c| c.symbol))
    }

    /// `Leb{u : F(u, z) = a}` for a full past `z` holding `w`; the vector
    /// sums to `alpha^w_{K_max}`.
    pub fn law_of_f_given_full_past(&self, past: &Past) -> Option<Vec<f64>> {
        let m = past.m_w(&self.w)?;
        let k_max = self.k_max();
        let v = past.suffix(m + self.w.len() + k_max);
        let layout = IntervalLayout::build(self.kernel(), &self.thresholds, &v, k_max)?;
        let lo = self.alpha_minus_one();
        let hi = self.thresholds.get(k_max as i64);
        Some(
            self.kernel
                .alphabet()
                .symbols()
                .map(|a| self.base[a.index()].len + layout.measure(a, lo, hi, Some(k_max)))
                .collect(),
        )
    }
}

/// Free-function forms mirroring the methods.
pub fn ell(ctx: &UpdateContext, u: f64) -> Result<i64> {
    ctx.ell(u)
}

pub fn update_f(ctx: &UpdateContext, u: f64, known: &[Symbol]) -> Result<Option<Symbol>> {
    ctx.update_f(u, known)
}

pub fn law_of_f_given_full_past(ctx: &UpdateContext, past: &Past) -> Option<Vec<f64>> {
    ctx.law_of_f_given_full_past(past)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{MarkovKernel, RenewalKernel};

    fn s(labels: &[u8]) -> Vec<Symbol> {
        labels.iter().map(|&l| Symbol(l - 1)).collect()
    }

    fn markov_ctx() -> UpdateContext {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        UpdateContext::new(Arc::new(k), &s(&[2]), 4).unwrap()
    }

    #[test]
    fn ell_on_markov_layout() {
        let c = markov_ctx();
        assert_eq!(c.ell(0.5).unwrap(), -1);
        assert_eq!(c.ell(0.85).unwrap(), 0);
        assert_eq!(c.ell(0.0).unwrap(), -1);
        assert_eq!(c.ell(0.999_999).unwrap(), 0);
    }

    #[test]
    fn ell_past_truncation() {
        let k = RenewalKernel::showcase();
        let c = UpdateContext::new(Arc::new(k), &s(&[2]), 3).unwrap();
        assert_eq!(c.ell(0.97).unwrap(), 3);
        assert_eq!(c.ell(0.99).unwrap_err().code(), "K_MAX_EXCEEDED");
    }

    #[test]
    fn update_on_markov_layout() {
        let c = markov_ctx();
        assert_eq!(c.update_f(0.2, &[]).unwrap(), Some(Symbol(0)));
        assert_eq!(c.update_f(0.85, &s(&[2])).unwrap(), Some(Symbol(1)));
        assert_eq!(c.update_f(0.85, &s(&[1, 1, 1])).unwrap(), None);
        assert_eq!(c.update_f(0.85, &s(&[2, 1])).unwrap(), Some(Symbol(0)));
        let got = c.update_with_lookback(0.85, &s(&[2, 1])).unwrap().unwrap();
        assert_eq!(got.lookback, 2);
    }

    #[test]
    fn update_agrees_with_layout() {
        let k = RenewalKernel::showcase();
        let c = UpdateContext::new(Arc::new(k), &s(&[2]), 40).unwrap();
        let past = s(&[1, 2, 2, 1, 2, 1, 1, 1, 2, 1, 1, 2, 1, 2, 1, 1, 1, 1]);
        let layout =
            IntervalLayout::build(c.kernel(), c.thresholds(), &past, 40).unwrap();
        for j in 0..2000 {
            let u = (j as f64 + 0.5) / 2000.0;
            let f = c.update_f(u, &past).unwrap();
            let l = c.ell(u).unwrap();
            let needed = layout.context_base as i64 + l;
            if l >= 0 && needed > past.len() as i64 {
                assert_eq!(f, None);
            } else {
                assert_eq!(f, layout.symbol_at(u, None), "u={u}");
            }
        }
    }

    #[test]
    fn law_given_full_past() {
        let c = markov_ctx();
        let past = Past::constant_tail(s(&[2]), Symbol(0));
        let law = c.law_of_f_given_full_past(&past).unwrap();
        assert!((law[0] - 0.4).abs() < 1e-12 && (law[1] - 0.6).abs() < 1e-12);
        assert!(c
            .law_of_f_given_full_past(&Past::constant_tail(vec![], Symbol(0)))
            .is_none());

        let k = RenewalKernel::showcase();
        let k_max = 30;
        let c = UpdateContext::new(Arc::new(k.clone()), &s(&[2]), k_max).unwrap();
        let past = Past::new(s(&[2]), s(&[1, 2, 2]));
        let law = c.law_of_f_given_full_past(&past).unwrap();
        for a in [Symbol(0), Symbol(1)] {
            let gap = (law[a.index()] - k.exact_prob(a, &past)).abs();
            assert!(gap <= 0.2 * 0.5f64.powi(k_max as i32) + 1e-12);
        }
    }
}
