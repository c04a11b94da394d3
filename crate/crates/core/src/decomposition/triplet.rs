use crate::alphabet::{Past, Symbol};
use crate::error::Result;
use crate::kernel::{alpha_of_symbol, spontaneous_set, Kernel};

use super::layout::IntervalLayout;
use super::thresholds::ThresholdSequence;

/// Weights `lambda^w_k`, the past-free law `p^w_{-1}` and the context rule
/// of the canonical mixture of context trees.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureTriplet {
    pub thresholds: ThresholdSequence,
    /// `lambda[k + 1] = lambda^w_k` for `k = -1..=K_max`.
    pub lambda: Vec<f64>,
    pub p_minus1: Vec<f64>,
}

pub fn build_triplet(kernel: &dyn Kernel, w: &[Symbol], k_max: usize) -> Result<MixtureTriplet> {
    spontaneous_set(kernel, w)?;
    let thresholds = ThresholdSequence::compute(kernel, w, k_max)?;
    let lambda: Vec<f64> = (-1..=k_max as i64)
        .map(|k| thresholds.get(k) - thresholds.get(k - 1))
        .collect();
    assert!(lambda.iter().all(|&l| l >= 0.0), "negative mixture weight");
    let a_minus1 = thresholds.get(-1);
    let p_minus1 = kernel
        .alphabet()
        .symbols()
        .map(|a| alpha_of_symbol(kernel, a) / a_minus1)
        .collect();
    Ok(MixtureTriplet {
        thresholds,
        lambda,
        p_minus1,
    })
}

impl MixtureTriplet {
    pub fn k_max(&self) -> usize {
        self.thresholds.k_max()
    }

    pub fn lambda(&self, k: i64) -> f64 {
        if k < -1 || k > self.k_max() as i64 {
            0.0
        } else {
            self.lambda[(k + 1) as usize]
        }
    }

    /// Mass `1 - alpha^w_{K_max}` left outside the truncated mixture.
    pub fn tail_mass(&self) -> f64 {
        self.thresholds.tail_mass()
    }

    /// Length of the level-`k` context of `past`: `m^w + |w| + k`, or
    /// `None` on the branch where `w` never occurred.
    pub fn context_length(&self, k: usize, past: &Past) -> Option<usize> {
        past.m_w(&self.thresholds.w)
            .map(|m| m + self.thresholds.w.len() + k)
    }

    /// `p^w_k(. | c_{tau_k}(past))`, or `None` when `lambda^w_k = 0`.
    pub fn p_k(&self, kernel: &dyn Kernel, k: usize, past: &Past) -> Option<Vec<f64>> {
        let lambda = self.lambda(k as i64);
        if lambda <= 0.0 {
            return None;
        }
        let n = kernel.alphabet().len();
        let Some(len) = self.context_length(k, past) else {
            let spont = 1.0 - self.thresholds.get(-1);
            return Some(
                kernel
                    .alphabet()
                    .symbols()
                    .map(|a| (kernel.exact_prob(a, past) - alpha_of_symbol(kernel, a)) / spont)
                    .collect(),
            );
        };
        let v = past.suffix(len);
        let layout = IntervalLayout::build(kernel, &self.thresholds, &v, k)
            .expect("suffix holds w by construction");
        let lo = self.thresholds.get(k as i64 - 1);
        let hi = self.thresholds.get(k as i64);
        Some(
            (0..n)
                .map(|a| layout.measure(Symbol(a as u8), lo, hi, Some(k)) / lambda)
                .collect(),
        )
    }

    /// `sum_k lambda^w_k p^w_k(a | past)` up to `K_max`, and the width of
    /// the residual interval the tail can still add.
    pub fn reconstruct_prob(&self, kernel: &dyn Kernel, a: Symbol, past: &Past) -> (f64, f64) {
        let mut total = self.lambda(-1) * self.p_minus1[a.index()];
        for k in 0..=self.k_max() {
            if let Some(p) = self.p_k(kernel, k, past) {
                total += self.lambda(k as i64) * p[a.index()];
            }
        }
        (total, self.tail_mass())
    }
}

/// Free-function form of [`MixtureTriplet::reconstruct_prob`].
pub fn reconstruct_prob(
    triplet: &MixtureTriplet,
    kernel: &dyn Kernel,
    a: Symbol,
    past: &Past,
) -> (f64, f64) {
    triplet.reconstruct_prob(kernel, a, past)
}
