//! The threshold sequences: localized `alpha^w_k` and the global CFF
//! thresholds used as diagnostics.

use crate::alphabet::{contains, in_i_k_wbar, Symbol};
use crate::error::{Error, Result};
use crate::kernel::{alpha_of_symbol, Kernel, Memory};

/// Largest enumeration (`|A|^len`) attempted by the exhaustive routines.
pub const MAX_ENUMERATION: usize = 1 << 22;

/// Values within this distance of 1 are snapped to 1.
pub const SATURATION_TOLERANCE: f64 = 1e-12;

/// Calls `f` on every string of `A^len`, oldest first.
pub(crate) fn for_each_string(
    alphabet_len: usize,
    len: usize,
    mut f: impl FnMut(&[Symbol]),
) -> Result<()> {
    let count = alphabet_len
        .checked_pow(len as u32)
        .filter(|&c| c <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::DepthExceeded(format!("enumeration of A^{len} exceeds {MAX_ENUMERATION}"))
        })?;
    let mut s = vec![Symbol(0); len];
    for _ in 0..count {
        f(&s);
        for slot in s.iter_mut().rev() {
            if slot.index() + 1 < alphabet_len {
                slot.0 += 1;
                break;
            }
            slot.0 = 0;
        }
    }
    Ok(())
}

fn total_lower(kernel: &dyn Kernel, v: &[Symbol]) -> f64 {
    kernel
        .alphabet()
        .symbols()
        .map(|a| kernel.lower_bound(a, v))
        .sum()
}

fn snap(x: f64) -> f64 {
    if x >= 1.0 - SATURATION_TOLERANCE {
        1.0
    } else {
        x
    }
}

/// `alpha^w_{-1} = sum_a alpha(a)`.
pub fn alpha_minus_one(kernel: &dyn Kernel) -> f64 {
    kernel
        .alphabet()
        .symbols()
        .map(|a| alpha_of_symbol(kernel, a))
        .sum()
}

/// `alpha^w_{k,i}`: the infimum of `sum_a inf_z P(a | b w c z)` over
/// `b` in `I^i(w-bar)` and `c` in `A^k`, by enumeration.
pub fn alpha_w_at_distance(kernel: &dyn Kernel, w: &[Symbol], k: usize, i: usize) -> Result<f64> {
    let n = kernel.alphabet().len();
    let mut best = f64::INFINITY;
    let mut buf = Vec::with_capacity(k + w.len() + i);
    for_each_string(n, i, |b| {
        if !in_i_k_wbar(w, b) {
            return;
        }
        // c is enumerated inside; the closure cannot propagate errors so
        // the size was checked by the caller
        let _ = for_each_string(n, k, |c| {
            buf.clear();
            buf.extend_from_slice(c);
            buf.extend_from_slice(w);
            buf.extend_from_slice(b);
            best = best.min(total_lower(kernel, &buf));
        });
    })?;
    n.checked_pow((k + i) as u32)
        .filter(|&c| c <= MAX_ENUMERATION)
        .ok_or_else(|| Error::DepthExceeded(format!("enumeration of A^{} too large", k + i)))?;
    Ok(best)
}

/// Brute-force `alpha^w_k` restricted to distances `i <= max_distance`.
pub fn alpha_w_enumerated(
    kernel: &dyn Kernel,
    w: &[Symbol],
    k: usize,
    max_distance: usize,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..=max_distance {
        best = best.min(alpha_w_at_distance(kernel, w, k, i)?);
    }
    Ok(snap(best.min(1.0)))
}

/// `alpha^w_k` for `k >= -1`.
///
/// Families with a closed form use it. Finite-order kernels enumerate
/// distances up to the saturation depth `order - |w| - k`, past which the
/// conditioning string covers the whole memory and the infima sum to 1.
pub fn alpha_w(kernel: &dyn Kernel, w: &[Symbol], k: i64) -> Result<f64> {
    if k < -1 {
        return Ok(0.0);
    }
    if k == -1 {
        return Ok(alpha_minus_one(kernel));
    }
    let k = k as usize;
    if let Some(v) = kernel.alpha_w_closed_form(w, k) {
        return v.map(snap);
    }
    match kernel.memory() {
        Memory::Finite(order) => {
            if k + w.len() >= order {
                return Ok(1.0);
            }
            let saturation = order - w.len() - k - 1;
            alpha_w_enumerated(kernel, w, k, saturation)
        }
        Memory::Infinite => Err(Error::DepthExceeded(
            "infinite-memory kernel without a closed-form threshold".into(),
        )),
    }
}

/// The sequence `alpha^w_{-1}, alpha^w_0, ..., alpha^w_{K_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSequence {
    pub w: Vec<Symbol>,
    values: Vec<f64>,
    /// Certified bound on `sum_{k > K_max} (1 - alpha^w_k)`, when known.
    pub tail_sum_bound: Option<f64>,
}

impl ThresholdSequence {
    pub fn compute(kernel: &dyn Kernel, w: &[Symbol], k_max: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(k_max + 2);
        for k in -1..=k_max as i64 {
            let v = alpha_w(kernel, w, k)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParameterOutOfRange(format!(
                    "alpha^w_{k} = {v} outside [0, 1]"
                )));
            }
            if let Some(&prev) = values.last() {
                if v < prev - SATURATION_TOLERANCE {
                    return Err(Error::ParameterOutOfRange(format!(
                        "alpha^w_{k} = {v} decreases from {prev}"
                    )));
                }
            }
            let prev = values.last().copied().unwrap_or(0.0);
            values.push(v.max(prev));
        }
        Ok(ThresholdSequence {
            w: w.to_vec(),
            values,
            tail_sum_bound: kernel.threshold_tail_bound(w, k_max),
        })
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 2
    }

    /// `alpha^w_k`, with `alpha^w_{-2} = 0` and `alpha^w_k = alpha^w_{K_max}`
    /// past the truncation.
    pub fn get(&self, k: i64) -> f64 {
        if k < -1 {
            0.0
        } else {
            let idx = ((k + 1) as usize).min(self.values.len() - 1);
            self.values[idx]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mass `1 - alpha^w_{K_max}` not yet assigned to any context tree.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.values[self.values.len() - 1]
    }

    /// `sum_{k=0}^{K_max} (1 - alpha^w_k)`.
    pub fn partial_gap_sum(&self) -> f64 {
        self.values[1..].iter().map(|a| 1.0 - a).sum()
    }

    /// Whether `sum_k (1 - alpha^w_k)` is certified finite.
    pub fn summable(&self) -> bool {
        self.tail_sum_bound.is_some_and(f64::is_finite)
    }
}

/// `inf_{v in A^k} sum_a inf_z P(a | v z)`.
pub fn cff_alpha(kernel: &dyn Kernel, k: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for_each_string(kernel.alphabet().len(), k, |v| {
        best = best.min(total_lower(kernel, v));
    })?;
    Ok(best)
}

/// Same infimum restricted to strings containing `w`; `None` when `k < |w|`.
pub fn cff_alpha_containing(kernel: &dyn Kernel, w: &[Symbol], k: usize) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for_each_string(kernel.alphabet().len(), k, |v| {
        if contains(v, w) {
            let t = total_lower(kernel, v);
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    })?;
    Ok(best)
}

/// Envelope oscillation `sup_a [sup_z P(a|vz) - inf_z P(a|vz)]` for one suffix.
pub fn envelope_gap(kernel: &dyn Kernel, v: &[Symbol]) -> f64 {
    kernel
        .alphabet()
        .symbols()
        .map(|a| kernel.upper_bound(a, v) - kernel.lower_bound(a, v))
        .fold(0.0, f64::max)
}

/// Upper estimate of the continuity modulus `beta_k`, maximised over `A^k`.
pub fn continuity_modulus(kernel: &dyn Kernel, k: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for_each_string(kernel.alphabet().len(), k, |v| {
        worst = worst.max(envelope_gap(kernel, v));
    })?;
    Ok(worst)
}
