use crate::alphabet::{contains, Symbol};
use crate::error::Result;
use crate::kernel::Kernel;

use super::thresholds::{
    alpha_w_at_distance, continuity_modulus, cff_alpha, cff_alpha_containing, for_each_string,
    ThresholdSequence, SATURATION_TOLERANCE,
};
use super::triplet::MixtureTriplet;

/// `inf` of the envelope mass over strings of length `k` avoiding `w`.
pub fn cff_alpha_avoiding(kernel: &dyn Kernel, w: &[Symbol], k: usize) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for_each_string(kernel.alphabet().len(), k, |v| {
        if !contains(v, w) {
            let t: f64 = kernel
                .alphabet()
                .symbols()
                .map(|a| kernel.lower_bound(a, v))
                .sum();
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    })?;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionRow {
    pub k: usize,
    /// Infimum over all of `A^k`.
    pub cff: f64,
    /// Infimum over the strings of `A^k` containing `w`.
    pub containing_w: Option<f64>,
    /// Infimum over the strings of `A^k` avoiding `w`.
    pub avoiding_w: Option<f64>,
    pub alpha_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub w: Vec<Symbol>,
    pub rows: Vec<PropositionRow>,
    pub violations: Vec<String>,
}

impl PropositionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates the three threshold sequences for `k <= max_k` and checks the
/// chain of inequalities linking them.
pub fn verify_proposition(kernel: &dyn Kernel, w: &[Symbol], max_k: usize) -> Result<PropositionReport> {
    let tol = SATURATION_TOLERANCE;
    let thresholds = ThresholdSequence::compute(kernel, w, max_k)?;
    let mut rows = Vec::with_capacity(max_k + 1);
    let mut violations = Vec::new();
    for k in 0..=max_k {
        let row = PropositionRow {
            k,
            cff: cff_alpha(kernel, k)?,
            containing_w: cff_alpha_containing(kernel, w, k)?,
            avoiding_w: cff_alpha_avoiding(kernel, w, k)?,
            alpha_w: thresholds.get(k as i64),
        };
        if let Some(c) = row.containing_w {
            if row.cff > c + tol {
                violations.push(format!("k={k}: cff {} exceeds the w-restricted {}", row.cff, c));
            }
        }
        rows.push(row);
    }
    for k in 0..=max_k {
        if let Some(Some(c)) = rows.get(k + w.len()).map(|r| r.containing_w) {
            let direct = alpha_w_at_distance(kernel, w, k, 0)?;
            if c > direct + tol {
                violations.push(format!(
                    "k={k}: w-restricted infimum {c} at length {} exceeds alpha^w_(k,0) = {direct}",
                    k + w.len()
                ));
            }
        }
    }
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.cff < a.cff - tol {
            violations.push(format!("cff decreases at k={}", b.k));
        }
        if b.alpha_w < a.alpha_w - tol {
            violations.push(format!("alpha^w decreases at k={}", b.k));
        }
    }
    Ok(PropositionReport {
        w: w.to_vec(),
        rows,
        violations,
    })
}

/// One line of the decomposition table; the CFF columns are absent at
/// `k = -1` and wherever `A^k` is too large to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionRow {
    pub k: i64,
    pub cff_alpha: Option<f64>,
    pub alpha_w: f64,
    pub lambda: f64,
    pub beta: Option<f64>,
}

pub fn decomposition_table(
    kernel: &dyn Kernel,
    triplet: &MixtureTriplet,
    cff_depth: usize,
) -> Result<Vec<DecompositionRow>> {
    let mut rows = Vec::new();
    for k in -1..=triplet.k_max() as i64 {
        let (cff, beta) = if k >= 0 && k as usize <= cff_depth {
            (
                Some(cff_alpha(kernel, k as usize)?),
                Some(continuity_modulus(kernel, k as usize)?),
            )
        } else {
            (None, None)
        };
        rows.push(DecompositionRow {
            k,
            cff_alpha: cff,
            alpha_w: triplet.thresholds.get(k),
            lambda: triplet.lambda(k),
            beta,
        });
    }
    Ok(rows)
}
