use std::collections::BTreeMap;

use crate::alphabet::{m_w, Symbol};
use crate::kernel::Kernel;

/// Flag threshold on `|z|`.
pub const Z_FLAG: f64 = 4.0;

/// One (context, symbol) cell of a compatibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatCell {
    pub context: Vec<Symbol>,
    pub symbol: Symbol,
    pub visits: u64,
    pub count: u64,
    pub p_hat: f64,
    /// Kernel envelope for this context; equal ends mean the value is exact.
    pub lower: f64,
    pub upper: f64,
    /// Distance from `p_hat` to `[lower, upper]` in binomial standard errors.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub cells: Vec<CompatCell>,
    /// Sites whose context was resolved inside the sample.
    pub sites_used: u64,
    pub contexts_seen: usize,
}

impl CompatibilityReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CompatCell> {
        self.cells.iter().filter(|c| c.z.abs() > Z_FLAG)
    }

    pub fn passes(&self) -> bool {
        self.flagged().next().is_none()
    }

    pub fn max_abs_z(&self) -> f64 {
        self.cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }
}

/// Compares empirical next-symbol frequencies with the kernel on variable
/// contexts: the suffix back to the last occurrence of `w` plus `depth`
/// further symbols. Contexts visited fewer than `min_visits` times are
/// skipped.
pub fn compatibility_test(
    sample: &[Symbol],
    kernel: &dyn Kernel,
    w: &[Symbol],
    depth: usize,
    min_visits: u64,
) -> CompatibilityReport {
    let n = kernel.alphabet().len();
    let mut counts: BTreeMap<&[Symbol], Vec<u64>> = BTreeMap::new();
    let mut sites_used = 0;
    for t in 1..sample.len() {
        let history = &sample[..t];
        let Some(m) = m_w(w, history) else { continue };
        let len = m + w.len() + depth;
        if len > t {
            continue;
        }
        let ctx = &history[t - len..];
        counts.entry(ctx).or_insert_with(|| vec![0; n])[sample[t].index()] += 1;
        sites_used += 1;
    }
    let contexts_seen = counts.len();
    let mut cells = Vec::new();
    for (ctx, row) in counts {
        let visits: u64 = row.iter().sum();
        if visits < min_visits {
            continue;
        }
        for a in kernel.alphabet().symbols() {
            let count = row[a.index()];
            let p_hat = count as f64 / visits as f64;
            let lower = kernel.lower_bound(a, ctx);
            let upper = kernel.upper_bound(a, ctx).max(lower);
            let nearest = p_hat.clamp(lower, upper);
            let floor = 0.5 / visits as f64;
            let p_ref = nearest.clamp(floor, 1.0 - floor);
            let se = (p_ref * (1.0 - p_ref) / visits as f64).sqrt();
            cells.push(CompatCell {
                context: ctx.to_vec(),
                symbol: a,
                visits,
                count,
                p_hat,
                lower,
                upper,
                z: (p_hat - nearest) / se,
            });
        }
    }
    CompatibilityReport {
        cells,
        sites_used,
        contexts_seen,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MarkovKernel;
    use crate::stream::{UniformSource, UniformStream};

    fn coin_flips(n: i64) -> Vec<Symbol> {
        let mut s = UniformStream::new(4);
        (0..n).map(|i| Symbol((s.uniform(i) < 0.3) as u8)).collect()
    }

    #[test]
    fn exact_frequencies_pass() {
        let k = MarkovKernel::constant(vec![0.7, 0.3]).unwrap();
        let r = compatibility_test(&coin_flips(20_000), &k, &[Symbol(1)], 1, 30);
        assert!(r.passes(), "max z {}", r.max_abs_z());
        assert!(r.sites_used > 15_000);
    }

    #[test]
    fn wrong_kernel_flagged() {
        let k = MarkovKernel::constant(vec![0.5, 0.5]).unwrap();
        let r = compatibility_test(&coin_flips(20_000), &k, &[Symbol(1)], 1, 30);
        assert!(!r.passes());
    }
}
