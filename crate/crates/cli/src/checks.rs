//! Checks shared by `validate` and the acceptance suite.

use perfsim::alphabet::contains;
use perfsim::cftp::{algorithm1, CftpOptions};
use perfsim::decomposition::MixtureTriplet;
use perfsim::validation::exact_stationary;
use perfsim::validation::stats::{chi_square_gof, ChiSquare};
use perfsim::{Kernel, MarkovKernel, Past, Result, Symbol, UniformSource, UniformStream, UpdateContext};

/// Random pasts: up to `max_recent` free symbols in front of a periodic
/// tail of period 1 to 3. With `w` given, `w` is planted in the recent
/// part so that its last occurrence is finite.
pub fn random_pasts(
    kernel: &dyn Kernel,
    w: Option<&[Symbol]>,
    count: usize,
    max_recent: usize,
    seed: u64,
) -> Vec<Past> {
    let n = kernel.alphabet().len();
    let mut s = UniformStream::with_stream(seed, 0x9a57);
    let mut t = 0i64;
    let mut next = |bound: usize| {
        t += 1;
        ((s.uniform(t) * bound as f64) as usize).min(bound - 1)
    };
    (0..count)
        .map(|_| {
            let mut recent: Vec<Symbol> = (0..next(max_recent + 1))
                .map(|_| Symbol(next(n) as u8))
                .collect();
            if let Some(w) = w {
                let at = next(recent.len() + 1);
                recent.splice(at..at, w.iter().copied());
            }
            let cycle: Vec<Symbol> = (0..1 + next(3)).map(|_| Symbol(next(n) as u8)).collect();
            Past::new(recent, cycle)
        })
        .collect()
}

/// Largest `|sum_k lambda_k p_k(a | past) - P(a | past)|` beyond the
/// truncation tail.
pub fn mixture_excess(triplet: &MixtureTriplet, kernel: &dyn Kernel, pasts: &[Past]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for past in pasts {
        for a in kernel.alphabet().symbols() {
            let (v, tail) = triplet.reconstruct_prob(kernel, a, past);
            worst = worst.max((v - kernel.exact_prob(a, past)).abs() - tail);
        }
    }
    worst
}

/// Largest deviation of the law of `F` from the kernel beyond the tail;
/// pasts without `w` are skipped.
pub fn update_law_excess(ctx: &UpdateContext, pasts: &[Past]) -> f64 {
    let kernel = ctx.kernel();
    let tail = ctx.thresholds().tail_mass();
    let mut worst = f64::NEG_INFINITY;
    for past in pasts {
        let Some(law) = ctx.law_of_f_given_full_past(past) else { continue };
        for a in kernel.alphabet().symbols() {
            worst = worst.max((law[a.index()] - kernel.exact_prob(a, past)).abs() - tail);
        }
    }
    worst
}

/// Every past of `A^len` with a constant tail of each symbol.
pub fn all_contexts(kernel: &dyn Kernel, len: usize) -> Vec<Past> {
    let n = kernel.alphabet().len();
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total * n);
    for code in 0..total {
        let mut c = code;
        let mut v = vec![Symbol(0); len];
        for slot in v.iter_mut().rev() {
            *slot = Symbol((c % n) as u8);
            c /= n;
        }
        for tail in kernel.alphabet().symbols() {
            out.push(Past::constant_tail(v.clone(), tail));
        }
    }
    out
}

/// Chi-square of a CFTP sample of `X_1..X_len` against the exact law of
/// pairs. Pairs are taken `gap` apart so that consecutive pairs are
/// nearly independent; `gap` comes from the mixing time of the oracle.
pub fn exact_sampling_chi_square(
    kernel: &MarkovKernel,
    ctx: &UpdateContext,
    len: usize,
    seed: u64,
    opts: CftpOptions,
) -> Result<ChiSquare> {
    let oracle = exact_stationary(kernel)?;
    let expected = oracle.window_law(2);
    let gap = oracle.mixing_steps(1e-4, 64);
    let run = algorithm1(ctx, &mut UniformStream::new(seed), 1, len as i64, opts)?;
    let x = run.window();
    let n = kernel.alphabet().len();
    let mut observed = vec![0u64; n * n];
    let mut t = 0;
    while t + 1 < x.len() {
        observed[x[t].index() * n + x[t + 1].index()] += 1;
        t += 2 + gap;
    }
    Ok(chi_square_gof(&observed, &expected, 5.0))
}

/// Whether `w` occurs in any of the pasts' recent parts.
pub fn any_contains(pasts: &[Past], w: &[Symbol]) -> bool {
    pasts.iter().any(|p| contains(p.recent(), w))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use perfsim::decomposition::build_triplet;
    use perfsim::RenewalKernel;

    use super::*;

    #[test]
    fn planted_w_is_found() {
        let k = RenewalKernel::showcase();
        let w = [Symbol(0), Symbol(1)];
        let pasts = random_pasts(&k, Some(&w), 200, 8, 3);
        assert!(pasts.iter().all(|p| p.m_w(&w).is_some()));
        assert!(any_contains(&pasts, &w));
        let free = random_pasts(&k, None, 200, 8, 3);
        assert!(free.iter().any(|p| p.m_w(&[Symbol(1)]).is_none()));
    }

    #[test]
    fn showcase_mixture_and_law() {
        let k = RenewalKernel::showcase();
        let w = [Symbol(1)];
        let t = build_triplet(&k, &w, 40).unwrap();
        let pasts = random_pasts(&k, None, 300, 12, 5);
        assert!(mixture_excess(&t, &k, &pasts) <= 1e-10);
        let ctx = UpdateContext::new(Arc::new(k.clone()), &w, 40).unwrap();
        let planted = random_pasts(&k, Some(&w), 300, 12, 6);
        assert!(update_law_excess(&ctx, &planted) <= 1e-10);
    }

    #[test]
    fn contexts_enumerated() {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        let c = all_contexts(&k, 3);
        assert_eq!(c.len(), 16);
        assert_eq!(c[3].suffix(3), vec![Symbol(0), Symbol(0), Symbol(1)]);
    }

    #[test]
    fn order_one_sampler_matches_pairs() {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        let ctx = UpdateContext::new(Arc::new(k.clone()), &[Symbol(1)], 4).unwrap();
        let c = exact_sampling_chi_square(&k, &ctx, 20_000, 1, CftpOptions::default()).unwrap();
        assert_eq!(c.df, 3);
        assert!(c.p_value > 1e-4, "{c:?}");
    }
}
