//! Coupling from the past with the update function, regeneration times and
//! the regeneration split of a long run.

mod buffer;

pub(crate) use buffer::LeftVec;

use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::stream::UniformSource;
use crate::update::UpdateContext;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

const UNKNOWN: Symbol = Symbol(u8::MAX);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CftpOptions {
    /// Cap on backward steps per window.
    pub step_budget: u64,
    /// Start backward constructions only below `min(#E * eps, alpha^w_{-1})`.
    pub conservative: bool,
}

impl Default for CftpOptions {
    fn default() -> Self {
        CftpOptions {
            step_budget: DEFAULT_STEP_BUDGET,
            conservative: false,
        }
    }
}

/// A completed run over the window `[m, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CftpRun {
    pub m: i64,
    pub n: i64,
    pub theta: i64,
    /// Symbols at times `theta..=n`.
    pub sample: Vec<Symbol>,
    /// Context length read by each site, aligned with `sample`.
    pub lookbacks: Vec<usize>,
    pub uniforms_drawn: u64,
    pub backward_steps: u64,
}

impl CftpRun {
    pub fn symbol_at(&self, t: i64) -> Symbol {
        self.sample[(t - self.theta) as usize]
    }

    pub fn lookback_at(&self, t: i64) -> usize {
        self.lookbacks[(t - self.theta) as usize]
    }

    /// The symbols of the requested window `m..=n`.
    pub fn window(&self) -> &[Symbol] {
        &self.sample[(self.m - self.theta) as usize..]
    }
}

/// The threshold below which a backward uniform starts a construction.
pub fn spontaneous_threshold(ctx: &UpdateContext, conservative: bool) -> f64 {
    let exact = ctx.alpha_minus_one();
    if conservative {
        let e = ctx.spontaneous();
        (e.members.len() as f64 * e.epsilon).min(exact)
    } else {
        exact
    }
}

/// Coupling from the past for the window `[m, n]`.
///
/// A forward pass tries to build the window from `U_m..U_n` alone. While
/// sites remain, uniforms are drawn one step further back until one is
/// spontaneous; its symbol seeds a forward sweep over the pending sites in
/// time order, which stops at the first site that still lacks context.
pub fn algorithm1<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    m: i64,
    n: i64,
    opts: CftpOptions,
) -> Result<CftpRun> {
    assert!(m <= n, "empty window [{m}, {n}]");
    let mut xs = LeftVec::new(m, UNKNOWN);
    let mut us = LeftVec::new(m, 0.0f64);
    let mut lbs = LeftVec::new(m, 0usize);
    for t in m..=n {
        xs.push_back(UNKNOWN);
        us.push_back(stream.uniform(t));
        lbs.push_back(0);
    }

    // first unconstructed site of the window
    let mut f = m;
    while f <= n {
        match ctx.update_with_lookback(us.get(f), xs.range(m, f))? {
            Some(c) => {
                xs.set(f, c.symbol);
                lbs.set(f, c.lookback);
                f += 1;
            }
            None => break,
        }
    }

    let threshold = spontaneous_threshold(ctx, opts.conservative);
    // unconstructed backward sites, smallest on top
    let mut pending: Vec<i64> = Vec::new();
    let mut i = m;
    let mut steps = 0u64;
    while f <= n || !pending.is_empty() {
        loop {
            if steps >= opts.step_budget {
                return Err(Error::StepBudgetExceeded {
                    budget: opts.step_budget,
                });
            }
            steps += 1;
            i -= 1;
            let u = stream.uniform(i);
            xs.push_front(UNKNOWN);
            us.push_front(u);
            lbs.push_front(0);
            if u < threshold {
                break;
            }
            pending.push(i);
        }
        let s = ctx
            .spontaneous_symbol(us.get(i))
            .expect("below the spontaneous threshold");
        xs.set(i, s);

        loop {
            let t = match pending.last() {
                Some(&t) => t,
                None if f <= n => f,
                None => break,
            };
            match ctx.update_with_lookback(us.get(t), xs.range(i, t))? {
                Some(c) => {
                    xs.set(t, c.symbol);
                    lbs.set(t, c.lookback);
                    if pending.pop().is_none() {
                        f += 1;
                    }
                }
                None => break,
            }
        }
    }

    Ok(CftpRun {
        m,
        n,
        theta: i,
        sample: xs.as_slice().to_vec(),
        lookbacks: lbs.as_slice().to_vec(),
        uniforms_drawn: (n - i + 1) as u64,
        backward_steps: steps,
    })
}

/// `theta[m, n]`.
pub fn theta<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    m: i64,
    n: i64,
    opts: CftpOptions,
) -> Result<i64> {
    algorithm1(ctx, stream, m, n, opts).map(|r| r.theta)
}

/// `X_1..X_len` from one run over `[1, len]`.
pub fn sample_stationary<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    len: usize,
    opts: CftpOptions,
) -> Result<Vec<Symbol>> {
    assert!(len >= 1);
    let run = algorithm1(ctx, stream, 1, len as i64, opts)?;
    Ok(run.window().to_vec())
}

/// Cut times and the strings between consecutive cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct RegenerationSplit {
    /// The window start of the run.
    pub m: i64,
    pub times: Vec<i64>,
    /// `blocks[i]` spans `times[i]..times[i + 1]`.
    pub blocks: Vec<Vec<Symbol>>,
    /// Symbols after the last cut.
    pub tail: Vec<Symbol>,
}

impl RegenerationSplit {
    /// Complete blocks starting after the window start; the block covering
    /// the start is excluded.
    pub fn interior(&self) -> Vec<&[Symbol]> {
        self.times
            .windows(2)
            .zip(&self.blocks)
            .filter(|(t, _)| t[0] > self.m)
            .map(|(_, b)| b.as_slice())
            .collect()
    }
}

/// `t` is a cut iff no site `j >= t` reads before `t`.
pub fn regeneration_split(run: &CftpRun) -> RegenerationSplit {
    let len = run.sample.len();
    let mut is_cut = vec![false; len];
    let mut reach = i64::MAX;
    for idx in (0..len).rev() {
        let t = run.theta + idx as i64;
        reach = reach.min(t - run.lookbacks[idx] as i64);
        is_cut[idx] = reach >= t;
    }
    let times: Vec<i64> = (0..len)
        .filter(|&i| is_cut[i])
        .map(|i| run.theta + i as i64)
        .collect();
    let blocks = times
        .windows(2)
        .map(|t| {
            run.sample[(t[0] - run.theta) as usize..(t[1] - run.theta) as usize].to_vec()
        })
        .collect();
    let tail = times
        .last()
        .map(|&t| run.sample[(t - run.theta) as usize..].to_vec())
        .unwrap_or_default();
    RegenerationSplit {
        m: run.m,
        times,
        blocks,
        tail,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kernel::{MarkovKernel, RenewalKernel};
    use crate::stream::{FixedUniforms, UniformStream};

    fn markov_ctx() -> UpdateContext {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        UpdateContext::new(Arc::new(k), &[Symbol(1)], 4).unwrap()
    }

    /// `max{k <= m : the window builds from U_k..U_n alone}` by restarting
    /// the forward construction at every candidate.
    fn theta_by_restarts<S: UniformSource>(ctx: &UpdateContext, s: &mut S, m: i64, n: i64) -> i64 {
        let mut k = m;
        loop {
            let mut xs = Vec::new();
            let ok = (k..=n).all(|t| match ctx.update_f(s.uniform(t), &xs).unwrap() {
                Some(a) => {
                    xs.push(a);
                    true
                }
                None => false,
            });
            if ok {
                return k;
            }
            k -= 1;
        }
    }

    #[test]
    fn constant_kernel_never_looks_back() {
        let k = MarkovKernel::constant(vec![0.3, 0.7]).unwrap();
        let ctx = UpdateContext::new(Arc::new(k), &[Symbol(0)], 2).unwrap();
        let mut s = UniformStream::new(1);
        let run = algorithm1(&ctx, &mut s, 5, 9, CftpOptions::default()).unwrap();
        assert_eq!(run.theta, 5);
        assert_eq!(run.uniforms_drawn, 5);
        let split = regeneration_split(&run);
        assert_eq!(split.times, (5..=9).collect::<Vec<_>>());
        assert!(split.blocks.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn hand_traces() {
        let ctx = markov_ctx();
        let mut s = FixedUniforms::new(UniformStream::new(0))
            .pin(0, 0.85)
            .pin(-1, 0.5);
        let run = algorithm1(&ctx, &mut s, 0, 0, CftpOptions::default()).unwrap();
        assert_eq!(run.theta, -1);
        assert_eq!(run.sample, vec![Symbol(1), Symbol(1)]);
        assert_eq!(run.lookbacks, vec![0, 1]);

        let mut s = FixedUniforms::new(UniformStream::new(0)).pin(0, 0.3);
        let run = algorithm1(&ctx, &mut s, 0, 0, CftpOptions::default()).unwrap();
        assert_eq!(run.theta, 0);
        assert_eq!(run.sample, vec![Symbol(0)]);
    }

    #[test]
    fn matches_restart_oracle() {
        let kernels: Vec<UpdateContext> = vec![
            markov_ctx(),
            UpdateContext::new(Arc::new(RenewalKernel::showcase()), &[Symbol(1)], 60).unwrap(),
            UpdateContext::new(
                Arc::new(RenewalKernel::showcase()),
                &[Symbol(0), Symbol(1)],
                60,
            )
            .unwrap(),
        ];
        for ctx in &kernels {
            for seed in 0..300 {
                let mut s = UniformStream::new(seed);
                let (m, n) = (0, (seed % 7) as i64);
                let run = algorithm1(ctx, &mut s, m, n, CftpOptions::default()).unwrap();
                assert_eq!(run.theta, theta_by_restarts(ctx, &mut s, m, n), "seed {seed}");
            }
        }
    }

    #[test]
    fn markov_regeneration_tail_is_geometric() {
        // a stall continues while the backward uniform misses I(2) = [0.4, 0.8)
        let ctx = markov_ctx();
        let reps = 40_000u64;
        let thetas: Vec<i64> = (0..reps)
            .map(|r| theta(&ctx, &mut UniformStream::with_stream(17, r), 0, 0, CftpOptions::default()).unwrap())
            .collect();
        for l in 0..6 {
            let p = 0.2 * 0.6f64.powi(l);
            let hat = thetas.iter().filter(|&&t| t < -(l as i64)).count() as f64 / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((hat - p).abs() < 4.0 * se, "l={l}: {hat} vs {p}");
        }
    }

    #[test]
    fn conservative_start_is_no_later() {
        let ctx = UpdateContext::new(Arc::new(RenewalKernel::showcase()), &[Symbol(1)], 60).unwrap();
        let cons = CftpOptions {
            conservative: true,
            ..CftpOptions::default()
        };
        assert!((spontaneous_threshold(&ctx, true) - 0.5).abs() < 1e-15);
        for seed in 0..100 {
            let mut s = UniformStream::new(seed);
            let exact = algorithm1(&ctx, &mut s, 0, 3, CftpOptions::default()).unwrap();
            let slow = algorithm1(&ctx, &mut s, 0, 3, cons).unwrap();
            assert!(slow.theta <= exact.theta);
            assert_eq!(slow.window(), exact.window());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = markov_ctx();
        let mut s = FixedUniforms::new(UniformStream::new(0)).pin(0, 0.9);
        for i in 1..=20 {
            s = s.pin(-i, 0.95);
        }
        let opts = CftpOptions {
            step_budget: 10,
            ..CftpOptions::default()
        };
        assert_eq!(
            algorithm1(&ctx, &mut s, 0, 0, opts).unwrap_err(),
            Error::StepBudgetExceeded { budget: 10 }
        );
    }

    #[test]
    fn split_has_no_crossing_arrows() {
        let ctx = UpdateContext::new(Arc::new(RenewalKernel::showcase()), &[Symbol(1)], 60).unwrap();
        let mut s = UniformStream::new(11);
        let run = algorithm1(&ctx, &mut s, 0, 2000, CftpOptions::default()).unwrap();
        let split = regeneration_split(&run);
        assert_eq!(split.times[0], run.theta);
        for &t in &split.times {
            for j in t..=run.n {
                assert!(j - run.lookback_at(j) as i64 >= t);
            }
        }
        let rebuilt: Vec<Symbol> = split
            .blocks
            .iter()
            .flatten()
            .chain(&split.tail)
            .copied()
            .collect();
        assert_eq!(rebuilt, run.sample);
        assert!(split.interior().len() > 100);
    }
}
