//! Auxiliary chains that bound the regeneration time from below using only
//! the spontaneous part of the construction: the arrows `L`, their
//! block-rescaled version `L-bar`, the dominating chains `D` and `E`, and
//! the tail bound relating them to `theta`.

mod arrows;

pub use arrows::{ArrowChain, Site};

use crate::alphabet::Symbol;
use crate::cftp::{algorithm1, CftpOptions};
use crate::error::Result;
use crate::stream::UniformSource;
use crate::update::UpdateContext;
use crate::validation::stats::{mean_ci, wilson_interval};

/// Arrow chain of the spontaneous symbols `Z_i` over `(floor, hi]`.
pub fn spontaneous_chain<'a, S: UniformSource + ?Sized>(
    ctx: &'a UpdateContext,
    stream: &'a mut S,
    hi: i64,
    floor: i64,
    budget: u64,
) -> ArrowChain<impl FnMut(i64) -> Result<Site> + 'a> {
    ArrowChain::new(
        ctx.w().to_vec(),
        move |i| {
            let u = stream.uniform(i);
            Ok((ctx.spontaneous_symbol(u), ctx.ell(u)?))
        },
        hi,
        floor,
        budget,
    )
}

/// Arrow chain of the blocks `Z-bar_j` (block `j` covers times
/// `(j-1)|w|+1 ..= j|w|`); the marker symbol is `Symbol(0)`.
pub fn rescaled_chain<'a, S: UniformSource + ?Sized>(
    ctx: &'a UpdateContext,
    stream: &'a mut S,
    hi: i64,
    floor: i64,
    budget: u64,
) -> ArrowChain<impl FnMut(i64) -> Result<Site> + 'a> {
    let w = ctx.w().to_vec();
    let len = w.len() as i64;
    ArrowChain::new(
        vec![Symbol(0)],
        move |j| {
            let mut all_w = true;
            let mut top = i64::MIN;
            for (r, &sym) in w.iter().enumerate() {
                let u = stream.uniform((j - 1) * len + r as i64 + 1);
                all_w &= ctx.base_intervals()[sym.index()].contains(u);
                top = top.max(ctx.ell(u)?);
            }
            Ok((all_w.then_some(Symbol(0)), top.div_euclid(len) + (top.rem_euclid(len) != 0) as i64))
        },
        hi,
        floor,
        budget,
    )
}

/// `ceil(n / |w|)`.
pub fn rescaled_window_end(n: i64, w_len: usize) -> i64 {
    let w = w_len as i64;
    n.div_euclid(w) + (n.rem_euclid(w) != 0) as i64
}

/// `(theta_bar - 1)|w| + 1`.
pub fn rescaled_lower_bound(theta_bar: i64, w_len: usize) -> i64 {
    (theta_bar - 1) * w_len as i64 + 1
}

/// `theta'[m, n]`, extending the spontaneous trace backward on demand.
pub fn theta_prime<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    m: i64,
    n: i64,
    budget: u64,
) -> Result<i64> {
    let mut chain = spontaneous_chain(ctx, stream, n, i64::MIN, budget);
    Ok(chain.regeneration(m, n)?.expect("unbounded chain"))
}

/// `theta-bar[0, n_bar]`.
pub fn theta_bar<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    n_bar: i64,
    budget: u64,
) -> Result<i64> {
    let mut chain = rescaled_chain(ctx, stream, n_bar, i64::MIN, budget);
    Ok(chain.regeneration(0, n_bar)?.expect("unbounded chain"))
}

/// Pointwise values of an arrow chain over a finite range `lo..=hi`; nothing
/// below `lo` is consulted, so unresolved distances stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowTrace {
    pub lo: i64,
    pub symbols: Vec<Option<Symbol>>,
    pub distances: Vec<Option<usize>>,
    pub ells: Vec<i64>,
    pub arrows: Vec<Option<usize>>,
}

impl ArrowTrace {
    fn collect<F: FnMut(i64) -> Result<Site>>(
        chain: &mut ArrowChain<F>,
        lo: i64,
        hi: i64,
    ) -> Result<Self> {
        let mut t = ArrowTrace {
            lo,
            symbols: Vec::new(),
            distances: Vec::new(),
            ells: Vec::new(),
            arrows: Vec::new(),
        };
        for i in lo..=hi {
            t.symbols.push(chain.symbol(i)?);
            t.distances.push(chain.mark_distance(i, None)?);
            t.ells.push(chain.ell(i)?);
            t.arrows.push(chain.arrow(i)?);
        }
        Ok(t)
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.arrows.len() as i64 - 1
    }

    pub fn arrow(&self, i: i64) -> Option<usize> {
        self.arrows[(i - self.lo) as usize]
    }

    /// `max{k <= m : L_i <= i - k, i = k..=n}` if the trace certifies it.
    pub fn regeneration(&self, m: i64, n: i64) -> Option<i64> {
        let mut reach = i64::MAX;
        for i in m..=n {
            reach = reach.min(i - self.arrow(i)? as i64);
        }
        let mut k = m;
        while reach < k {
            k -= 1;
            if k < self.lo {
                return None;
            }
            reach = reach.min(k - self.arrow(k)? as i64);
        }
        Some(k)
    }
}

/// `Z`, `m`, `ell` and `L` over `lo..=hi`.
pub fn spontaneous_trace<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    lo: i64,
    hi: i64,
) -> Result<ArrowTrace> {
    let mut chain = spontaneous_chain(ctx, stream, hi, lo, u64::MAX);
    ArrowTrace::collect(&mut chain, lo, hi)
}

/// `Z-bar`, `m-bar`, `ell-bar` and `L-bar` over blocks `lo..=hi`.
pub fn rescaled_trace<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    lo: i64,
    hi: i64,
) -> Result<ArrowTrace> {
    let mut chain = rescaled_chain(ctx, stream, hi, lo, u64::MAX);
    ArrowTrace::collect(&mut chain, lo, hi)
}

/// `D^{(n)}` and the companion chain `E` over `n+1 ..= n+horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatingChain {
    pub origin: i64,
    pub d: Vec<u64>,
    pub e: Vec<u64>,
}

impl DominatingChain {
    /// `D_i`, zero at and before the origin.
    pub fn d_at(&self, i: i64) -> u64 {
        if i <= self.origin {
            0
        } else {
            self.d[(i - self.origin - 1) as usize]
        }
    }

    pub fn e_at(&self, i: i64) -> u64 {
        if i <= self.origin {
            0
        } else {
            self.e[(i - self.origin - 1) as usize]
        }
    }

    /// Steps after the origin until `E` first returns to 0.
    pub fn first_return(&self) -> Option<usize> {
        self.e.iter().position(|&x| x == 0).map(|p| p + 1)
    }
}

/// `D_i = (i - i^{(n)} - L-bar_i) v 0` with `i^{(n)}` the last zero before
/// `i`; `E` copies `D` at zeros and at fresh records `D_i = i - i^{(n)}`
/// and holds its previous value otherwise.
pub fn dominating_chain<F: FnMut(i64) -> Result<Site>>(
    rescaled: &mut ArrowChain<F>,
    origin: i64,
    horizon: usize,
) -> Result<DominatingChain> {
    let mut d = Vec::with_capacity(horizon);
    let mut e = Vec::with_capacity(horizon);
    let mut last_zero = origin;
    let mut prev_e = 0u64;
    for step in 1..=horizon as i64 {
        let i = origin + step;
        let gap = (i - last_zero) as usize;
        let di = match rescaled.arrow_capped(i, Some(gap))? {
            Some(l) => (gap - l) as u64,
            None => 0,
        };
        let ei = if di == 0 || di == gap as u64 { di } else { prev_e };
        if di == 0 {
            last_zero = i;
        }
        d.push(di);
        e.push(ei);
        prev_e = ei;
    }
    Ok(DominatingChain { origin, d, e })
}

/// One replica of the tail-bound experiment: `theta[0, n]` and the zero
/// indicators of `D^{(0)}_k` for `k = 0..=horizon`, on a shared stream.
#[derive(Debug, Clone, PartialEq)]
pub struct YoSample {
    pub theta: i64,
    pub d_zero: Vec<bool>,
    pub first_return: Option<usize>,
}

pub fn yo_replica<S: UniformSource + ?Sized>(
    ctx: &UpdateContext,
    stream: &mut S,
    n: i64,
    horizon: usize,
    opts: CftpOptions,
) -> Result<YoSample> {
    let theta = algorithm1(ctx, stream, 0, n, opts)?.theta;
    let mut chain = rescaled_chain(ctx, stream, horizon as i64, i64::MIN, opts.step_budget);
    let dc = dominating_chain(&mut chain, 0, horizon)?;
    let mut d_zero = vec![true];
    d_zero.extend(dc.d.iter().map(|&x| x == 0));
    Ok(YoSample {
        theta,
        d_zero,
        first_return: dc.first_return(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoRow {
    pub l: usize,
    pub theta_below: u64,
    pub p_theta: f64,
    pub p_theta_ci: (f64, f64),
    pub bound: f64,
    pub bound_ci: (f64, f64),
}

impl YoRow {
    /// The estimated left side does not exceed the estimated bound beyond
    /// what the two intervals allow.
    pub fn consistent(&self) -> bool {
        self.p_theta_ci.0 <= self.bound_ci.1
    }
}

/// Both sides of the tail bound for `l = 1..=l_max`, with confidence
/// intervals at normal quantile `z`.
pub fn yo_table(samples: &[YoSample], n: i64, w_len: usize, l_max: usize, z: f64) -> Vec<YoRow> {
    let reps = samples.len() as u64;
    let w = w_len as i64;
    let extra = rescaled_window_end(n, w_len);
    (1..=l_max)
        .map(|l| {
            let below = samples.iter().filter(|s| s.theta < -(l as i64)).count() as u64;
            let lo = l as i64 / w;
            let sums: Vec<f64> = samples
                .iter()
                .map(|s| {
                    (lo..=lo + extra)
                        .map(|k| s.d_zero.get(k as usize).copied().unwrap_or(false) as u8 as f64)
                        .sum()
                })
                .collect();
            let (bound, half) = mean_ci(&sums, z);
            YoRow {
                l,
                theta_below: below,
                p_theta: below as f64 / reps as f64,
                p_theta_ci: wilson_interval(below, reps, z),
                bound,
                bound_ci: (bound - half, bound + half),
            }
        })
        .collect()
}

/// Empirical `f_k = P(zeta = k)` for `k = 1..=horizon`.
pub fn first_return_law(samples: &[YoSample], horizon: usize) -> Vec<f64> {
    let mut f = vec![0.0; horizon + 1];
    for s in samples {
        if let Some(k) = s.first_return {
            f[k] += 1.0;
        }
    }
    f.iter_mut().for_each(|x| *x /= samples.len() as f64);
    f
}
