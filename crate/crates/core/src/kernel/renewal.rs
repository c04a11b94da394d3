use crate::alphabet::{Alphabet, Past, Symbol};
use crate::error::{Error, Result};

use super::{Kernel, Memory, SufficientState};

/// The renewal symbol `2`.
pub const RENEWAL: Symbol = Symbol(1);
const ONE: Symbol = Symbol(0);

/// Terms of the binary expansion kept when summarising an infinite past.
const EXPANSION_BITS: usize = 64;

/// A sequence `(s_m)_{m >= 0}` given by a closed-form rule, so that tail
/// infima and suprema are exact.
#[derive(Debug, Clone, PartialEq)]
pub enum SeqRule {
    Constant(f64),
    /// `limit + (first - limit) * ratio^m`, `0 <= ratio < 1`.
    Geometric { first: f64, limit: f64, ratio: f64 },
    /// `values[m mod len]`.
    Periodic(Vec<f64>),
    /// `head[m]` for `m < head.len()`, then `tail`.
    Table { head: Vec<f64>, tail: f64 },
}

impl SeqRule {
    pub fn value(&self, m: usize) -> f64 {
        match self {
            SeqRule::Constant(c) => *c,
            SeqRule::Geometric {
                first,
                limit,
                ratio,
            } => limit + (first - limit) * ratio.powi(m.min(i32::MAX as usize) as i32),
            SeqRule::Periodic(v) => v[m % v.len()],
            SeqRule::Table { head, tail } => head.get(m).copied().unwrap_or(*tail),
        }
    }

    /// `inf_{m >= n} s_m`.
    pub fn inf_from(&self, n: usize) -> f64 {
        match self {
            SeqRule::Constant(c) => *c,
            SeqRule::Geometric { limit, .. } => self.value(n).min(*limit),
            SeqRule::Periodic(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
            SeqRule::Table { head, tail } => head
                .iter()
                .skip(n)
                .copied()
                .fold(*tail, f64::min),
        }
    }

    /// `sup_{m >= n} s_m`.
    pub fn sup_from(&self, n: usize) -> f64 {
        match self {
            SeqRule::Constant(c) => *c,
            SeqRule::Geometric { limit, .. } => self.value(n).max(*limit),
            SeqRule::Periodic(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            SeqRule::Table { head, tail } => head
                .iter()
                .skip(n)
                .copied()
                .fold(*tail, f64::max),
        }
    }

    /// `(start, period)` such that the sequence is periodic from `start` on.
    fn eventual_period(&self) -> Option<(usize, usize)> {
        match self {
            SeqRule::Constant(_) => Some((0, 1)),
            SeqRule::Geometric { ratio, .. } if *ratio == 0.0 => Some((1, 1)),
            SeqRule::Geometric { .. } => None,
            SeqRule::Periodic(v) => Some((0, v.len())),
            SeqRule::Table { head, .. } => Some((head.len(), 1)),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let bad = |msg: &str| Err(Error::ParameterOutOfRange(format!("{name}: {msg}")));
        match self {
            SeqRule::Geometric { ratio, .. } if !(0.0..1.0).contains(ratio) => {
                bad("geometric ratio must lie in [0, 1)")
            }
            SeqRule::Periodic(v) if v.is_empty() => bad("periodic rule needs values"),
            _ => Ok(()),
        }
    }
}

/// `sup_{m >= n} (a_m + b_m)`. Exact when both rules are eventually
/// periodic (constants included); otherwise `sup a + sup b`, which can only
/// overestimate and so keeps derived infima valid.
fn sup_sum_from(a: &SeqRule, b: &SeqRule, n: usize) -> f64 {
    if let SeqRule::Constant(c) = b {
        return a.sup_from(n) + c;
    }
    if let SeqRule::Constant(c) = a {
        return c + b.sup_from(n);
    }
    match (a.eventual_period(), b.eventual_period()) {
        (Some((sa, pa)), Some((sb, pb))) => {
            let period = lcm(pa, pb);
            let end = n.max(sa.max(sb)) + period;
            (n..end)
                .map(|m| a.value(m) + b.value(m))
                .fold(f64::NEG_INFINITY, f64::max)
        }
        _ => a.sup_from(n) + b.sup_from(n),
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Kernel on `{1, 2}` that renews at every `2`.
///
/// With `m` symbols `1` since the last `2` and `x = sum_j 2^-j 1{z_{-(m+1+j)} = 2}`
/// encoding everything older than that `2`,
/// `P(2 | past) = r_m + delta_m * x`; a past with no `2` at all gets
/// `P(2 | 1^{-N}) = q`. When `lim r_m` differs from `q` (or does not exist)
/// the all-ones past is a discontinuity point.
#[derive(Debug, Clone)]
pub struct RenewalKernel {
    alphabet: Alphabet,
    r: SeqRule,
    delta: SeqRule,
    q: f64,
}

impl RenewalKernel {
    pub fn new(r: SeqRule, delta: SeqRule, q: f64) -> Result<Self> {
        r.validate("r")?;
        delta.validate("delta")?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("q = {q} not in (0, 1)")));
        }
        if r.inf_from(0) <= 0.0 {
            return Err(Error::ParameterOutOfRange("r_m must stay positive".into()));
        }
        if delta.inf_from(0) < 0.0 {
            return Err(Error::ParameterOutOfRange("delta_m must be nonnegative".into()));
        }
        if sup_sum_from(&r, &delta, 0) >= 1.0 {
            return Err(Error::ParameterOutOfRange(
                "r_m + delta_m must stay below 1".into(),
            ));
        }
        Ok(RenewalKernel {
            alphabet: Alphabet::numbered(2)?,
            r,
            delta,
            q,
        })
    }

    /// `r_m = 0.3 + 0.1 (m mod 2)`, `delta_m = 0.2`, `q = 0.8`.
    pub fn showcase() -> Self {
        Self::new(
            SeqRule::Periodic(vec![0.3, 0.4]),
            SeqRule::Constant(0.2),
            0.8,
        )
        .expect("showcase parameters are valid")
    }

    pub fn r(&self) -> &SeqRule {
        &self.r
    }

    pub fn delta(&self) -> &SeqRule {
        &self.delta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn p2(&self, m: usize, x: f64) -> f64 {
        self.r.value(m) + self.delta.value(m) * x
    }
}

/// Position of the last renewal symbol and the bits known beyond it.
fn split_at_last_renewal(v: &[Symbol]) -> Option<(usize, f64, usize)> {
    let p = v.iter().rposition(|&s| s == RENEWAL)?;
    let m = v.len() - 1 - p;
    let mut x = 0.0;
    let mut weight = 0.5;
    for j in 1..=p {
        if v[p - j] == RENEWAL {
            x += weight;
        }
        weight *= 0.5;
    }
    Some((m, x, p))
}

impl Kernel for RenewalKernel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn memory(&self) -> Memory {
        Memory::Infinite
    }

    fn sufficient_state(&self, past: &Past) -> SufficientState {
        let distance = past.m_w(&[RENEWAL]);
        let beyond = distance.map_or(0.0, |m| {
            let mut x = 0.0;
            let mut weight = 0.5;
            for j in 1..=EXPANSION_BITS {
                if past.at(m + 1 + j) == RENEWAL {
                    x += weight;
                }
                weight *= 0.5;
            }
            x
        });
        SufficientState::Renewal { distance, beyond }
    }

    fn prob(&self, a: Symbol, state: &SufficientState) -> f64 {
        let p2 = match state {
            SufficientState::Renewal {
                distance: Some(m),
                beyond,
            } => self.p2(*m, *beyond),
            SufficientState::Renewal { distance: None, .. } => self.q,
            other => panic!("state {other:?} is not a renewal summary"),
        };
        if a == RENEWAL {
            p2
        } else {
            1.0 - p2
        }
    }

    fn lower_bound(&self, a: Symbol, v: &[Symbol]) -> f64 {
        match split_at_last_renewal(v) {
            Some((m, x, known)) => {
                let r = self.r.value(m);
                let d = self.delta.value(m);
                if a == RENEWAL {
                    r + d * x
                } else {
                    // the unknown tail can push x up to x + 2^-known
                    1.0 - r - d * (x + 0.5f64.powi(known as i32))
                }
            }
            None => {
                // the last 2, if any, is at distance >= |v|
                let n = v.len();
                if a == RENEWAL {
                    self.q.min(self.r.inf_from(n))
                } else {
                    (1.0 - self.q).min(1.0 - sup_sum_from(&self.r, &self.delta, n))
                }
            }
        }
    }

    fn alpha_w_closed_form(&self, w: &[Symbol], k: usize) -> Option<Result<f64>> {
        let last = match w.iter().rposition(|&s| s == RENEWAL) {
            Some(p) => p,
            None => {
                return Some(Err(Error::DepthExceeded(
                    "renewal kernel needs a reference string containing symbol 2".into(),
                )))
            }
        };
        debug_assert!(w[last + 1..].iter().all(|&s| s == ONE));
        let trailing = w.len() - 1 - last;
        let older = last;
        let gap = self.delta.sup_from(trailing) * 0.5f64.powi((k + older) as i32);
        Some(Ok(1.0 - gap))
    }

    fn threshold_tail_bound(&self, w: &[Symbol], k_max: usize) -> Option<f64> {
        let last = w.iter().rposition(|&s| s == RENEWAL)?;
        let trailing = w.len() - 1 - last;
        Some(self.delta.sup_from(trailing) * 0.5f64.powi((last + k_max) as i32))
    }
}
