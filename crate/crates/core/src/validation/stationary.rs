use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, MarkovKernel};

/// Largest lifted state space accepted.
pub const MAX_STATES: usize = 10_000;
const DENSE_LIMIT: usize = 1_000;

/// Exact stationary law of a finite-order kernel, lifted to `A^k`.
#[derive(Debug, Clone)]
pub struct StationaryOracle {
    pub order: usize,
    pub alphabet_len: usize,
    /// Stationary weight of every state of `A^k`, oldest symbol most significant.
    pub pi: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

fn successor(state: usize, a: usize, n: usize, states: usize) -> usize {
    (state * n + a) % states
}

fn reachable(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(s) = queue.pop_front() {
        for &t in &adj[s] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                queue.push_back(t);
            }
        }
    }
    count
}

pub fn exact_stationary(kernel: &MarkovKernel) -> Result<StationaryOracle> {
    let n = kernel.alphabet().len();
    let k = kernel.order();
    let states = n
        .checked_pow(k as u32)
        .filter(|&s| s <= MAX_STATES)
        .ok_or_else(|| Error::ParameterOutOfRange(format!("|A|^{k} exceeds {MAX_STATES}")))?;
    let rows: Vec<Vec<f64>> = kernel.rows().map(<[f64]>::to_vec).collect();

    let mut fwd = vec![Vec::new(); states];
    let mut bwd = vec![Vec::new(); states];
    for s in 0..states {
        for a in 0..n {
            if rows[s][a] > 0.0 {
                let t = successor(s, a, n, states);
                fwd[s].push(t);
                bwd[t].push(s);
            }
        }
    }
    if reachable(&fwd, 0) != states || reachable(&bwd, 0) != states {
        return Err(Error::NotIrreducible);
    }

    let pi = if states <= DENSE_LIMIT {
        solve_dense(&rows, n, states)
    } else {
        solve_iterative(&rows, n, states)
    };
    Ok(StationaryOracle {
        order: k,
        alphabet_len: n,
        pi,
        rows,
    })
}

fn solve_dense(rows: &[Vec<f64>], n: usize, states: usize) -> Vec<f64> {
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let mut m = DMatrix::<f64>::zeros(states, states);
    for s in 0..states {
        for a in 0..n {
            let t = successor(s, a, n, states);
            m[(t, s)] += rows[s][a];
        }
        m[(s, s)] -= 1.0;
    }
    for c in 0..states {
        m[(states - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(states);
    rhs[states - 1] = 1.0;
    let x = m.lu().solve(&rhs).expect("irreducible chain has a unique solution");
    normalise(x.iter().map(|v| v.max(0.0)).collect())
}

fn solve_iterative(rows: &[Vec<f64>], n: usize, states: usize) -> Vec<f64> {
    let mut pi = vec![1.0 / states as f64; states];
    for _ in 0..1_000_000 {
        // lazy step keeps the iteration aperiodic
        let mut next: Vec<f64> = pi.iter().map(|p| 0.5 * p).collect();
        for s in 0..states {
            for a in 0..n {
                next[successor(s, a, n, states)] += 0.5 * pi[s] * rows[s][a];
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    normalise(pi)
}

fn normalise(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

impl StationaryOracle {
    fn states(&self) -> usize {
        self.pi.len()
    }

    /// One step of the lifted chain applied to a row vector.
    fn step(&self, dist: &[f64]) -> Vec<f64> {
        let n = self.alphabet_len;
        let mut out = vec![0.0; dist.len()];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for a in 0..n {
                out[successor(s, a, n, dist.len())] += p * self.rows[s][a];
            }
        }
        out
    }

    /// `max |pi P - pi|`.
    pub fn residual(&self) -> f64 {
        self.step(&self.pi)
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Stationary law of `len` consecutive symbols, as a table over `A^len`
    /// with the oldest symbol most significant.
    pub fn window_law(&self, len: usize) -> Vec<f64> {
        let n = self.alphabet_len;
        let k = self.order;
        if len <= k {
            let size = n.pow(len as u32);
            let mut law = vec![0.0; size];
            for (s, &p) in self.pi.iter().enumerate() {
                law[s % size] += p;
            }
            return law;
        }
        let mut law = self.pi.clone();
        let states = self.states();
        for _ in k..len {
            let mut next = Vec::with_capacity(law.len() * n);
            for (word, &p) in law.iter().enumerate() {
                let state = word % states;
                for a in 0..n {
                    next.push(p * self.rows[state][a]);
                }
            }
            law = next;
        }
        law
    }

    /// Smallest `t <= cap` with `sup_s TV(P^t(s, .), pi) < eps`.
    pub fn mixing_steps(&self, eps: f64, cap: usize) -> usize {
        let states = self.states();
        let mut dists: Vec<Vec<f64>> = (0..states)
            .map(|s| {
                let mut d = vec![0.0; states];
                d[s] = 1.0;
                d
            })
            .collect();
        for t in 1..=cap {
            dists = dists.iter().map(|d| self.step(d)).collect();
            let worst = dists
                .iter()
                .map(|d| 0.5 * d.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            if worst < eps {
                return t;
            }
        }
        cap
    }
}
