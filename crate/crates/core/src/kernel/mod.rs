//! Transition kernels with computable infimum envelopes.
//!
//! A kernel answers two questions: the exact next-symbol law given a full
//! past ([`Kernel::prob`] on a [`SufficientState`]) and the infimum
//! `inf_z P(a | v z)` over all completions of a finite past `v`
//! ([`Kernel::lower_bound`]). Everything downstream (thresholds, interval
//! layouts, the update function) is built from the envelope alone, so an
//! envelope that overestimates an infimum breaks exactness; families ship
//! closed forms that are checked against brute force in the tests.

mod markov;
mod renewal;

use std::fmt;

pub use markov::MarkovKernel;
pub use renewal::{RenewalKernel, SeqRule};

use crate::alphabet::{Alphabet, Past, Symbol};
use crate::error::{Error, Result};

/// Finite summary of an infinite past; the kernel's value depends on the
/// past only through it.
#[derive(Debug, Clone, PartialEq)]
pub enum SufficientState {
    /// The last `k` symbols, oldest first.
    Window(Vec<Symbol>),
    /// Distance to the most recent renewal symbol (`None`: it never
    /// occurred) and the binary expansion of the symbols beyond it.
    Renewal { distance: Option<usize>, beyond: f64 },
}

/// How far back a kernel can look.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    Finite(usize),
    Infinite,
}

pub trait Kernel: Send + Sync + fmt::Debug {
    fn alphabet(&self) -> &Alphabet;

    fn memory(&self) -> Memory;

    fn sufficient_state(&self, past: &Past) -> SufficientState;

    /// `P(a | past)` for the past summarised by `state`.
    fn prob(&self, a: Symbol, state: &SufficientState) -> f64;

    /// `inf_z P(a | v z)`.
    fn lower_bound(&self, a: Symbol, v: &[Symbol]) -> f64;

    fn exact_prob(&self, a: Symbol, past: &Past) -> f64 {
        self.prob(a, &self.sufficient_state(past))
    }

    /// `sup_z P(a | v z)` bounded through the other symbols' infima.
    fn upper_bound(&self, a: Symbol, v: &[Symbol]) -> f64 {
        let others: f64 = self
            .alphabet()
            .symbols()
            .filter(|&b| b != a)
            .map(|b| self.lower_bound(b, v))
            .sum();
        (1.0 - others).clamp(0.0, 1.0)
    }

    /// Analytic `alpha^w_k`, for families that have one.
    fn alpha_w_closed_form(&self, _w: &[Symbol], _k: usize) -> Option<Result<f64>> {
        None
    }

    /// Certified bound on `sum_{k > k_max} (1 - alpha^w_k)`.
    fn threshold_tail_bound(&self, _w: &[Symbol], _k_max: usize) -> Option<f64> {
        None
    }
}

/// `alpha(a) = inf_z P(a | z)`.
pub fn alpha_of_symbol(kernel: &dyn Kernel, a: Symbol) -> f64 {
    kernel.lower_bound(a, &[])
}

/// Symbols that can appear without looking at the past.
#[derive(Debug, Clone, PartialEq)]
pub struct SpontaneousSet {
    pub members: Vec<Symbol>,
    /// Least spontaneous mass among the symbols of `w`.
    pub epsilon: f64,
    pub w_in_e_star: bool,
}

/// Builds the spontaneous set and refuses reference strings with a
/// non-spontaneous symbol.
pub fn spontaneous_set(kernel: &dyn Kernel, w: &[Symbol]) -> Result<SpontaneousSet> {
    if w.is_empty() {
        return Err(Error::ParameterOutOfRange(
            "reference string must be nonempty".into(),
        ));
    }
    let alphabet = kernel.alphabet();
    let members: Vec<Symbol> = alphabet
        .symbols()
        .filter(|&a| alpha_of_symbol(kernel, a) > 0.0)
        .collect();
    let mut epsilon = f64::INFINITY;
    for &s in w {
        if s.index() >= alphabet.len() {
            return Err(Error::ParameterOutOfRange(format!(
                "symbol index {} outside alphabet",
                s.index()
            )));
        }
        let alpha = alpha_of_symbol(kernel, s);
        if alpha <= 0.0 {
            return Err(Error::WNotSpontaneous { symbol: s.index() });
        }
        epsilon = epsilon.min(alpha);
    }
    Ok(SpontaneousSet {
        members,
        epsilon,
        w_in_e_star: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markov() -> MarkovKernel {
        MarkovKernel::binary_order_one(0.4, 0.6).unwrap()
    }

    #[test]
    fn alpha_values() {
        let constant = MarkovKernel::constant(vec![0.3, 0.7]).unwrap();
        assert_eq!(alpha_of_symbol(&constant, Symbol(0)), 0.3);
        let m = markov();
        assert!((alpha_of_symbol(&m, Symbol(1)) - 0.4).abs() < 1e-15);
        assert!((alpha_of_symbol(&m, Symbol(0)) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn spontaneous_sets() {
        let e = spontaneous_set(&markov(), &[Symbol(1)]).unwrap();
        assert_eq!(e.members, vec![Symbol(0), Symbol(1)]);
        assert!((e.epsilon - 0.4).abs() < 1e-15);
        assert!(e.w_in_e_star);

        let blocked = MarkovKernel::binary_order_one(0.0, 0.6).unwrap();
        assert_eq!(
            spontaneous_set(&blocked, &[Symbol(1)]),
            Err(Error::WNotSpontaneous { symbol: 1 })
        );

        let constant = MarkovKernel::constant(vec![0.3, 0.7]).unwrap();
        let e = spontaneous_set(&constant, &[Symbol(0)]).unwrap();
        assert_eq!(e.epsilon, 0.3);
    }

    #[test]
    fn upper_bound_is_complement() {
        let m = markov();
        assert!((m.upper_bound(Symbol(1), &[]) - 0.6).abs() < 1e-15);
        assert!((m.upper_bound(Symbol(1), &[Symbol(1)]) - 0.6).abs() < 1e-15);
    }
}
