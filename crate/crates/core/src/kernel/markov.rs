use crate::alphabet::{Alphabet, Past, Symbol};
use crate::error::{Error, Result};

use super::{Kernel, Memory, SufficientState};

const ROW_TOLERANCE: f64 = 1e-12;

/// Order-`k` Markov kernel given by a table over `A^k x A`.
///
/// Contexts are indexed oldest-first with the oldest symbol most
/// significant, so for `A = {1,2}` and `k = 2` the rows are
/// `11, 12, 21, 22`.
#[derive(Debug, Clone)]
pub struct MarkovKernel {
    alphabet: Alphabet,
    order: usize,
    table: Vec<f64>,
    /// `lower[j]` holds `min` over completions for every context of length `j < order`.
    lower: Vec<Vec<f64>>,
}

impl MarkovKernel {
    pub fn new(alphabet: Alphabet, order: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = alphabet.len();
        let expected = n
            .checked_pow(order as u32)
            .filter(|&r| r <= 1 << 20)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("order {order} too large")))?;
        if rows.len() != expected {
            return Err(Error::ParameterOutOfRange(format!(
                "table has {} rows, expected {expected}",
                rows.len()
            )));
        }
        let mut table = Vec::with_capacity(expected * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ParameterOutOfRange(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::ParameterOutOfRange(format!(
                    "row {i} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::MalformedTable { row: i, sum });
            }
            table.extend_from_slice(row);
        }

        let mut lower = vec![Vec::new(); order];
        let mut longer: &[f64] = &table;
        for j in (0..order).rev() {
            let count = n.pow(j as u32);
            let mut mins = vec![f64::INFINITY; count * n];
            for oldest in 0..n {
                for ctx in 0..count {
                    let src = (oldest * count + ctx) * n;
                    for a in 0..n {
                        let v = longer[src + a];
                        let dst = &mut mins[ctx * n + a];
                        if v < *dst {
                            *dst = v;
                        }
                    }
                }
            }
            lower[j] = mins;
            longer = &lower[j];
        }

        Ok(MarkovKernel {
            alphabet,
            order,
            table,
            lower,
        })
    }

    /// Memoryless kernel with law `q`.
    pub fn constant(q: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::numbered(q.len())?;
        Self::new(alphabet, 0, vec![q])
    }

    /// Order-1 chain on `{1, 2}` with `P(2|1) = p21` and `P(2|2) = p22`.
    pub fn binary_order_one(p21: f64, p22: f64) -> Result<Self> {
        Self::new(
            Alphabet::numbered(2)?,
            1,
            vec![vec![1.0 - p21, p21], vec![1.0 - p22, p22]],
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `P(a | context)` for a context of exactly `order` symbols.
    pub fn row(&self, context: &[Symbol]) -> &[f64] {
        let n = self.alphabet.len();
        let idx = context_index(context, n);
        &self.table[idx * n..(idx + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.alphabet.len())
    }
}

fn context_index(ctx: &[Symbol], n: usize) -> usize {
    ctx.iter().fold(0, |acc, s| acc * n + s.index())
}

impl Kernel for MarkovKernel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn memory(&self) -> Memory {
        Memory::Finite(self.order)
    }

    fn sufficient_state(&self, past: &Past) -> SufficientState {
        SufficientState::Window(past.suffix(self.order))
    }

    fn prob(&self, a: Symbol, state: &SufficientState) -> f64 {
        match state {
            SufficientState::Window(w) if w.len() >= self.order => {
                self.row(&w[w.len() - self.order..])[a.index()]
            }
            other => panic!("state {other:?} does not summarise an order-{} past", self.order),
        }
    }

    fn lower_bound(&self, a: Symbol, v: &[Symbol]) -> f64 {
        let n = self.alphabet.len();
        if v.len() >= self.order {
            return self.row(&v[v.len() - self.order..])[a.index()];
        }
        let idx = context_index(v, n);
        self.lower[v.len()][idx * n + a.index()]
    }

    fn threshold_tail_bound(&self, w: &[Symbol], k_max: usize) -> Option<f64> {
        // alpha^w_k = 1 once the context w·c covers the order
        (k_max + w.len() >= self.order).then_some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_minimises_over_completions() {
        let k = MarkovKernel::binary_order_one(0.4, 0.6).unwrap();
        assert!((k.lower_bound(Symbol(1), &[]) - 0.4).abs() < 1e-15);
        assert!((k.lower_bound(Symbol(1), &[Symbol(1)]) - 0.6).abs() < 1e-15);
        assert!((k.lower_bound(Symbol(0), &[Symbol(0), Symbol(1)]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn constant_kernel_has_no_memory() {
        let k = MarkovKernel::constant(vec![0.3, 0.7]).unwrap();
        assert_eq!(k.order(), 0);
        assert_eq!(k.lower_bound(Symbol(0), &[]), 0.3);
        assert_eq!(k.lower_bound(Symbol(1), &[Symbol(0), Symbol(0)]), 0.7);
    }

    #[test]
    fn order_two_lower_tables_match_brute_force() {
        let a = Alphabet::numbered(3).unwrap();
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|i| {
                let x = 0.1 + 0.05 * i as f64;
                vec![x, 0.5 - x / 2.0, 0.5 - x / 2.0]
            })
            .collect();
        let k = MarkovKernel::new(a, 2, rows.clone()).unwrap();
        for last in 0..3u8 {
            for sym in 0..3 {
                let brute = (0..3)
                    .map(|old| rows[old * 3 + last as usize][sym])
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(k.lower_bound(Symbol(sym as u8), &[Symbol(last)]), brute);
            }
        }
        for sym in 0..3 {
            let brute = rows.iter().map(|r| r[sym]).fold(f64::INFINITY, f64::min);
            assert_eq!(k.lower_bound(Symbol(sym as u8), &[]), brute);
        }
    }

    #[test]
    fn malformed_rows_rejected() {
        let a = Alphabet::numbered(2).unwrap();
        assert_eq!(
            MarkovKernel::new(a.clone(), 0, vec![vec![0.3, 0.6]]).unwrap_err().code(),
            "MALFORMED_TABLE"
        );
        assert!(MarkovKernel::new(a.clone(), 1, vec![vec![0.5, 0.5]]).is_err());
        assert!(MarkovKernel::new(a, 0, vec![vec![-0.5, 1.5]]).is_err());
    }
}
