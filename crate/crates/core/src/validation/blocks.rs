use crate::alphabet::Symbol;
use crate::cftp::RegenerationSplit;
use crate::error::{Error, Result};

use super::stats::{chi_square_independence, mean_ci, ChiSquare, Z_99};

pub const MIN_BLOCKS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockIidReport {
    pub blocks: usize,
    /// Lengths of consecutive blocks.
    pub length_dependence: ChiSquare,
    /// Last symbol of a block against the first symbol of the next.
    pub boundary_dependence: ChiSquare,
    /// First half against second half on (length class, first symbol).
    pub homogeneity: ChiSquare,
    pub mean_length: f64,
    pub mean_length_ci: (f64, f64),
    pub level: f64,
}

impl BlockIidReport {
    pub fn min_p_value(&self) -> f64 {
        self.length_dependence
            .p_value
            .min(self.boundary_dependence.p_value)
            .min(self.homogeneity.p_value)
    }

    /// Bonferroni over the three tests at the report's level.
    pub fn passes(&self) -> bool {
        self.min_p_value() > self.level / 3.0
    }
}

/// Length classes from the empirical quartiles.
fn length_classes(lengths: &[usize]) -> Vec<usize> {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let mut cuts: Vec<usize> = [1, 2, 3]
        .iter()
        .map(|q| sorted[q * (sorted.len() - 1) / 4])
        .collect();
    cuts.dedup();
    cuts
}

fn class_of(len: usize, cuts: &[usize]) -> usize {
    cuts.iter().filter(|&&c| len > c).count()
}

pub fn block_iid_test(split: &RegenerationSplit, level: f64) -> Result<BlockIidReport> {
    let blocks: Vec<&[Symbol]> = split.interior();
    if blocks.len() < MIN_BLOCKS {
        return Err(Error::TooFewBlocks {
            found: blocks.len(),
            required: MIN_BLOCKS,
        });
    }
    let lengths: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    let cuts = length_classes(&lengths);
    let classes = cuts.len() + 1;
    let alphabet = blocks
        .iter()
        .flat_map(|b| b.iter())
        .map(|s| s.index() + 1)
        .max()
        .unwrap_or(1);

    let mut len_table = vec![vec![0u64; classes]; classes];
    let mut edge_table = vec![vec![0u64; alphabet]; alphabet];
    for pair in blocks.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        len_table[class_of(a.len(), &cuts)][class_of(b.len(), &cuts)] += 1;
        edge_table[a[a.len() - 1].index()][b[0].index()] += 1;
    }

    let half = blocks.len() / 2;
    let mut halves = vec![vec![0u64; classes * alphabet]; 2];
    for (i, b) in blocks.iter().enumerate() {
        let h = usize::from(i >= half);
        halves[h][class_of(b.len(), &cuts) * alphabet + b[0].index()] += 1;
    }

    let as_f64: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let (mean, hw) = mean_ci(&as_f64, Z_99);
    Ok(BlockIidReport {
        blocks: blocks.len(),
        length_dependence: chi_square_independence(&len_table),
        boundary_dependence: chi_square_independence(&edge_table),
        homogeneity: chi_square_independence(&halves),
        mean_length: mean,
        mean_length_ci: (mean - hw, mean + hw),
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{UniformSource, UniformStream};

    fn split_of(sample: &[Symbol], stride: usize) -> RegenerationSplit {
        let times: Vec<i64> = (0..=sample.len() / stride).map(|i| (i * stride) as i64).collect();
        let blocks = times
            .windows(2)
            .map(|t| sample[t[0] as usize..t[1] as usize].to_vec())
            .collect();
        RegenerationSplit {
            m: -1,
            times,
            blocks,
            tail: Vec::new(),
        }
    }

    #[test]
    fn too_few_blocks() {
        let s = vec![Symbol(0); 100];
        assert_eq!(
            block_iid_test(&split_of(&s, 1), 0.01).unwrap_err().code(),
            "TOO_FEW_BLOCKS"
        );
    }

    #[test]
    fn fixed_stride_cuts_of_a_sticky_chain_fail() {
        let mut u = UniformStream::new(8);
        let mut x = 0u8;
        let s: Vec<Symbol> = (0..6000)
            .map(|i| {
                if u.uniform(i) < 0.1 {
                    x = 1 - x;
                }
                Symbol(x)
            })
            .collect();
        let r = block_iid_test(&split_of(&s, 3), 0.01).unwrap();
        assert!(!r.passes());
        assert!(r.boundary_dependence.p_value < 1e-6);
        assert_eq!(r.mean_length, 3.0);
    }

    #[test]
    fn quartile_classes() {
        let cuts = length_classes(&[1, 1, 1, 2, 2, 3, 5, 8, 13]);
        assert_eq!(cuts, vec![1, 2, 5]);
        assert_eq!(class_of(1, &cuts), 0);
        assert_eq!(class_of(4, &cuts), 2);
        assert_eq!(class_of(9, &cuts), 3);
    }
}
