use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Normal quantiles used by the tests.
pub const Z_95: f64 = 1.959_963_984_540_054;
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Sample mean and the half-width `z * sd / sqrt(n)`.
pub fn mean_ci(xs: &[f64], z: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, z * (var / n).sqrt())
}

/// Upper tail `P(X >= stat)` of a chi-square law.
pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (1.0 - d.cdf(stat)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Goodness of fit of `observed` counts against `expected` probabilities.
/// Cells with expected count below `min_expected` are pooled into one.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquare {
    assert_eq!(observed.len(), expected.len());
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * n;
        if e < min_expected {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    } else if pooled.0 > 0.0 {
        // mass where none is expected
        return ChiSquare {
            statistic: f64::INFINITY,
            df: cells.len(),
            p_value: 0.0,
        };
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = cells.len().saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    }
}

/// Pearson independence test on a contingency table; empty rows and
/// columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquare {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncols = table.first().map_or(0, Vec::len);
    let col_tot: Vec<u64> = (0..ncols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let cols: Vec<usize> = (0..ncols).filter(|&c| col_tot[c] > 0).collect();
    let total: f64 = col_tot.iter().sum::<u64>() as f64;
    let mut statistic = 0.0;
    for r in &rows {
        let rt: f64 = r.iter().sum::<u64>() as f64;
        for &c in &cols {
            let e = rt * col_tot[c] as f64 / total;
            statistic += (r[c] as f64 - e).powi(2) / e;
        }
    }
    let df = rows.len().saturating_sub(1) * cols.len().saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson_interval(30, 100, Z_95);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 50, Z_99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.15);
    }

    #[test]
    fn chi_square_tail() {
        // 95th percentile of chi-square(1) is 3.841
        assert!((chi_square_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
        assert!((chi_square_sf(9.487_729_036_781_154, 4) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn gof_and_independence() {
        let g = chi_square_gof(&[50, 50], &[0.5, 0.5], 5.0);
        assert_eq!(g.statistic, 0.0);
        assert_eq!(g.p_value, 1.0);
        let g = chi_square_gof(&[90, 10], &[0.5, 0.5], 5.0);
        assert!(g.p_value < 1e-10);
        let t = chi_square_independence(&[vec![25, 25], vec![25, 25]]);
        assert_eq!(t.df, 1);
        assert!(t.statistic.abs() < 1e-12);
        let t = chi_square_independence(&[vec![50, 0], vec![0, 50]]);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn mean_interval() {
        let (m, h) = mean_ci(&[1.0, 2.0, 3.0, 4.0], Z_95);
        assert_eq!(m, 2.5);
        assert!((h - Z_95 * (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }
}
