use std::path::Path;
use std::time::Instant;

use perfsim::auxchains::{
    first_return_law, rescaled_lower_bound, rescaled_window_end, theta_bar, theta_prime,
    yo_replica, yo_table, YoSample,
};
use perfsim::cftp::{algorithm1, regeneration_split, CftpRun};
use perfsim::decomposition::{build_triplet, decomposition_table, verify_proposition};
use perfsim::validation::stats::Z_99;
use perfsim::validation::{block_iid_test, compatibility_test};
use perfsim::UniformStream;
use rayon::prelude::*;

use crate::checks::{all_contexts, exact_sampling_chi_square, mixture_excess, random_pasts, update_law_excess};
use crate::config::Resolved;
use crate::output::{opt, CsvFile};
use crate::CliError;

/// Contexts scanned by the exhaustive mixture check.
const MAX_CONTEXTS: usize = 60_000;

/// Fewest replicas accepted by the tail-bound check.
pub const MIN_YO_REPLICAS: usize = 1000;

fn seed(r: &Resolved) -> u64 {
    r.config.run.seed
}

fn csv(r: &Resolved, out: &Path, name: &str, columns: &[&str]) -> Result<CsvFile, CliError> {
    CsvFile::create(out, name, &r.hash(), seed(r), columns)
}

pub fn decompose(r: &Resolved, out: &Path) -> Result<Vec<String>, CliError> {
    let kernel = r.kernel.as_ref();
    let depth = r.config.decompose.cff_depth;
    let triplet = build_triplet(kernel, &r.w, r.config.run.k_max)?;
    let rows = decomposition_table(kernel, &triplet, depth)?;
    let mut f = csv(r, out, "decomposition.csv", &["k", "cff_alpha", "alpha_w", "lambda", "beta"])?;
    for row in &rows {
        f.row(&[&row.k, &opt(row.cff_alpha), &row.alpha_w, &row.lambda, &opt(row.beta)])?;
    }
    f.finish()?;

    let prop = verify_proposition(kernel, &r.w, depth)?;
    let mut f = csv(
        r,
        out,
        "proposition.csv",
        &["k", "cff_alpha", "cff_alpha_containing_w", "cff_alpha_avoiding_w", "alpha_w"],
    )?;
    for row in &prop.rows {
        f.row(&[&row.k, &row.cff, &opt(row.containing_w), &opt(row.avoiding_w), &row.alpha_w])?;
    }
    f.finish()?;

    let mut lines = vec![
        format!("lambda_-1 = {}", triplet.lambda(-1)),
        format!("alpha^w_{} = {}", triplet.k_max(), triplet.thresholds.get(triplet.k_max() as i64)),
        format!("residual mass 1 - alpha^w_K = {}", triplet.tail_mass()),
        format!(
            "sum_k (1 - alpha^w_k) up to K = {}, tail bound {:?}",
            triplet.thresholds.partial_gap_sum(),
            triplet.thresholds.tail_sum_bound
        ),
    ];
    lines.push(if prop.holds() {
        "threshold inequalities hold".into()
    } else {
        format!("threshold inequalities violated: {}", prop.violations.join("; "))
    });
    Ok(lines)
}

fn run_replicas(r: &Resolved) -> Result<Vec<(CftpRun, f64)>, CliError> {
    let (m, n) = r.window();
    let opts = r.options();
    (0..r.config.run.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let mut s = UniformStream::with_stream(seed(r), i);
            let run = algorithm1(&r.ctx, &mut s, m, n, opts)?;
            Ok((run, start.elapsed().as_secs_f64()))
        })
        .collect()
}

pub fn sample(r: &Resolved, out: &Path) -> Result<Vec<String>, CliError> {
    let runs = run_replicas(r)?;
    let alphabet = r.kernel.alphabet();
    let mut samples = csv(r, out, "samples.csv", &["replica", "time", "symbol"])?;
    let mut meta = csv(
        r,
        out,
        "runs.csv",
        &["replica", "m", "n", "theta", "uniforms_drawn", "backward_steps", "cut_times"],
    )?;
    let mut timing = csv(r, out, "timing.csv", &["replica", "wall_time_s"])?;
    let mut deepest = 0;
    for (i, (run, secs)) in runs.iter().enumerate() {
        for (t, &x) in (run.m..).zip(run.window()) {
            samples.row(&[&i, &t, &alphabet.label(x)])?;
        }
        let cuts = regeneration_split(run).times.len();
        meta.row(&[&i, &run.m, &run.n, &run.theta, &run.uniforms_drawn, &run.backward_steps, &cuts])?;
        timing.row(&[&i, secs])?;
        deepest = deepest.max(run.m - run.theta);
    }
    samples.finish()?;
    meta.finish()?;
    timing.finish()?;
    Ok(vec![format!(
        "{} replicas of [{}, {}]; deepest regeneration {} steps before m",
        runs.len(),
        r.window().0,
        r.window().1,
        deepest
    )])
}

/// Ordering triple on one shared stream: `theta`, `theta'` and the
/// rescaled bound `(theta_bar - 1)|w| + 1`.
fn ordering(r: &Resolved, i: u64, n: i64) -> Result<(i64, i64), CliError> {
    let budget = r.config.run.step_budget;
    let w_len = r.w.len();
    let tp = theta_prime(&r.ctx, &mut UniformStream::with_stream(seed(r), i), 0, n, budget)?;
    let nb = rescaled_window_end(n, w_len);
    let tb = theta_bar(&r.ctx, &mut UniformStream::with_stream(seed(r), i), nb, budget)?;
    Ok((tp, rescaled_lower_bound(tb, w_len)))
}

pub struct Diagnosis {
    pub samples: Vec<YoSample>,
    pub ordering: Vec<(i64, i64, i64)>,
}

impl Diagnosis {
    pub fn ordering_violations(&self) -> usize {
        self.ordering
            .iter()
            .filter(|&&(t, tp, lb)| !(lb <= tp && tp <= t))
            .count()
    }

    /// `sum_l #{theta < -l}` and `sum (-theta)`.
    pub fn tail_sums(&self) -> (u64, u64) {
        let deepest = self.samples.iter().map(|s| -s.theta).max().unwrap_or(0);
        let tail = (0..=deepest)
            .map(|l| self.samples.iter().filter(|s| s.theta < -l).count() as u64)
            .sum();
        let direct = self.samples.iter().map(|s| (-s.theta) as u64).sum();
        (tail, direct)
    }
}

pub fn run_diagnosis(r: &Resolved, replicas: usize, n: i64, l_max: usize) -> Result<Diagnosis, CliError> {
    let w_len = r.w.len();
    let horizon = (l_max / w_len + rescaled_window_end(n, w_len) as usize + 1)
        .max(r.config.diagnose.first_return_horizon);
    let opts = r.options();
    let rows: Vec<(YoSample, (i64, i64, i64))> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = UniformStream::with_stream(seed(r), i);
            let sample = yo_replica(&r.ctx, &mut s, n, horizon, opts)?;
            let (tp, lb) = ordering(r, i, n)?;
            let t = sample.theta;
            Ok((sample, (t, tp, lb)))
        })
        .collect::<Result<_, CliError>>()?;
    let (samples, ordering) = rows.into_iter().unzip();
    Ok(Diagnosis { samples, ordering })
}

pub fn diagnose(r: &Resolved, out: &Path) -> Result<Vec<String>, CliError> {
    let d = &r.config.diagnose;
    let diag = run_diagnosis(r, r.config.run.replicas, d.n, d.l_max)?;
    let table = yo_table(&diag.samples, d.n, r.w.len(), d.l_max, Z_99);
    let mut f = csv(
        r,
        out,
        "tail.csv",
        &["l", "theta_below", "p_theta", "p_theta_lo", "p_theta_hi", "bound", "bound_lo", "bound_hi", "consistent"],
    )?;
    for row in &table {
        f.row(&[
            &row.l,
            &row.theta_below,
            &row.p_theta,
            &row.p_theta_ci.0,
            &row.p_theta_ci.1,
            &row.bound,
            &row.bound_ci.0,
            &row.bound_ci.1,
            &row.consistent(),
        ])?;
    }
    f.finish()?;

    let law = first_return_law(&diag.samples, d.first_return_horizon);
    let mut f = csv(r, out, "first_return.csv", &["k", "f_k"])?;
    for (k, p) in law.iter().enumerate().skip(1) {
        f.row(&[&k, p])?;
    }
    f.finish()?;

    let mut f = csv(r, out, "ordering.csv", &["replica", "theta", "theta_prime", "theta_bar_bound"])?;
    for (i, (t, tp, lb)) in diag.ordering.iter().enumerate() {
        f.row(&[&i, t, tp, lb])?;
    }
    f.finish()?;

    let (tail, direct) = diag.tail_sums();
    let reps = diag.samples.len() as f64;
    Ok(vec![
        format!("tail bound consistent for {}/{} values of l", table.iter().filter(|r| r.consistent()).count(), table.len()),
        format!("ordering violations: {}", diag.ordering_violations()),
        format!("sum_l P(theta < -l) = {} and E[-theta] = {}", tail as f64 / reps, direct as f64 / reps),
        format!("sum_k f_k up to {} = {}", d.first_return_horizon, law.iter().sum::<f64>()),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

fn mixture_check(r: &Resolved) -> Result<Check, CliError> {
    let kernel = r.kernel.as_ref();
    let v = &r.config.validate;
    let triplet = build_triplet(kernel, &r.w, r.config.run.k_max)?;
    let n = kernel.alphabet().len();
    let (pasts, detail) = if r.markov.is_some() {
        let len = (1..=10).rev().find(|&l| n.pow(l as u32) * n <= MAX_CONTEXTS).unwrap_or(1);
        (all_contexts(kernel, len), format!("every context of length {len}"))
    } else {
        (random_pasts(kernel, None, v.states, 16, seed(r)), format!("{} random pasts", v.states))
    };
    let excess = mixture_excess(&triplet, kernel, &pasts);
    Ok(Check {
        name: "mixture_identity",
        value: excess.max(0.0),
        threshold: 1e-10,
        passed: excess <= 1e-10,
        detail,
    })
}

fn update_law_check(r: &Resolved) -> Check {
    let v = &r.config.validate;
    let pasts = random_pasts(r.kernel.as_ref(), Some(&r.w), v.states, 16, seed(r));
    let excess = update_law_excess(&r.ctx, &pasts);
    Check {
        name: "update_law",
        value: excess.max(0.0),
        threshold: 1e-10,
        passed: excess <= 1e-10,
        detail: format!("{} random pasts holding w", v.states),
    }
}

fn exact_sampling_check(r: &Resolved) -> Result<Option<Check>, CliError> {
    let Some(k) = &r.markov else { return Ok(None) };
    let v = &r.config.validate;
    let mut p = Vec::new();
    for s in 0..v.seeds as u64 {
        p.push(exact_sampling_chi_square(k, &r.ctx, v.length, seed(r).wrapping_add(s), r.options())?.p_value);
    }
    let passes = p.iter().filter(|&&x| x > v.level).count();
    let mut sorted = p.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(Some(Check {
        name: "exact_sampling",
        value: sorted[sorted.len() / 2],
        threshold: v.level,
        passed: 2 * passes > p.len(),
        detail: format!("pair chi-square p-values {p:?}"),
    }))
}

fn sample_checks(r: &Resolved) -> Result<Vec<Check>, CliError> {
    let v = &r.config.validate;
    let run = algorithm1(&r.ctx, &mut UniformStream::new(seed(r)), 1, v.length as i64, r.options())?;
    let compat = compatibility_test(run.window(), r.kernel.as_ref(), &r.w, v.depth, v.min_visits);
    let split = regeneration_split(&run);
    let blocks = match block_iid_test(&split, v.level) {
        Ok(b) => Check {
            name: "block_iid",
            value: b.min_p_value(),
            threshold: v.level / 3.0,
            passed: b.passes(),
            detail: format!(
                "{} blocks, mean length {:.4} ({:.4}, {:.4})",
                b.blocks, b.mean_length, b.mean_length_ci.0, b.mean_length_ci.1
            ),
        },
        Err(e) => Check {
            name: "block_iid",
            value: f64::NAN,
            threshold: v.level / 3.0,
            passed: false,
            detail: e.to_string(),
        },
    };
    Ok(vec![
        Check {
            name: "compatibility",
            value: compat.max_abs_z(),
            threshold: perfsim::validation::Z_FLAG,
            passed: compat.passes(),
            detail: format!("{} cells over {} contexts at depth {}", compat.cells.len(), compat.contexts_seen, v.depth),
        },
        blocks,
    ])
}

fn tail_checks(r: &Resolved) -> Result<Vec<Check>, CliError> {
    let v = &r.config.validate;
    let replicas = r.config.run.replicas.max(MIN_YO_REPLICAS);
    let diag = run_diagnosis(r, replicas, 0, v.l_max)?;
    let table = yo_table(&diag.samples, 0, r.w.len(), v.l_max, Z_99);
    let bad = table.iter().filter(|row| !row.consistent()).count();
    let (tail, direct) = diag.tail_sums();
    Ok(vec![
        Check {
            name: "tail_bound",
            value: bad as f64,
            threshold: 0.0,
            passed: bad == 0,
            detail: format!("{replicas} replicas, l = 1..{}", v.l_max),
        },
        Check {
            name: "tail_sum_identity",
            value: (tail as f64 - direct as f64).abs(),
            threshold: 0.0,
            passed: tail == direct,
            detail: format!("{tail} vs {direct}"),
        },
        Check {
            name: "ordering",
            value: diag.ordering_violations() as f64,
            threshold: 0.0,
            passed: diag.ordering_violations() == 0,
            detail: format!("{replicas} shared-stream runs"),
        },
    ])
}

pub fn run_checks(r: &Resolved) -> Result<Vec<Check>, CliError> {
    let mut checks = vec![mixture_check(r)?, update_law_check(r)];
    checks.extend(exact_sampling_check(r)?);
    checks.extend(sample_checks(r)?);
    checks.extend(tail_checks(r)?);
    Ok(checks)
}

pub fn validate(r: &Resolved, out: &Path) -> Result<Vec<String>, CliError> {
    let checks = run_checks(r)?;
    let mut f = csv(r, out, "validate.csv", &["check", "value", "threshold", "passed"])?;
    for c in &checks {
        f.row(&[&c.name, &c.value, &c.threshold, &c.passed])?;
    }
    f.finish()?;
    let lines: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.detail))
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        Err(CliError::Acceptance(failed.join(", ")))
    }
}
