use std::path::Path;
use std::sync::Arc;

use perfsim::cftp::{CftpOptions, DEFAULT_STEP_BUDGET};
use perfsim::{Alphabet, Kernel, MarkovKernel, RenewalKernel, SeqRule, Symbol, UpdateContext};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub decompose: DecomposeConfig,
    #[serde(default)]
    pub diagnose: DiagnoseConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Markov {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<String>>,
        order: usize,
        /// One row per context of length `order`, oldest symbol most significant.
        rows: Vec<Vec<f64>>,
    },
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<String>>,
        q: Vec<f64>,
    },
    Renewal {
        r: SeqConfig,
        delta: SeqConfig,
        q: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SeqConfig {
    Constant(f64),
    Periodic(Vec<f64>),
    Geometric { first: f64, limit: f64, ratio: f64 },
    Table { head: Vec<f64>, tail: f64 },
}

impl From<&SeqConfig> for SeqRule {
    fn from(s: &SeqConfig) -> Self {
        match s {
            SeqConfig::Constant(c) => SeqRule::Constant(*c),
            SeqConfig::Periodic(v) => SeqRule::Periodic(v.clone()),
            SeqConfig::Geometric {
                first,
                limit,
                ratio,
            } => SeqRule::Geometric {
                first: *first,
                limit: *limit,
                ratio: *ratio,
            },
            SeqConfig::Table { head, tail } => SeqRule::Table {
                head: head.clone(),
                tail: *tail,
            },
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_one() -> usize {
    1
}
fn default_k_max() -> usize {
    40
}
fn default_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}
fn default_out() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Reference string as symbol labels, oldest first.
    pub w: Vec<String>,
    /// Window `[m, n]`; exclusive with `length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    /// Sample `X_1..X_length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_one")]
    pub replicas: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_budget")]
    pub step_budget: u64,
    #[serde(default)]
    pub conservative: bool,
    #[serde(default = "default_out")]
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeConfig {
    /// Deepest `k` for the enumerated columns (`A^k` is scanned).
    pub cff_depth: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig { cff_depth: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Right end of the window `[0, n]`.
    pub n: i64,
    pub l_max: usize,
    pub first_return_horizon: usize,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            n: 0,
            l_max: 30,
            first_return_horizon: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub length: usize,
    pub depth: usize,
    pub min_visits: u64,
    pub level: f64,
    pub seeds: usize,
    /// Random pasts for the mixture and update-law checks.
    pub states: usize,
    pub l_max: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            length: 100_000,
            depth: 6,
            min_visits: 50,
            level: 0.01,
            seeds: 3,
            states: 1000,
            l_max: 30,
        }
    }
}

/// A parsed config together with the objects it describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: Config,
    pub kernel: Arc<dyn Kernel>,
    /// Present for the finite-order families.
    pub markov: Option<MarkovKernel>,
    pub w: Vec<Symbol>,
    pub ctx: Arc<UpdateContext>,
}

impl Resolved {
    pub fn options(&self) -> CftpOptions {
        CftpOptions {
            step_budget: self.config.run.step_budget,
            conservative: self.config.run.conservative,
        }
    }

    /// Window to sample, `[1, length]` when a length is given.
    pub fn window(&self) -> (i64, i64) {
        match (self.config.run.window, self.config.run.length) {
            (Some([m, n]), _) => (m, n),
            (None, Some(len)) => (1, len as i64),
            (None, None) => (0, 0),
        }
    }

    /// SHA-256 of the resolved config with the output location removed.
    pub fn hash(&self) -> String {
        let mut c = self.config.clone();
        c.run.out = String::new();
        let json = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn field_error(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}

fn alphabet_for(labels: &Option<Vec<String>>, size: usize) -> Result<Alphabet, CliError> {
    let a = match labels {
        Some(l) => Alphabet::new(l.iter().cloned()),
        None => Alphabet::numbered(size),
    }
    .map_err(|e| field_error("kernel.alphabet", e))?;
    if a.len() != size {
        return Err(field_error(
            "kernel.alphabet",
            format!("{} labels for rows of width {size}", a.len()),
        ));
    }
    Ok(a)
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn resolve(config: Config) -> Result<Resolved, CliError> {
    let (kernel, markov): (Arc<dyn Kernel>, Option<MarkovKernel>) = match &config.kernel {
        KernelConfig::Markov {
            alphabet,
            order,
            rows,
        } => {
            let width = rows.first().map_or(0, Vec::len);
            let k = MarkovKernel::new(alphabet_for(alphabet, width)?, *order, rows.clone())
                .map_err(|e| field_error("kernel.rows", e))?;
            (Arc::new(k.clone()), Some(k))
        }
        KernelConfig::Constant { alphabet, q } => {
            let a = alphabet_for(alphabet, q.len())?;
            let k = MarkovKernel::new(a, 0, vec![q.clone()])
                .map_err(|e| field_error("kernel.q", e))?;
            (Arc::new(k.clone()), Some(k))
        }
        KernelConfig::Renewal { r, delta, q } => {
            let k = RenewalKernel::new(r.into(), delta.into(), *q)
                .map_err(|e| field_error("kernel", e))?;
            (Arc::new(k), None)
        }
    };
    let run = &config.run;
    if run.window.is_some() && run.length.is_some() {
        return Err(field_error("run", "set either window or length, not both"));
    }
    if let Some([m, n]) = run.window {
        if m > n {
            return Err(field_error("run.window", format!("[{m}, {n}] is empty")));
        }
    }
    if run.length == Some(0) {
        return Err(field_error("run.length", "must be at least 1"));
    }
    if run.replicas == 0 {
        return Err(field_error("run.replicas", "must be at least 1"));
    }
    let w = kernel
        .alphabet()
        .parse_string(&run.w)
        .map_err(|e| field_error("run.w", e))?
        .into_vec();
    let ctx = UpdateContext::new(kernel.clone(), &w, run.k_max)
        .map_err(|e| field_error("run.w", e))?;
    Ok(Resolved {
        config,
        kernel,
        markov,
        w,
        ctx: Arc::new(ctx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARKOV: &str = r#"
[kernel]
family = "markov"
order = 1
rows = [[0.6, 0.4], [0.4, 0.6]]

[run]
w = ["2"]
window = [0, 9]
seed = 7
"#;

    #[test]
    fn markov_round_trip() {
        let r = resolve(parse(MARKOV).unwrap()).unwrap();
        assert_eq!(r.w, vec![Symbol(1)]);
        assert_eq!(r.window(), (0, 9));
        assert_eq!(r.config.run.k_max, 40);
        assert!((r.ctx.alpha_minus_one() - 0.8).abs() < 1e-15);
        assert_eq!(r.hash().len(), 64);
    }

    #[test]
    fn hash_ignores_out_only() {
        let a = resolve(parse(MARKOV).unwrap()).unwrap();
        let mut c = parse(MARKOV).unwrap();
        c.run.out = "elsewhere".into();
        assert_eq!(resolve(c.clone()).unwrap().hash(), a.hash());
        c.run.seed = 8;
        assert_ne!(resolve(c).unwrap().hash(), a.hash());
    }

    #[test]
    fn missing_family_is_named() {
        let e = parse("[kernel]\norder = 1\n[run]\nw = [\"1\"]\n").unwrap_err();
        assert!(e.to_string().contains("family"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_field_rejected_with_line() {
        let text = MARKOV.replace("seed = 7", "sed = 7");
        let e = parse(&text).unwrap_err().to_string();
        assert!(e.contains("sed") && e.contains("line"), "{e}");
    }

    #[test]
    fn renewal_rules() {
        let text = r#"
[kernel]
family = "renewal"
r = { periodic = [0.3, 0.4] }
delta = { constant = 0.2 }
q = 0.8

[run]
w = ["2"]
length = 1000
"#;
        let r = resolve(parse(text).unwrap()).unwrap();
        assert_eq!(r.window(), (1, 1000));
        assert!(r.markov.is_none());
        assert!((r.ctx.thresholds().get(3) - (1.0 - 0.2 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn non_spontaneous_w_is_a_config_error() {
        let text = MARKOV.replace("[[0.6, 0.4], [0.4, 0.6]]", "[[1.0, 0.0], [0.4, 0.6]]");
        let e = resolve(parse(&text).unwrap()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("run.w"));
    }
}
