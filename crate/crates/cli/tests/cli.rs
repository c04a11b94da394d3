use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const MARKOV: &str = r#"
[kernel]
family = "markov"
order = 1
rows = [[0.6, 0.4], [0.4, 0.6]]

[run]
w = ["2"]
window = [0, 20]
seed = 5
replicas = 3
k_max = 4

[validate]
length = 20000
states = 200
"#;

fn perfsim(dir: &Path, text: &str, args: &[&str]) -> Output {
    let config = dir.join("c.toml");
    fs::write(&config, text).unwrap();
    Command::new(env!("CARGO_BIN_EXE_perfsim"))
        .args(args)
        .args(["--config", config.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .output()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn decompose_markov_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = perfsim(dir.path(), MARKOV, &["decompose"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("out/decomposition.csv"));
    assert_eq!(rows[0][0], "-1");
    assert!((rows[0][3].parse::<f64>().unwrap() - 0.8).abs() < 1e-12);
    assert!((rows[1][3].parse::<f64>().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn every_file_starts_with_the_config_header() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["decompose", "sample", "diagnose"] {
        assert!(perfsim(dir.path(), MARKOV, &[cmd, "--replicas", "20"]).status.success());
    }
    let mut seen = 0;
    for entry in fs::read_dir(dir.path().join("out")).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("# config_sha256=") && first.ends_with(" seed=5"), "{first}");
        seen += 1;
    }
    assert_eq!(seen, 8);
}

#[test]
fn sample_rows_cover_the_window() {
    let dir = tempfile::tempdir().unwrap();
    assert!(perfsim(dir.path(), MARKOV, &["sample"]).status.success());
    let samples = data_rows(&dir.path().join("out/samples.csv"));
    assert_eq!(samples.len(), 3 * 21);
    assert!(samples.iter().all(|r| r[2] == "1" || r[2] == "2"));
    let runs = data_rows(&dir.path().join("out/runs.csv"));
    for r in runs {
        assert!(r[3].parse::<i64>().unwrap() <= 0);
    }
}

#[test]
fn validate_passes_on_markov() {
    let dir = tempfile::tempdir().unwrap();
    let out = perfsim(dir.path(), MARKOV, &["validate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = data_rows(&dir.path().join("out/validate.csv"));
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = MARKOV.replace("family = \"markov\"\n", "");
    let out = perfsim(dir.path(), &missing, &["sample"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("family"));

    let budget = MARKOV.replace("k_max = 4", "k_max = 4\nstep_budget = 0").replace("[0, 20]", "[0, 400]");
    assert_eq!(perfsim(dir.path(), &budget, &["sample", "--seed", "3"]).status.code(), Some(4));

    // no p-value clears a level this strict
    let bad = MARKOV.replace("[validate]", "[validate]\ndepth = 0\nmin_visits = 10\nlevel = 0.9999");
    assert_eq!(perfsim(dir.path(), &bad, &["validate"]).status.code(), Some(3));
}
