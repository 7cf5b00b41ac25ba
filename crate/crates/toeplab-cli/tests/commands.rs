use std::process::Command;

use toeplab::config::Config;
use toeplab::Error;
use toeplab_cli::*;

fn cfg(text: &str) -> Config {
    text.parse().unwrap()
}

const SYM: &str = "flavor = \"real_symmetric\"\nsigma_x2 = 1.0\nsamples = 4096\nqmc_replicates = 4\n";

fn limit_value(text: &str) -> (f64, f64) {
    let out = cmd_limit(&cfg(text)).unwrap();
    let json: serde_json::Value = serde_json::from_str(out.artifact("limit.json").unwrap()).unwrap();
    let v = &json["result"]["value"];
    (v[0].as_f64().unwrap(), json["result"]["se"].as_f64().unwrap())
}

#[test]
fn trace_check_defaults_and_caps() {
    let out = cmd_trace_check(&cfg("cases = 20")).unwrap();
    assert!(out.passed, "{}", out.summary);
    let csv = out.artifact("trace_check.csv").unwrap();
    assert_eq!(csv.lines().count(), 2 + 60);
    assert!(csv.starts_with("# toeplab "));

    let err = cmd_trace_check(&cfg("n_max = 20")).unwrap_err();
    assert!(matches!(err, Error::Config(ref m) if m.contains("n <= 16")), "{err}");
    assert!(cmd_trace_check(&cfg("families = [\"circulant\"]")).is_err());
    let one = cmd_trace_check(&cfg("families = \"generalized\"\ncases = 5")).unwrap();
    assert!(one.artifact("trace_check.csv").unwrap().lines().skip(2).all(|l| l.contains(",generalized,")));
}

#[test]
fn limit_routes_by_alphabet() {
    let (v, se) = limit_value(&format!("{SYM}word = \"T1.T1*\""));
    assert!((v - 1.0).abs() <= 3.0 * se + 1e-3);
    assert_eq!(limit_value(&format!("{SYM}word = \"P.T1\"")).0, 0.0);
    assert_eq!(limit_value(&format!("{SYM}word = \"T1.T2*\"")).0, 0.0);
    let d = "symbol.family = \"geometric\"\nsymbol.ratio = 0.5\nword = \"D.D\"";
    assert!((limit_value(d).0 - 5.0 / 3.0).abs() < 1e-12);

    assert!(matches!(cmd_limit(&cfg(&format!("{SYM}word = \"T.Q\""))), Err(Error::Parse(_))));
    assert!(matches!(cmd_limit(&cfg(&format!("{SYM}word = \"T.Tg\""))), Err(Error::MixedModels)));
    assert!(matches!(cmd_limit(&cfg("word = \"T.T*\"")), Err(Error::Config(_))));
}

#[test]
fn converge_odd_word_has_zero_limit() {
    let out = cmd_converge(&cfg(&format!("{SYM}word = \"T.T.T\"\nn = [32, 128]\nreps = 30\nseed = 3"))).unwrap();
    let csv = out.artifact("converge.csv").unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[5] == "0" && r[6] == "0"));
    let gap: Vec<f64> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(gap[1] < 0.2);
}

#[test]
fn universality_columns() {
    let text = format!("{SYM}word = \"T.T\"\nn = [64]\nreps = 50\nbase_alt = \"rademacher\"");
    let out = cmd_converge(&cfg(&text)).unwrap();
    let csv = out.artifact("converge.csv").unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("law_gap,combined_se,within_3se"));
    assert!(out.passed, "{csv}");
}

#[test]
fn deterministic_polynomial_has_no_fluctuation() {
    let text = "symbol.family = \"geometric\"\nsymbol.ratio = 0.5\npolynomial = \"D\"\nn = [16, 32]\nreps = 10";
    let out = cmd_concentration(&cfg(text)).unwrap();
    let csv = out.artifact("concentration.csv").unwrap();
    assert!(csv.lines().skip(2).all(|l| l.split(',').nth(3) == Some("0")));
}

#[test]
fn esd_writes_three_files() {
    let text = "flavor = \"hermitian\"\npolynomial = \"T\"\nn = 48\nreps = 2\nmax_moment = 4\nsamples = 4096\nqmc_replicates = 4";
    let out = cmd_esd(&cfg(text)).unwrap();
    let names: Vec<&str> = out.artifacts.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["esd_eigenvalues.csv", "esd_histogram.csv", "esd_moments.json"]);
    assert_eq!(out.artifact("esd_eigenvalues.csv").unwrap().lines().count(), 2 + 96);
    assert!(matches!(cmd_esd(&cfg("flavor = \"pair\"\npolynomial = \"T.P\"")), Err(Error::NotSelfAdjoint)));
}

#[test]
fn binary_writes_files_and_exit_codes() {
    let dir = std::env::temp_dir().join(format!("toeplab-cli-test-{}", std::process::id()));
    let spec = dir.with_extension("toml");
    std::fs::write(&spec, SYM).unwrap();
    let bin = env!("CARGO_BIN_EXE_toeplab");
    let status = Command::new(bin)
        .args(["converge", "--word", "T.T*", "--n", "16,32", "--reps", "5", "--seed", "9", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&dir)
        .env("TOEPLAB_WORKERS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("converge.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with("seed=9"));

    let bad = Command::new(bin).args(["trace-check", "--set", "n_max=20"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("configuration error"));
    let bad = Command::new(bin).args(["limit", "--set", "nonsense=1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_file(&spec);
}
