use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn trawl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trawl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const POISSON_CONFIG: &str = r#"{
  "model": {"seed": {"seed": "poisson"}, "sequence": {"kind": "power", "c": 10.0, "alpha": 1.5}},
  "n": 5000,
  "rng_seed": 7
}"#;

fn simulate_to(dir: &TempDir, config: &str, name: &str, extra: &[&str]) -> PathBuf {
    let cfg = write(dir, &format!("{name}.json"), config);
    let out = dir.path().join(format!("{name}.csv"));
    let mut args = vec!["simulate", "--config", s(&cfg), "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = trawl(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn fit_json(input: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["fit", "--input", s(input)];
    args.extend_from_slice(extra);
    let o = trawl(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(simulate_to(&dir, POISSON_CONFIG, "a", &[])).unwrap();
    let b = fs::read(simulate_to(&dir, POISSON_CONFIG, "b", &[])).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x"));
    assert_eq!(lines.count(), 5000);

    let c = fs::read(simulate_to(&dir, POISSON_CONFIG, "c", &["--seed", "8"])).unwrap();
    assert_ne!(b, c);
}

#[test]
fn simulate_emits_acf_table() {
    let dir = TempDir::new().unwrap();
    let out = simulate_to(&dir, POISSON_CONFIG, "acf", &["--emit-acf", "20"]);
    let text = fs::read_to_string(out).unwrap();
    let (series, acf) = text.split_once("\n\n").expect("blank separator");
    assert_eq!(series.lines().count(), 5001);
    let mut rows = acf.lines();
    assert_eq!(rows.next(), Some("lag,theoretical,empirical"));
    let rows: Vec<Vec<f64>> = rows
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], k as f64);
        assert!(row[1] > 0.0 && row[2].is_finite());
    }
    // r(0) = 10 ζ(1.5).
    assert!((rows[0][1] - 26.12375).abs() < 1e-4);
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", r#"{"model": {"seed": {"seed": "poisson"}}, "n": 10"#);
    assert_eq!(trawl(&["simulate", "--config", s(&cfg)]).status.code(), Some(2));
    let cfg = write(&dir, "unknown.json", r#"{"model": {"seed": {"seed": "poisson"}, "sequence": {"kind": "power", "c": 1.0, "alpha": 1.5}}, "n": 10, "rng_seed": 1, "bogus": 1}"#);
    assert_eq!(trawl(&["simulate", "--config", s(&cfg)]).status.code(), Some(2));
    assert_eq!(trawl(&["simulate", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn unreachable_truncation_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "heavy.json",
        r#"{"model": {"seed": {"seed": "random_line", "variance": 1.0}, "sequence": {"kind": "power", "c": 1.0, "alpha": 1.01}},
            "n": 100, "rng_seed": 1, "truncation_tol": 1e-12}"#,
    );
    let o = trawl(&["simulate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn constant_series_exits_4() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "flat.csv", &"3.5\n".repeat(100));
    for est in ["whittle", "local-whittle", "kernel"] {
        let o = trawl(&["fit", "--input", s(&input), "--estimator", est]);
        assert_eq!(o.status.code(), Some(4), "{est}");
    }
}

#[test]
fn short_series_rejected() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "short.csv", "1\n2\n3\n");
    assert_eq!(trawl(&["fit", "--input", s(&input)]).status.code(), Some(2));
}

#[test]
fn white_noise_fits() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"model": {"seed": {"seed": "random_line", "variance": 1.0}, "sequence": {"kind": "explicit", "values": [1.0]}},
                     "n": 4096, "rng_seed": 3}"#;
    let input = simulate_to(&dir, config, "wn", &[]);

    let lw = fit_json(&input, &["--estimator", "local-whittle", "--m", "200"]);
    assert_eq!(lw["m"], 200);
    let alpha = lw["alpha_lw"].as_f64().unwrap();
    assert!((1.8..=2.0).contains(&alpha), "{alpha}");

    let k = fit_json(&input, &["--estimator", "kernel", "--lambda0", "1.5708", "--bandwidth", "0.2"]);
    let f = k["f_hat"].as_f64().unwrap();
    assert!(f > 0.0 && (f - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 0.05, "{f}");

    let pw = fit_json(&input, &["--estimator", "whittle", "--degree", "1"]);
    for key in ["d_hat", "alpha_hat", "c_hat", "h_coeffs", "contrast", "converged"] {
        assert!(pw.get(key).is_some(), "missing {key}");
    }
    assert_eq!(pw["h_coeffs"].as_array().unwrap().len(), 2);
}

#[test]
fn whittle_recovers_arfima_memory() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"model": {"seed": {"seed": "poisson"}, "sequence": {"kind": "arfima_matched", "c": 50.0, "d": 0.25}},
                     "n": 5000, "rng_seed": 11}"#;
    let input = simulate_to(&dir, config, "arfima", &[]);
    let out = dir.path().join("fit.json");
    let o = trawl(&["fit", "--input", s(&input), "--degree", "0", "--out", s(&out)]);
    assert!(o.status.success());
    let fit: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let d = fit["d_hat"].as_f64().unwrap();
    assert!((d - 0.25).abs() < 0.08, "{d}");
}

#[test]
fn experiment_smoke() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "exp.json",
        r#"{"alpha_grid": [1.3, 1.7], "n": 1000, "replications": 4, "m_grid": [20, 50], "degree_grid": [2, 3]}"#,
    );
    let csv = dir.path().join("out.csv");
    let o = trawl(&["--threads", "2", "experiment", "--config", s(&cfg), "--out", s(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    // Two families, two exponents, four tunings.
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 4);

    let json = dir.path().join("out.json");
    let o = trawl(&["experiment", "--config", s(&cfg), "--out", s(&json), "--format", "json"]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 16);
    assert_eq!(report["config"]["replications"], 4);
    assert_eq!(report["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    for cell in report["cells"].as_array().unwrap() {
        assert!(cell["sd"].as_f64().unwrap() >= 0.0);
        assert_eq!(cell["reps"], 4);
    }

    // Same seed, same statistics.
    let again = dir.path().join("again.csv");
    assert!(trawl(&["experiment", "--config", s(&cfg), "--out", s(&again)]).status.success());
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn experiment_rejects_unknown_fields() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "exp.json", r#"{"replications": 1}"#);
    assert_eq!(trawl(&["experiment", "--config", s(&cfg)]).status.code(), Some(2));
    let cfg = write(&dir, "exp2.json", r#"{"reps": 4}"#);
    assert_eq!(trawl(&["experiment", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn oracle_scans() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "q.json", r#"{"scan": "arfima_quadrature", "d": 0.25, "kmax": 10}"#);
    let o = trawl(&["oracle", "--config", s(&cfg)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["max_abs_error"].as_f64().unwrap() < 1e-5);

    let cfg = write(
        &dir,
        "scan.json",
        r#"{"scan": "acv_error_rate",
            "model": {"seed": {"seed": "poisson"}, "sequence": {"kind": "power", "c": 10.0, "alpha": 1.5}},
            "kmax": 3, "n_grid": [100, 400], "reps": 50, "rng_seed": 5}"#,
    );
    let o = trawl(&["oracle", "--config", s(&cfg), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,statistic,stderr"));
    assert_eq!(text.lines().count(), 3);

    let o = trawl(&["oracle", "--config", s(&cfg)]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["slope"].as_f64().unwrap() < 0.0);
    assert!(v.get("slope_stderr").is_some());
}
