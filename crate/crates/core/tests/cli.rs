use std::path::Path;
use std::process::{Command, Output};

use decompound::asymptotics::CovarianceReport;
use decompound::estimators::EstimateSet;
use decompound::harness::MCReport;

const POISSON: &str = r#"{"gamma":0,"lambda":1,"delta":1,"atom_spacing":1,"atoms":[{"j":1,"q":1}]}"#;
const ESTIMATE: &str = r#"{"schema_version":1,"delta":1,"atom_spacing":1}"#;
const PLAN: &str = r#"{"schema_version":1,
  "model":{"gamma":0,"lambda":0.5,"delta":1,"atom_spacing":1,"atoms":[{"j":-1,"q":0.2},{"j":1,"q":0.3}]},
  "sample_sizes":[300,600],"replicates":5,"seed":7,
  "targets":[{"target":"lambda"},{"target":"qj","j":1},{"target":"f","t":0}],
  "sup_grid":[-1,0,1]}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decompound")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn oracle_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", POISSON);
    let out = run(dir.path(), &["oracle", "m.json", "--out", "o.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: CovarianceReport = serde_json::from_slice(&std::fs::read(dir.path().join("o.json")).unwrap()).unwrap();
    assert!((r.exact.sigma2_lambda - 1.718281828459045).abs() < 1e-8);
    let csv = std::fs::read_to_string(dir.path().join("o_sigma_f.csv")).unwrap();
    assert_eq!(csv.lines().count(), r.ts.len() + 1);
    assert!(dir.path().join("o_sigma_n.csv").exists());
}

#[test]
fn empty_increments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "e.json", ESTIMATE);
    write(dir.path(), "z.csv", "");
    assert_eq!(run(dir.path(), &["estimate", "z.csv", "--config", "e.json", "--out", "x.json"]).status.code(), Some(2));
    write(dir.path(), "z.csv", "z\n");
    assert_eq!(run(dir.path(), &["estimate", "z.csv", "--config", "e.json", "--out", "x.json"]).status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn bad_schema_exit_2_and_missing_file_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "e.json", r#"{"schema_version":9,"delta":1,"atom_spacing":1}"#);
    write(dir.path(), "z.csv", "z\n0\n1\n");
    assert_eq!(run(dir.path(), &["estimate", "z.csv", "--config", "e.json", "--out", "x.json"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["oracle", "absent.json", "--out", "o.json"]).status.code(), Some(4));
}

#[test]
fn refusal_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"gamma":0,"lambda":2,"delta":1,"atom_spacing":1,"atoms":[{"j":-1,"q":1},{"j":1,"q":1}]}"#);
    write(dir.path(), "e.json", r#"{"delta":1,"atom_spacing":1,"spectral":{"kappa":0.9}}"#);
    assert!(run(dir.path(), &["simulate", "--config", "m.json", "-n", "500", "--seed", "1", "--out", "z.csv"]).status.success());
    let out = run(dir.path(), &["estimate", "z.csv", "--config", "e.json", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_estimate_bands_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", POISSON);
    write(dir.path(), "e.json", ESTIMATE);
    assert!(run(dir.path(), &["simulate", "--config", "m.json", "-n", "800", "--seed", "5", "--out", "z.csv"]).status.success());
    let out = run(dir.path(), &["estimate", "z.csv", "--config", "e.json", "--reference", "m.json", "--out", "est.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("est.json")).unwrap();
    let set: EstimateSet = serde_json::from_str(&text).unwrap();
    assert!((set.lambda_hat - 1.0).abs() < 0.2);
    let again: EstimateSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
    assert_eq!(again, set);

    assert!(run(dir.path(), &["oracle", "m.json", "--out", "o.json"]).status.success());
    let out = run(dir.path(), &["bands", "--estimates", "est.json", "--oracle", "o.json", "--out", "b.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bands = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut lines = bands.lines();
    assert_eq!(lines.next(), Some("t,f_hat,lower,upper,sup_lower,sup_upper"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[1] && v[1] <= v[3]);
        assert!(v[4] <= v[2] + 1e-15 && v[3] <= v[5] + 1e-15);
    }
}

#[test]
fn montecarlo_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", PLAN);
    for (threads, out) in [("1", "a"), ("1", "b"), ("3", "c")] {
        let o = run(dir.path(), &["montecarlo", "--config", "p.json", "--threads", threads, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &str, f: &str| std::fs::read(dir.path().join(d).join(f)).unwrap();
    for f in ["report.json", "errors.csv"] {
        assert_eq!(read("a", f), read("b", f));
        assert_eq!(read("a", f), read("c", f));
    }
    let report: MCReport = serde_json::from_slice(&read("a", "report.json")).unwrap();
    let errors = String::from_utf8(read("a", "errors.csv")).unwrap();
    assert!(errors.starts_with("replicate,target,n,error"));
    for s in &report.targets {
        let rows = errors.lines().skip(1).filter(|l| l.contains(&format!(",{},{},", s.label, s.n))).count();
        assert_eq!(rows, report.replicates - s.refused);
    }
    assert_eq!(report.sup_norm.len(), 2);

    let o = run(dir.path(), &["montecarlo", "--config", "p.json", "--seed", "8", "--out", "d"]);
    assert!(o.status.success());
    assert_ne!(read("a", "report.json"), read("d", "report.json"));
}
