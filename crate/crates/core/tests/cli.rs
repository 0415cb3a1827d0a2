use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use qsdthresh::experiment::runner::median;

const BIN: &str = env!("CARGO_BIN_EXE_qsdthresh");

const SWEEP: &str = r#"{
  "scenario": "threshold-sweep",
  "model": {"kind": "tfim", "L": 4, "g": -1.4142135623730951},
  "grid": {"kind": "forward", "n": 8, "dt": 1.0},
  "sigma_list": [1e-6, 1e-4],
  "trials": 13,
  "base_seed": 7
}"#;

fn qsdthresh(args: &[&str], threads: Option<&str>, cwd: &Path) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).current_dir(cwd);
    if let Some(t) = threads {
        cmd.env("QSDTHRESH_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn csv_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let one = qsdthresh(&["run", "--config", &cfg], Some("1"), dir.path());
    let four = qsdthresh(&["run", "--config", &cfg], Some("4"), dir.path());
    assert!(one.status.success(), "{}", stderr(&one));
    assert!(four.status.success(), "{}", stderr(&four));
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout);
    assert!(!one.stdout.contains(&b'\r'));
}

#[test]
fn summary_rows_recomputed_by_independent_reader() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let out = qsdthresh(&["run", "--config", &cfg], None, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (kind, variant, sigma, err) = (col("row_kind"), col("variant"), col("sigma"), col("abs_error"));
    let max_err = col("max_abs_error");

    let mut trials: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut summaries: Vec<(String, String, f64, f64)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let key = (rec[variant].to_string(), rec[sigma].to_string());
        match &rec[kind] {
            "trial" => trials.entry(key).or_default().push(rec[err].parse().unwrap()),
            "summary" => summaries.push((key.0, key.1, rec[err].parse().unwrap(), rec[max_err].parse().unwrap())),
            other => panic!("unexpected row kind {other}"),
        }
    }
    assert_eq!(summaries.len(), trials.len());
    for (v, s, med, mx) in summaries {
        let errs = &trials[&(v.clone(), s.clone())];
        assert_eq!(errs.len(), 13);
        let mut sorted = errs.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(med, sorted[6], "{v} {s}");
        assert_eq!(Some(med), median(errs));
        assert_eq!(mx, sorted[12]);
    }
}

#[test]
fn flags_override_config_and_output_stays_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let out_path = dir.path().join("out.csv");
    let o = qsdthresh(
        &["run", "--config", &cfg, "--out", out_path.to_str().unwrap(), "--trials", "3", "--seed", "11"],
        None,
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let trial_rows = text.lines().filter(|l| l.starts_with("trial,")).count();
    assert_eq!(trial_rows, 3 * 2);
    assert!(text.lines().any(|l| l.starts_with("trial,") && l.contains(",11,")));
    let mut entries: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    entries.sort();
    assert_eq!(entries, vec!["out.csv", "sweep.json"]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "bad.json", r#"{"scenario": "threshold-sweep", "colour": 1}"#);
    let o = qsdthresh(&["run", "--config", &unknown], None, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let bad_json = write(dir.path(), "broken.json", "{\"scenario\": ");
    assert_eq!(qsdthresh(&["run", "--config", &bad_json], None, dir.path()).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(qsdthresh(&["run", "--config", missing.to_str().unwrap()], None, dir.path()).status.code(), Some(2));

    let o = qsdthresh(&["run", "--config", &write(dir.path(), "t.json", SWEEP), "--trials", "0"], None, dir.path());
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(qsdthresh(&["frobnicate"], None, dir.path()).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let unwritable = dir.path().join("no/such/dir/out.csv");
    let o = qsdthresh(&["run", "--config", &cfg, "--out", unwritable.to_str().unwrap(), "--trials", "1"], None, dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let missing_pair = dir.path().join("pair.json");
    let o = qsdthresh(&["pair", "import", "--pair", missing_pair.to_str().unwrap()], None, dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn pair_export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let pair_path = dir.path().join("pair.json");
    let o = qsdthresh(&["pair", "export", "--config", &cfg, "--out", pair_path.to_str().unwrap()], None, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));

    let pair = qsdthresh::pair_io::load_pair(&pair_path).unwrap();
    assert_eq!(pair.n(), 8);
    assert!(pair.toeplitz_rows.is_some());
    let text = std::fs::read_to_string(&pair_path).unwrap();
    assert_eq!(qsdthresh::pair_io::pair_to_json(&pair).unwrap(), text);

    let o = qsdthresh(&["pair", "import", "--pair", pair_path.to_str().unwrap()], None, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["n"], 8);
    assert_eq!(summary["toeplitz"], true);
    assert_eq!(summary["meta"]["model"]["kind"], "tfim");
    let e0 = summary["E0"].as_f64().unwrap();
    let exact = qsdthresh::linalg::hermitian_eigenvalues(&qsdthresh::models::tfim_hamiltonian(4, -2f64.sqrt()).unwrap())
        .unwrap()[0];
    assert!(e0 >= exact - 1e-9 && e0 - exact < 1e-3, "{e0} vs {exact}");

    let garbled = write(dir.path(), "garbled.json", r#"{"n": 2, "toeplitz": true, "first_row_H": [[1, 0]], "first_row_S": [[1, 0], [0, 0]]}"#);
    assert_eq!(qsdthresh(&["pair", "import", "--pair", &garbled], None, dir.path()).status.code(), Some(2));
}

#[test]
fn bounds_command_reports_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let pair_path = dir.path().join("pair.json");
    assert!(qsdthresh(&["pair", "export", "--config", &cfg, "--out", pair_path.to_str().unwrap()], None, dir.path())
        .status
        .success());
    let p = pair_path.to_str().unwrap();
    let o = qsdthresh(&["bounds", "--pair", p, "--eta-h", "1e-12", "--eta-s", "1e-12", "--epsilon", "1e-3"], None, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["alpha"], 0.25);
    for flag in ["gap_2_9", "small_noise", "chi_small", "angle_gap"] {
        assert!(rep["hypotheses"][flag].is_boolean());
    }

    let o = qsdthresh(&["bounds", "--pair", p, "--eta-h", "0", "--eta-s", "0", "--epsilon", "1e-3", "--alpha", "0.9"], None, dir.path());
    assert_eq!(o.status.code(), Some(2));
}
