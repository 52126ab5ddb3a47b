use std::fs;
use std::path::Path;
use std::process::Command;

use shrinkboost::instances::{load_matrix, planted};
use shrinkboost::margins::{min_margin, optimal_margin};
use shrinkboost::{IterateTrace, StepKind, Termination};
use shrinkboost_cli::{sweep, ExperimentConfig, GeneratorSpec, InstanceSource, SweepSummary, SUMMARY_FILE};

const SPEC: &str = "planted:80,10,0.15,11";

fn planted_config(out: &Path, rules: Vec<StepKind>) -> ExperimentConfig {
    let spec: GeneratorSpec = SPEC.parse().unwrap();
    let mut cfg = ExperimentConfig::new(InstanceSource::Generator { spec }, out);
    cfg.rules = rules;
    cfg.nus = vec![1.0, 0.5, 0.1];
    cfg.max_iters = 300;
    cfg
}

fn files_with(dir: &Path, prefix: &str, suffix: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with(prefix) && n.ends_with(suffix))
        .collect();
    names.sort();
    names
}

#[test]
fn nu_sweep_writes_three_traces_and_one_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = sweep(&planted_config(dir.path(), vec![StepKind::Wolfe])).unwrap();
    assert_eq!(files_with(dir.path(), "trace_", ".csv").len(), 3);
    assert_eq!(files_with(dir.path(), "summary", ".json"), vec![SUMMARY_FILE.to_string()]);
    assert_eq!(summary.runs.len(), 3);
    assert!(summary.all_ok, "{:#?}", summary.runs);

    let on_disk: SweepSummary = serde_json::from_slice(&fs::read(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn summary_gamma_is_the_optimal_margin() {
    let dir = tempfile::tempdir().unwrap();
    let summary = sweep(&planted_config(dir.path(), vec![StepKind::Qub])).unwrap();
    let a = planted(80, 10, 0.15, 11).unwrap();
    assert_eq!(summary.gamma, optimal_margin(&a).unwrap().gamma);
}

#[test]
fn final_margin_matches_recomputation_from_stored_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let summary = sweep(&planted_config(dir.path(), StepKind::ALL.to_vec())).unwrap();
    let a = planted(80, 10, 0.15, 11).unwrap();
    for run in &summary.runs {
        let json = fs::read(dir.path().join(run.trace_json.as_ref().unwrap())).unwrap();
        let trace = IterateTrace::read_json(&json[..]).unwrap();
        let recomputed = min_margin(&a, &trace.final_lambda).unwrap();

        let csv_text = fs::read_to_string(dir.path().join(run.trace_csv.as_ref().unwrap())).unwrap();
        let last = csv_text.lines().last().unwrap();
        let stored: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
        assert!(
            (stored - recomputed).abs() <= 1e-12,
            "{} nu={}: csv {stored} vs {recomputed}",
            run.rule,
            run.nu
        );
        assert_eq!(run.final_margin, Some(stored));
    }
}

#[test]
fn traces_are_byte_identical_across_reruns() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut c1 = planted_config(d1.path(), StepKind::ALL.to_vec());
    c1.workers = Some(1);
    let mut c2 = planted_config(d2.path(), StepKind::ALL.to_vec());
    c2.workers = Some(4);
    sweep(&c1).unwrap();
    sweep(&c2).unwrap();
    let names = files_with(d1.path(), "trace_", ".csv");
    assert_eq!(names.len(), 12);
    assert_eq!(names, files_with(d2.path(), "trace_", ".csv"));
    for n in names.iter().chain(["margins.csv".to_string()].iter()) {
        assert_eq!(fs::read(d1.path().join(n)).unwrap(), fs::read(d2.path().join(n)).unwrap(), "{n}");
    }
}

#[test]
fn a_failing_run_is_recorded_and_the_rest_proceed() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = dir.path().join("unit.csv");
    fs::write(&mpath, "-1,0.5\n-1,-0.5\n").unwrap();
    let out = dir.path().join("out");
    let mut cfg = ExperimentConfig::new(InstanceSource::Matrix { path: mpath }, &out);
    cfg.rules = vec![StepKind::Ada, StepKind::Wolfe];
    cfg.nus = vec![0.5];
    cfg.max_iters = 50;
    let summary = sweep(&cfg).unwrap();
    assert!(!summary.all_ok);
    let ada = &summary.runs[0];
    assert!(matches!(ada.termination, Some(Termination::StepFailed { .. })), "{ada:?}");
    assert!(!ada.ok());
    let wolfe = &summary.runs[1];
    assert!(wolfe.trace_csv.is_some());
    assert!(out.join(wolfe.trace_csv.as_ref().unwrap()).is_file());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shrinkboost"))
}

#[test]
fn binary_exit_codes_and_output_dir_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let status = bin()
        .args(["sweep", "--generator", SPEC, "--rules", "qub,opt", "--nus", "1,0.5", "--iters", "100"])
        .env("SHRINKBOOST_OUT", &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(files_with(&out, "trace_", ".csv").len(), 4);

    let mpath = dir.path().join("unit.csv");
    fs::write(&mpath, "-1\n-1\n").unwrap();
    let status = bin()
        .args(["run", "--rule", "ada", "--matrix"])
        .arg(&mpath)
        .arg("--out")
        .arg(dir.path().join("unit_out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let status = bin().args(["gamma", "--matrix", "/nonexistent.csv"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn check_bounds_reads_a_saved_trace() {
    let dir = tempfile::tempdir().unwrap();
    sweep(&planted_config(dir.path(), vec![StepKind::Qub])).unwrap();
    let out = bin()
        .arg("check-bounds")
        .arg(dir.path().join("trace_qub_nu0.5.json"))
        .args(["--generator", SPEC])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["risk_qub", "margin_qub"]);
}

#[test]
fn stumps_subcommand_writes_a_loadable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.csv");
    fs::write(&data, "0,1\n1,-1\n").unwrap();
    let mpath = dir.path().join("a.csv");
    let status = bin().arg("stumps").arg(&data).arg("--output").arg(&mpath).status().unwrap();
    assert!(status.success());
    let a = load_matrix(&mpath).unwrap();
    assert!(a.is_binary());
    assert_eq!(a.to_rows(), vec![vec![1.0, -1.0], vec![1.0, -1.0]]);
}

#[test]
fn upsilon_and_hardcore_subcommands_emit_json() {
    let out = bin().args(["upsilon", "--nu", "1", "--gamma", "0.4"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let direct = -(1.4f64 * 0.6).ln() / (1.4f64 / 0.6).ln();
    assert!((v["upsilon"].as_f64().unwrap() - direct).abs() < 1e-12);

    let out = bin()
        .args(["hardcore", "--generator", "mixed:3,3,4,5", "--verify"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hard_rows"], serde_json::json!([3, 4, 5]));
}
