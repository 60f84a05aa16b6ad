use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn kdvb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdvb")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(sub: &str, root: &Path, text: &str, out: &str) -> Output {
    let cfg = write_config(root, &format!("{out}.cfg"), text);
    let out = root.join(out);
    kdvb(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&body(&dir.join("manifest.json"))).unwrap()
}

const SMALL: &str = "K = 8\nT = 0.5\ntime_steps = 8\nsubsteps = 4\n";

#[test]
fn zero_datum_gives_zero_trajectory() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", tmp.path(), &format!("{SMALL}initial_data = zero\nepsilon = 0.1\n"), "zero");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&tmp.path().join("zero/trajectory.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#schema=kdvb.simulate.v1"));
    assert_eq!(lines.next(), Some("t,k,re,im"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9 * 8);
    assert!(rows.iter().all(|r| r[2] == 0.0 && r[3] == 0.0));
    assert!(!tmp.path().join("zero/FAILED").exists());
}

#[test]
fn reruns_are_byte_identical_and_digests_match() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!("{SMALL}initial_data = random-sobolev\ndata.norm = 0.1\nepsilon = 0.05\nseed = 7\n");
    for name in ["a", "b"] {
        assert!(run("simulate", tmp.path(), &cfg, name).status.success());
    }
    let a = fs::read(tmp.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/trajectory.csv")).unwrap();
    assert_eq!(a, b);
    let m = manifest(&tmp.path().join("a"));
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let digest: String = Sha256::digest(&a).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(files[0]["sha256"], digest.as_str());
    assert_eq!(m["config"]["seed"], 7);
    assert!(m["started"].is_string() && m["finished"].is_string());
}

#[test]
fn seed_flag_changes_random_data() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL}initial_data = random-sobolev\n");
    let cfg = write_config(tmp.path(), "r.cfg", &text);
    let c = cfg.to_str().unwrap();
    let outs: Vec<PathBuf> = ["1", "2"].iter().map(|s| tmp.path().join(format!("seed{s}"))).collect();
    for (seed, out) in ["1", "2"].iter().zip(&outs) {
        assert!(kdvb(&["simulate", "--config", c, "--out", out.to_str().unwrap(), "--seed", seed]).status.success());
    }
    assert_ne!(body(&outs[0].join("trajectory.csv")), body(&outs[1].join("trajectory.csv")));
}

#[test]
fn floats_round_trip_through_the_csv() {
    let tmp = TempDir::new().unwrap();
    let o = run("report", tmp.path(), &format!("{SMALL}epsilon = 0.1\ndata.amplitude = 0.3\n"), "rep");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&tmp.path().join("rep/report.csv"));
    assert_eq!(text.lines().nth(1), Some("t,l2_norm,dissipation,hamiltonian,value,residual"));
    for line in text.lines().skip(2) {
        for cell in line.split(',') {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), cell);
        }
    }
    assert!(tmp.path().join("rep/budgets.json").exists());
}

#[test]
fn sweep_needs_three_epsilons_for_a_fit() {
    let tmp = TempDir::new().unwrap();
    let o = run("sweep", tmp.path(), &format!("{SMALL}epsilons = 0.1, 0.01\n"), "two");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3 epsilons required for fit"));
    assert!(!tmp.path().join("two").exists());
}

#[test]
fn sweep_writes_table_and_fit() {
    let tmp = TempDir::new().unwrap();
    let o = run("sweep", tmp.path(), &format!("{SMALL}epsilons = 0.1, 0.01, 0.001\nseed = 3\n"), "sw");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&tmp.path().join("sw/sweep.csv"));
    assert_eq!(text.lines().nth(1), Some("epsilon,distance,s,T,K,seed"));
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(2).all(|l| l.ends_with(",8,3")));
    let fit: serde_json::Value = serde_json::from_str(&body(&tmp.path().join("sw/fit.json"))).unwrap();
    assert!(fit["slope"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_name_the_line() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", tmp.path(), "K = 8\n# comment\nepsilon = -1\n", "bad");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3: epsilon must be >= 0"));
    let o = run("simulate", tmp.path(), "K = 8\nwhat\n", "bad2");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2:"));
}

#[test]
fn compute_failure_leaves_a_marker() {
    // Caught by validation: the cubic map needs s >= 1/2. Nothing is created.
    let tmp = TempDir::new().unwrap();
    let text = "equation = mkdvb\nmethod = picard\ns = 0.3\nK = 8\n";
    let o = run("simulate", tmp.path(), text, "early");
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("early").exists());

    // Overflows during the solve, after the run directory exists.
    let text = "K = 8\nT = 1\ntime_steps = 4\ninitial_data = cos\ndata.amplitude = 1e200\nepsilon = 0\n";
    let o = run("simulate", tmp.path(), text, "blowup");
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("blowup");
    assert!(dir.join("FAILED").exists());
    assert!(!dir.join("manifest.json").exists());
}

#[test]
fn run_dispatches_on_the_subcommand_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "l.cfg", "subcommand = verify-lemmas\nK = 6\nc_much_less = 1\n");
    let out = tmp.path().join("lem");
    let o = kdvb(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&out.join("lemmas.csv"));
    assert!(text.starts_with("#schema=kdvb.lemmas.v1\nclaim,checked,violations,extremum,holds\n"));
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
    assert_eq!(manifest(&out)["subcommand"], "verify-lemmas");
}

#[test]
fn violated_claims_exit_with_three() {
    // With the default stand-in for "much less than" the pair-size claim
    // fails on small boxes; the run still completes.
    let tmp = TempDir::new().unwrap();
    let o = run("verify-lemmas", tmp.path(), "K = 6\n", "strict");
    assert_eq!(o.status.code(), Some(3));
    let dir = tmp.path().join("strict");
    assert!(dir.join("manifest.json").exists() && !dir.join("FAILED").exists());
    let text = body(&dir.join("lemmas.csv"));
    assert!(text.lines().any(|l| l.starts_with("phase_identity,") && l.ends_with(",0,,true")));
    assert!(text.lines().any(|l| l.starts_with("gamma21_small_pair,") && l.ends_with(",false")));
    assert_eq!(manifest(&dir)["diagnostics"]["failed"][0], "gamma21_small_pair");
}

#[test]
fn probe_and_truncation_run() {
    let tmp = TempDir::new().unwrap();
    let o = run("probe", tmp.path(), "K = 16\noperator = a2\nsplits = 2, 4\ntrials = 4\n", "pr");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(body(&tmp.path().join("pr/probe.csv")).lines().count(), 4);
    let o = run("truncation", tmp.path(), &format!("{SMALL}epsilon = 0.01\ndata.amplitude = 0.2\n"), "tr");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&tmp.path().join("tr/truncation.csv"));
    let cutoffs: Vec<&str> = text.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(cutoffs, ["2", "4", "8"]);
}

#[test]
fn existing_run_directory_is_refused() {
    let tmp = TempDir::new().unwrap();
    assert!(run("simulate", tmp.path(), SMALL, "once").status.success());
    let o = run("simulate", tmp.path(), SMALL, "once");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("already holds a run"));
}

#[test]
fn help_documents_columns() {
    let o = kdvb(&["sweep", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("#schema=kdvb.sweep.v1") && text.contains("distance"));
}
