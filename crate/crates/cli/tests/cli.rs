use std::fs;
use std::path::Path;
use std::process::Command;

use rescon_cli::{CliError, EXIT_IO, EXIT_NEGATIVE, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VALIDATION};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rescon(out: &Path, args: &[&str]) -> Output {
    let o = Command::new(env!("CARGO_BIN_EXE_rescon"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RESCON_OUT")
        .output()
        .unwrap();
    Output {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bundled_scenario_validates() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["validate", "builtin:table1_consensus"]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("scenario is valid"));
}

#[test]
fn weight_outside_the_band_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["validate", "builtin:table1_consensus", "--set", "alpha=0.95"]);
    assert_eq!(o.code, EXIT_VALIDATION, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("scenario rejected"));
}

#[test]
fn too_many_adversaries_name_the_attack_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(
        dir.path(),
        &["validate", "builtin:table1_consensus", "--set", "faults=1", "--set", "attack_model=f-total"],
    );
    assert_eq!(o.code, EXIT_VALIDATION, "{}{}", o.stdout, o.stderr);
    let rejected = o.stdout.lines().find(|l| l.starts_with("scenario rejected")).unwrap();
    assert!(rejected.len() > "scenario rejected: ".len());
}

#[test]
fn unknown_override_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for key in ["agent=[]", "colour=red"] {
        let o = rescon(dir.path(), &["run", "builtin:table1_consensus", "--set", key]);
        assert_eq!(o.code, EXIT_VALIDATION, "{key}");
        assert!(o.stderr.starts_with("error: "));
    }
    let o = rescon(dir.path(), &["run", "builtin:table1_consensus", "--set", "noequals"]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn missing_scenario_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["run", "does/not/exist.toml"]);
    assert_eq!(o.code, EXIT_IO, "{}", o.stderr);
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["run", "builtin:table1_consensus", "--set", "horizon=20"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let trace = fs::read_to_string(dir.path().join("table1-consensus.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "k,t,agent,role,x1,x2,u1,u2,aux1,aux2,blocked");
    assert_eq!(lines.count(), 20 * 12);
    let doc = json(&dir.path().join("table1-consensus.summary.json"));
    assert_eq!(doc["summary"]["rounds"], 20);
    assert_eq!(doc["diameter_series"].as_array().unwrap().len(), 20);
    assert_eq!(doc["validation"]["checks"].as_array().map(|c| !c.is_empty()), Some(true));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_rescon"))
        .args(["run", "builtin:table1_consensus", "--set", "horizon=2"])
        .env("RESCON_OUT", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("table1-consensus.summary.json").exists());
}

#[test]
fn compare_runs_both_policies() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["compare", "builtin:table1_consensus", "--set", "horizon=10"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("hold-last:") && o.stdout.contains("zero-substitute:"));
    let docs = json(&dir.path().join("table1-consensus.compare.json"));
    assert_eq!(docs.as_array().unwrap().len(), 2);
    assert!(dir.path().join("table1-consensus.hold-last.trace.csv").exists());
    assert!(dir.path().join("table1-consensus.zero-substitute.trace.csv").exists());
}

#[test]
fn robustness_checker_reports_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(dir.path(), &["check-robustness", "--scenario", "builtin:table1_consensus", "--r", "7"]);
    // every benign agent of the Table I graph has only 7 or 8 in-neighbors,
    // which is not enough for 7-robustness
    assert_eq!(o.code, EXIT_NEGATIVE, "{}", o.stderr);
    let cert = json(&dir.path().join("robustness.json"));
    assert_eq!(cert["holds"], false);
    assert!(cert["witness"].is_array());

    let graph = dir.path().join("k4.txt");
    fs::write(&graph, "nodes 4\n1 <- 2 3 4\n2 <- 1 3 4\n3 <- 1 2 4\n4 <- 1 2 3\n").unwrap();
    let o = rescon(dir.path(), &["check-robustness", "--graph", graph.to_str().unwrap(), "--r", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = rescon(dir.path(), &["check-robustness", "--graph", graph.to_str().unwrap(), "--r", "2", "--s", "3"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("(2, 3)-robust"));
}

#[test]
fn sarymsakov_checker_on_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("id.txt");
    fs::write(&m, "1 0\n0 1\n").unwrap();
    let o = rescon(dir.path(), &["check-sarymsakov", m.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_NEGATIVE, "{}", o.stderr);
    let report = json(&dir.path().join("sarymsakov.json"));
    assert_eq!(report["holds"], false);
    assert_eq!(report["witness"], serde_json::json!([[1], [2]]));

    fs::write(&m, "0.5 0.5\n0.25 0.75\n").unwrap();
    assert_eq!(rescon(dir.path(), &["check-sarymsakov", m.to_str().unwrap()]).code, EXIT_OK);
    fs::write(&m, "0.5 0.6\n0 1\n").unwrap();
    assert_eq!(rescon(dir.path(), &["check-sarymsakov", m.to_str().unwrap()]).code, EXIT_VALIDATION);
}

#[test]
fn redundancy_checker_on_shared_costs() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescon(
        dir.path(),
        &["check-redundancy", "builtin:shared_minimizer", "--r", "2", "--resolution", "0.05"],
    );
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert_eq!(json(&dir.path().join("redundancy.json"))["holds"], true);
    // consensus scenarios carry no costs
    let o = rescon(dir.path(), &["check-redundancy", "builtin:table1_consensus", "--r", "1"]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn runtime_failures_have_their_own_code() {
    let e = CliError::Core(rescon::Error::Runtime {
        round: 3,
        agent: 1,
        source: Box::new(rescon::Error::Solver("stalled".into())),
    });
    assert_eq!(e.exit_code(), EXIT_RUNTIME);
}
