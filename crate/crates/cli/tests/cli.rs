use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_shardmatch");

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("spawn")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let o = run(args, cwd);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn gen(cwd: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["gen", "--out", out];
    args.extend_from_slice(extra);
    ok(&args, cwd);
}

#[test]
fn gen_single_seed_has_no_adjacency() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "1", "--seed", "3"]);
    let m = json(&t.path().join("s/scene.json"));
    assert_eq!(m["fragments"].as_array().unwrap().len(), 1);
    assert!(m["adjacency"].as_array().unwrap().is_empty());
}

#[test]
fn gen_manifest_adjacency_is_connected() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "6", "--roughness", "0.5", "--seed", "9"]);
    let m = json(&t.path().join("s/scene.json"));
    let n = m["fragments"].as_array().unwrap().len();
    let edges: Vec<(usize, usize)> = m["adjacency"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["a"].as_u64().unwrap() as usize, e["b"].as_u64().unwrap() as usize))
        .collect();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in &edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    assert!(seen.iter().all(|&s| s), "{edges:?}");
}

#[test]
fn reconstruct_reports_round_trip_error() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "4", "--seed", "5"]);
    gen(t.path(), "n", &["--seeds", "4", "--seed", "5", "--noise-sigma", "0.01"]);
    ok(&["reconstruct", "--scene", "s", "--out", "r"], t.path());
    ok(&["reconstruct", "--scene", "n", "--out", "rn"], t.path());
    let clean = json(&t.path().join("r/reconstruct.json"));
    assert_eq!(clean["format_version"], 1);
    let worst = clean["result"]["max_rel_rmse"].as_f64().unwrap();
    assert!(worst < 1e-3, "{worst}");
    let noisy = json(&t.path().join("rn/reconstruct.json"));
    assert!(noisy["result"]["max_rel_rmse"].as_f64().unwrap().is_finite());
    assert!(t.path().join("r/profiles/s00_height.ffh").is_file());
}

#[test]
fn missing_lights_is_a_data_error_naming_the_path() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "3", "--seed", "1"]);
    fs::remove_file(t.path().join("s/lights.txt")).unwrap();
    let o = run(&["reconstruct", "--scene", "s", "--out", "r"], t.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lights.txt"));
}

#[test]
fn collinear_lights_are_a_numeric_failure() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "3", "--seed", "1"]);
    let row = "7.0710678118654757e-1 0 7.0710678118654757e-1\n";
    fs::write(t.path().join("s/lights.txt"), format!("{row}{row}0 0 1\n")).unwrap();
    let o = run(&["reconstruct", "--scene", "s", "--out", "r"], t.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["gen", "--bogus"], t.path())), 2);
    assert_eq!(code(&run(&["gen", "--out", "s", "--seeds", "0"], t.path())), 2);
    gen(t.path(), "s", &["--seeds", "2", "--seed", "1"]);
    let bad_w = run(&["match", "--scene", "s", "--out", "m", "--weights", "0.5,0.5,0.5"], t.path());
    assert_eq!(code(&bad_w), 2);
    fs::write(t.path().join("p.json"), r#"{"matching": {"nope": 1}}"#).unwrap();
    assert_eq!(code(&run(&["match", "--scene", "s", "--out", "m", "--params", "p.json"], t.path())), 2);
    assert_eq!(code(&run(&["match", "--scene", "s", "--out", "s"], t.path())), 2);
    assert!(!t.path().join("m").exists());
}

#[test]
fn missing_inputs_exit_three() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["match", "--scene", "nowhere", "--out", "m"], t.path())), 3);
    assert_eq!(code(&run(&["eval", "--db", "nodb", "--scene", "nowhere", "--out", "e"], t.path())), 3);
}

#[test]
fn params_file_is_echoed_into_reports() {
    let t = tempfile::tempdir().unwrap();
    ok(&["gen-notch", "--out", "n", "--rotation-deg", "12"], t.path());
    fs::write(t.path().join("p.json"), r#"{"gap": {"kappa": 5.0}}"#).unwrap();
    ok(
        &["align-gap", "--gap", "n/gap.pgm", "--fragment", "n/fragment.pgm", "--out", "g", "--params", "p.json", "--sweep-step-deg", "2"],
        t.path(),
    );
    let r = json(&t.path().join("g/alignment.json"));
    assert_eq!(r["config"]["params"]["gap"]["kappa"], 5.0);
    assert_eq!(r["config"]["params"]["gap"]["step_deg"], 2.0);
    assert_eq!(r["config"]["params"]["matching"]["hist_bins"], 16);
    let theta = r["result"]["theta_deg"].as_f64().unwrap();
    assert!((theta - 12.0).abs() <= 1.0, "{theta}");
    let csv = fs::read_to_string(t.path().join("g/sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta_deg,iou,chamfer_px,combined"));
    assert_eq!(csv.lines().count(), 181);
}

#[test]
fn assemble_seed_42_joins_only_adjacent_pairs() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--shape", "square", "--seeds", "6", "--seed", "42"]);
    ok(&["assemble", "--scene", "s", "--out", "a"], t.path());
    let r = json(&t.path().join("a/plan.json"));
    assert_eq!(r["result"]["plan"]["steps"].as_array().unwrap().len(), 6);
    assert_eq!(r["result"]["all_mates_adjacent"], true);
    assert_eq!(r["result"]["all_poses_within_tolerance"], true);
}

#[test]
fn eval_against_own_scene_is_perfect() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "s", &["--seeds", "5", "--seed", "8"]);
    ok(&["db-build", "--db", "db", "--scene", "s", "--out", "rep/db.json"], t.path());
    ok(&["eval", "--db", "db", "--scene", "s", "--out", "e"], t.path());
    let s = &json(&t.path().join("e/eval.json"))["result"]["summary"];
    assert_eq!(s["top1"], 1.0);
    assert_eq!(s["fallbacks"], 0);
    let csv = fs::read_to_string(t.path().join("e/eval.csv")).unwrap();
    assert!(csv.starts_with("query_id,top1_id,top1_correct,top3_correct,max_iou,fallback"));
    let again = run(&["db-build", "--db", "db", "--scene", "s"], t.path());
    assert_eq!(code(&again), 3, "duplicate ids must be rejected");
}
