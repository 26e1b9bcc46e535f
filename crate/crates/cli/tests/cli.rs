use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sepcheck"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn validator() -> jsonschema::Validator {
    let text = include_str!("../schemas/verdict.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

fn assert_schema(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn bell_is_entangled_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bell = gen(dir.path(), "bell.json", &["--bell", "psi-"]);
    let o = run(&["decide", "--state", &bell, "--json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["kind"], "Entangled");
    assert_eq!(v["certificate"]["label"], "exact");
    assert_schema(&v);

    let o = run(&["decide", "--state", &bell]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("Entangled (exact)"));
}

#[test]
fn maximally_mixed_is_separable_with_four_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let mm = gen(dir.path(), "mm.json", &["--maxmixed"]);
    let o = run(&["decide", "--state", &mm, "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["kind"], "Separable");
    let atoms = v["certificate"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 4);
    for a in atoms {
        assert!((a["weight"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
    assert_schema(&v);
}

#[test]
fn border_and_budget_verdicts_match_schema() {
    let dir = tempfile::tempdir().unwrap();
    let iso = gen(
        dir.path(),
        "iso.json",
        &["--isotropic", "0.3333333333333333"],
    );
    let o = run(&["decide", "--state", &iso, "--json"]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["certificate"]["type"], "border");
    assert_schema(&v);

    let o = run(&["decide", "--state", &iso, "--json", "--budget", "0"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["kind"], "BudgetExhausted");
    assert_schema(&v);
}

#[test]
fn extension_plateau_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let bell = gen(dir.path(), "bell.json", &["--bell", "phi+"]);
    let o = run(&["decide", "--state", &bell, "--json", "--dps-level", "2"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["certificate"]["kind"], "ExtensionPlateau");
    assert_eq!(v["certificate"]["label"], "level-2 heuristic");
    assert_schema(&v);
}

#[test]
fn schema_rejects_malformed_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let mm = gen(dir.path(), "mm.json", &["--maxmixed"]);
    let good = json(&run(&["decide", "--state", &mm, "--json"]));
    let v = validator();
    assert!(v.is_valid(&good));

    let mut bad = good.clone();
    bad["kind"] = "Maybe".into();
    assert!(!v.is_valid(&bad));
    let mut bad = good.clone();
    bad.as_object_mut().unwrap().remove("flags");
    assert!(!v.is_valid(&bad));
    let mut bad = good;
    bad["certificate"]["type"] = "border".into();
    assert!(!v.is_valid(&bad));
}

#[test]
fn decide_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(
        dir.path(),
        "r.json",
        &["--random", "--seed", "11", "--dims", "2", "3"],
    );
    let a = run(&["decide", "--state", &r, "--json"]);
    let b = run(&["decide", "--state", &r, "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reads_state_from_stdin() {
    let text = stdout(&run(&["gen", "--bell", "phi+"]));
    let o = run_stdin(&["decide", "--state", "-"], &text);
    assert_eq!(code(&o), 1);
    let o = run_stdin(&["ppt", "--state", "-"], &text);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["npt"], true);
    assert!((v["min_eigenvalue"].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn generated_states_round_trip_through_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(
        dir.path(),
        "r.json",
        &["--random", "--seed", "5", "--count", "4"],
    );
    let o = run(&["ppt", "--state", &r]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["npt"], false);

    let o = run(&["dps", "--state", &r, "--level", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["outcome"]["NotDetectedAtLevel"]["converged"], true);

    // Rank two: the extension search creeps towards feasibility and runs out
    // of iterations without claiming anything.
    let low = gen(
        dir.path(),
        "low.json",
        &["--random", "--seed", "5", "--count", "2"],
    );
    let o = run(&["dps", "--state", &low, "--level", "2"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));

    // Full-rank mixtures this close to the boundary may come back as Border;
    // rank-deficient input never does.
    let o = run(&["decide", "--state", &r]);
    assert!(matches!(code(&o), 0 | 2), "{}", stdout(&o));
    let o = run(&["decide", "--state", &low]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Separable"));
}

#[test]
fn dps_on_bell_reports_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let bell = gen(dir.path(), "bell.json", &["--bell", "phi-"]);
    let o = run(&["dps", "--state", &bell, "--level", "2"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(
        v["outcome"]["EntangledCertified"]["kind"],
        "ExtensionPlateau"
    );

    let o = run(&["dps", "--state", &bell, "--level", "2", "--max-iter", "50"]);
    assert_eq!(code(&o), 3);
    assert_eq!(
        json(&o)["outcome"]["NotDetectedAtLevel"]["converged"],
        false
    );
}

#[test]
fn enumerate_feeds_hull_check_in_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate", "--dims", "2", "2", "--count", "4"]);
    assert_eq!(code(&o), 0);
    let lines = stdout(&o);
    assert_eq!(lines.lines().count(), 4);
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["index"], 0);
    assert_eq!(first["height"], 1);
    let points = dir.path().join("p.jsonl");
    std::fs::write(&points, &lines).unwrap();
    let points = points.to_str().unwrap();
    let mm = gen(dir.path(), "mm.json", &["--maxmixed"]);
    let bell = gen(dir.path(), "bell.json", &["--bell", "phi+"]);

    for mode in ["facet", "bary", "grow"] {
        let o = run(&[
            "hull-check",
            "--state",
            &mm,
            "--points",
            points,
            "--mode",
            mode,
        ]);
        assert_eq!(code(&o), 0);
        let v = json(&o);
        assert_eq!(v["verdict"], "In", "{mode}");
        for w in v["weights"].as_array().unwrap() {
            assert!((w.as_f64().unwrap() - 0.25).abs() < 1e-9);
        }
        let o = run(&[
            "hull-check",
            "--state",
            &bell,
            "--points",
            points,
            "--mode",
            mode,
        ]);
        assert_eq!(json(&o)["verdict"], "Out", "{mode}");
    }
}

#[test]
fn enumerate_respects_height_limit() {
    let all = stdout(&run(&[
        "enumerate",
        "--dims",
        "2",
        "2",
        "--count",
        "100000",
        "--height-max",
        "2",
    ]));
    let n = all.lines().count();
    assert!(n > 4 && n < 100000);
    for l in all.lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        assert!(v["height"].as_u64().unwrap() <= 2);
    }
}

#[test]
fn exit_codes_for_usage_io_and_validation() {
    assert_eq!(code(&run(&["decide", "--bogus"])), 64);
    assert_eq!(code(&run(&["decide"])), 64);
    assert_eq!(code(&run(&["gen"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(
        code(&run(&["decide", "--state", "/nonexistent/state.json"])),
        74
    );

    let unnormalized = r#"{"dims":[2,2],"re":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,1]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
    let o = run_stdin(&["decide", "--state", "-"], unnormalized);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace"));
    assert_eq!(code(&run_stdin(&["ppt", "--state", "-"], "not json")), 65);

    let mm = stdout(&run(&["gen", "--maxmixed"]));
    assert_eq!(
        code(&run_stdin(&["decide", "--state", "-", "--eta", "1.5"], &mm)),
        65
    );
    assert_eq!(
        code(&run_stdin(
            &["decide", "--state", "-", "--validation-tol", "0"],
            &mm
        )),
        65
    );
    assert_eq!(code(&run(&["gen", "--isotropic", "2"])), 65);
    assert_eq!(
        code(&run(&["enumerate", "--dims", "1", "2", "--count", "1"])),
        65
    );
}

#[test]
fn loose_validation_accepts_slightly_off_trace() {
    let off = r#"{"dims":[2,2],"re":[[0.25,0,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.2500001]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
    assert_eq!(code(&run_stdin(&["ppt", "--state", "-"], off)), 65);
    assert_eq!(
        code(&run_stdin(
            &["ppt", "--state", "-", "--validation-tol", "1e-5"],
            off
        )),
        0
    );
}
