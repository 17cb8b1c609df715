use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trendfair::model::{AgentParams, EconomyState};
use trendfair::solver::solve;

fn trendfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trendfair"))
        .args(args)
        .env_remove("TRENDFAIR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--subjects", "40", "--share-selfish", "0.5", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    trendfair(&args)
}

#[test]
fn solve_prints_the_solution() {
    let o = trendfair(&["--format", "csv", "solve", "--a", "2", "--b", "1", "--eta", "0.8", "--wi", "12", "--wj", "10", "--tax", "11", "--dj", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.contains("s_star,0.568182"), "{text}");
    assert!(text.contains("region,upper-interior"));
}

#[test]
fn sweep_row_equals_library_solve() {
    let o = trendfair(&[
        "--format", "csv", "sweep", "--vary", "dj", "--from", "1.7", "--to", "1.7", "--step", "0.1", "--a", "2", "--b",
        "1", "--eta", "0.8", "--wi", "12", "--wj", "10", "--tax", "11",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    let s: f64 = cells[1].parse().unwrap();
    let expected = solve(
        &AgentParams::new(2.0, 1.0, 0.8).unwrap(),
        &EconomyState::new(12.0, 10.0, 0.0, 1.7, 11.0).unwrap(),
    );
    assert_eq!(s, expected.s_star);
}

#[test]
fn presets_are_available() {
    for preset in ["fig2a", "fig2b", "fig3a", "fig3b", "figC1"] {
        let o = trendfair(&["--format", "csv", "sweep", "--preset", preset]);
        assert_eq!(o.status.code(), Some(0), "{preset}");
        assert!(stdout(&o).lines().count() > 50);
    }
}

#[test]
fn hypotheses_for_reference_agent() {
    let o = trendfair(&["hypotheses", "--a", "2", "--b", "1", "--eta", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches(" holds").count(), 4, "{text}");
    assert!(text.contains("note:"));
}

#[test]
fn validation_errors_exit_with_two() {
    let bad_eta = trendfair(&["solve", "--a", "2", "--b", "1", "--eta", "1.0", "--wi", "12", "--wj", "10", "--tax", "11"]);
    assert_eq!(bad_eta.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_eta.stderr).contains("--eta"));

    let bad_tax = trendfair(&["solve", "--a", "2", "--b", "1", "--eta", "0.5", "--wi", "12", "--wj", "10", "--tax", "0"]);
    assert_eq!(bad_tax.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_tax.stderr).contains("--tax"));

    assert_eq!(trendfair(&["sweep", "--preset", "fig9"]).status.code(), Some(2));
    assert_eq!(trendfair(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let odd = trendfair(&["simulate", "--subjects", "5", "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(odd.status.code(), Some(2));
}

#[test]
fn io_and_schema_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(trendfair(&["analyze", "--input", missing.to_str().unwrap()]).status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "session_id,subject_id\n1,2\n").unwrap();
    assert_eq!(trendfair(&["analyze", "--input", bad.to_str().unwrap()]).status.code(), Some(4));

    let unwritable = dir.path().join("no-such-dir").join("out.csv");
    assert_eq!(simulate_to(&unwritable, &[]).status.code(), Some(3));
}

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    assert_eq!(simulate_to(&a, &["--seed", "7", "--noise-sd", "1"]).status.code(), Some(0));
    assert_eq!(simulate_to(&b, &["--seed", "7", "--noise-sd", "1"]).status.code(), Some(0));
    assert_eq!(simulate_to(&c, &["--seed", "8", "--noise-sd", "1"]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn seed_environment_variable_wins() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(simulate_to(&a, &["--seed", "7", "--noise-sd", "1"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_trendfair"))
        .args(["simulate", "--subjects", "40", "--share-selfish", "0.5", "--seed", "99", "--noise-sd", "1"])
        .arg("--out")
        .arg(&b)
        .env("TRENDFAIR_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn analyze_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let out_dir = dir.path().join("tables");
    assert_eq!(simulate_to(&data, &["--noise-sd", "0.5"]).status.code(), Some(0));
    let o = trendfair(&[
        "analyze",
        "--input",
        data.to_str().unwrap(),
        "--cutoff",
        "2",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["summary.csv", "wilcoxon.csv", "censoring.csv", "cdf_stable_high.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    assert!(stdout(&o).contains("== summary =="));
}
