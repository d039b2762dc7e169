//! End-to-end tests against the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXAMPLE_A: &str = "artist,u1,u2\na,10,0\nb,20,0\nc,0,70\n";
const EXAMPLE_B: &str = "artist,u1,u2,u3\nx,1,1,1\ny,1,1,95\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_streamclaims"))
}

fn write_fixture(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn allocate_pro_rata_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&["allocate", "--input", input.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("0.200000"), "{stdout}");
    assert!(stdout.contains("0.400000"), "{stdout}");
    assert!(stdout.contains("1.400000"), "{stdout}");
    assert!(stdout.contains("total"), "{stdout}");
    assert!(stdout.contains("2.000000"), "{stdout}");
}

#[test]
fn allocate_json_totals_and_precision() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "user-centric",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(body["method"], "user-centric");
    assert_eq!(body["total"], 2.0);
    let rewards = body["rewards"].as_array().unwrap();
    assert_eq!(rewards.len(), 3);
    let first = rewards[0]["reward"].as_f64().unwrap();
    assert!((first - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn allocate_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "artist,reward");
    assert_eq!(lines[1], "a,0.2");
    assert_eq!(lines[2], "b,0.4");
    assert_eq!(lines[3], "c,1.4");
    assert_eq!(lines[4], "total,2");
}

#[test]
fn allocate_two_stage_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "b.csv", EXAMPLE_B);
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "two-stage:prop,cea",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let rewards = body["rewards"].as_array().unwrap();
    assert!((rewards[0]["reward"].as_f64().unwrap() - 1.06).abs() < 1e-9);
    assert!((rewards[1]["reward"].as_f64().unwrap() - 1.94).abs() < 1e-9);

    let stage = body["breakdown"]["first_stage"].as_array().unwrap();
    let awards: Vec<f64> = stage.iter().map(|s| s["award"].as_f64().unwrap()).collect();
    let levels: Vec<f64> = stage
        .iter()
        .map(|s| s["award_level"].as_f64().unwrap())
        .collect();
    for (value, expected) in awards.iter().zip([0.06, 0.06, 2.88]) {
        assert!((value - expected).abs() < 1e-9);
    }
    for (value, expected) in levels.iter().zip([0.03, 0.03, 1.88]) {
        assert!((value - expected).abs() < 1e-9);
    }

    let matrix = body["breakdown"]["awards"].as_array().unwrap();
    let y_row = matrix[1]["by_user"].as_array().unwrap();
    assert!((y_row[2].as_f64().unwrap() - 1.88).abs() < 1e-9);
}

#[test]
fn allocate_respects_price() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "shapley",
        "--price",
        "2.5",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(body["total"], 5.0);
    let rewards = body["rewards"].as_array().unwrap();
    assert!((rewards[0]["reward"].as_f64().unwrap() - 1.25).abs() < 1e-12);
}

#[test]
fn weighted_method_reads_the_weights_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    // Equal weights reduce the weighted index to pro-rata.
    let weights = write_fixture(dir.path(), "w.csv", "user,weight\nu1,0.5\nu2,0.5\n");
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        &format!("weighted:{}", weights.display()),
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("a,0.2"), "{stdout}");
    assert!(stdout.contains("c,1.4"), "{stdout}");
}

#[test]
fn weighted_method_rejects_incomplete_or_bad_weights() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);

    let missing = write_fixture(dir.path(), "missing.csv", "user,weight\nu1,0.5\n");
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        &format!("weighted:{}", missing.display()),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("missing user u2"));

    let negative = write_fixture(dir.path(), "neg.csv", "user,weight\nu1,0.5\nu2,-1\n");
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        &format!("weighted:{}", negative.display()),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("positive"));

    let unknown = write_fixture(
        dir.path(),
        "unknown.csv",
        "user,weight\nu1,0.5\nu2,0.5\nghost,1\n",
    );
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        &format!("weighted:{}", unknown.display()),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("unknown user ghost"));
}

#[test]
fn parse_errors_carry_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "bad.csv", "artist,u1,u2\na,3,x\n");
    let output = run(&["allocate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("bad.csv:2:3"), "{stderr}");
}

#[test]
fn zero_stream_user_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "zero.csv", "artist,u1,silent\na,3,0\n");
    let output = run(&["allocate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("silent"));
}

#[test]
fn duplicate_ids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "dup.csv", "artist,u1,u1\na,3,1\n");
    let output = run(&["allocate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("duplicate"));
}

#[test]
fn verify_input_passes_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&["verify", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", stdout_of(&output));
    assert!(stdout_of(&output).contains("20/20 checks passed"));
}

#[test]
fn verify_trials_json_is_byte_identical_across_runs() {
    let args = [
        "verify",
        "--trials",
        "4",
        "--seed",
        "42",
        "--artists",
        "5",
        "--users",
        "4",
        "--max-streams",
        "12",
        "--format",
        "json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&first)).unwrap();
    assert_eq!(body["summary"]["instances"], 4);
    assert_eq!(body["summary"]["failed"], 0);
    assert_eq!(body["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_exit_code_matches_the_report() {
    // A zero tolerance makes floating-point noise count as failure; the
    // exit code must agree with the emitted summary either way.
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "b.csv", EXAMPLE_B);
    let output = run(&[
        "verify",
        "--input",
        input.to_str().unwrap(),
        "--tol",
        "0",
        "--format",
        "json",
    ]);
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let failed = body["summary"]["failed"].as_u64().unwrap();
    let expected = if failed == 0 { 0 } else { 1 };
    assert_eq!(output.status.code(), Some(expected));
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("one.csv");
    let second = dir.path().join("two.csv");
    for path in [&first, &second] {
        let output = run(&[
            "gen",
            "--seed",
            "9",
            "--artists",
            "3",
            "--users",
            "4",
            "--max-streams",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(bytes, std::fs::read(&second).unwrap());

    // The generated file is valid input for the other subcommands.
    let output = run(&["verify", "--input", first.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let output = run(&[
        "allocate",
        "--input",
        first.to_str().unwrap(),
        "--method",
        "shapley",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(body["total"], 4.0);
}

#[test]
fn unknown_method_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "a.csv", EXAMPLE_A);
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "talmud",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("unknown method"));
}

#[test]
fn single_cell_matrix_gives_everything_to_the_only_artist() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "one.csv", "artist,u1\nsolo,7\n");
    let output = run(&[
        "allocate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "shapley",
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("solo,1\n"), "{stdout}");
}
