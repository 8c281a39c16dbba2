//! End-to-end tests of the `lefschetz` binary: file loading, command
//! behavior, exit codes, and report determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lefschetz"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", stdout(output));
    })
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.0.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn write_elliptic_word(dir: &Dir, name: &str, copies: usize, boundary: usize) -> PathBuf {
    let mut letters = Vec::new();
    for _ in 0..copies {
        letters.push(serde_json::json!({"class": [1, 0]}));
        letters.push(serde_json::json!({"class": [0, 1]}));
    }
    let value = serde_json::json!({
        "genus": 1,
        "boundary_count": boundary,
        "letters": letters,
    });
    dir.file(name, &value.to_string())
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn apply_reproduces_the_three_step_run() {
    let dir = Dir::new();
    let pencil = dir.file("p.json", r#"{"genus": 6, "exceptional_data": [10]}"#);
    let output = run(&["pencil", "apply", arg(&pencil), "9,13,8", "--json"]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["final"]["genus"].as_u64(), Some(111));
    assert_eq!(
        value["final"]["exceptional_data"],
        serde_json::json!([32, 0, 44, 23, 1])
    );
    assert_eq!(value["blowup_count"].as_u64(), Some(100));
    assert_eq!(value["cross_check"], "pass");
    assert_eq!(value["trace"].as_array().unwrap().len(), 7);
}

#[test]
fn apply_canonicalizes_trailing_zeros() {
    let dir = Dir::new();
    let pencil = dir.file("p.json", r#"{"genus": 2, "exceptional_data": [3, 0, 0]}"#);
    let output = run(&["pencil", "apply", arg(&pencil), "[]", "--json"]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["start"]["exceptional_data"], serde_json::json!([3]));
    assert_eq!(value["blowup_count"].as_u64(), Some(3));
}

#[test]
fn negative_entries_are_input_errors() {
    let dir = Dir::new();
    let pencil = dir.file("p.json", r#"{"genus": 2, "exceptional_data": [-1]}"#);
    let output = run(&["pencil", "apply", arg(&pencil), "1"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("negative"));
}

#[test]
fn strict_mode_rejects_unknown_fields() {
    let dir = Dir::new();
    let pencil = dir.file(
        "p.json",
        r#"{"genus": 6, "exceptional_data": [10], "extra": 1}"#,
    );
    let output = run(&["pencil", "apply", arg(&pencil), "[]"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("unknown field"));
    let output = run(&["pencil", "apply", arg(&pencil), "[]", "--no-strict"]);
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn strict_mode_rejects_hypothesis_violations() {
    let dir = Dir::new();
    let pencil = dir.file("p.json", r#"{"genus": 2, "exceptional_data": [10]}"#);
    // k = 10 > 2g - 2 = 2.
    let output = run(&["pencil", "apply", arg(&pencil), "10"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("doubling hypothesis"));
    let output = run(&[
        "pencil",
        "apply",
        arg(&pencil),
        "10",
        "--no-strict",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(json(&output)["final"]["genus"].as_u64(), Some(13));
}

#[test]
fn family_command_matches_published_values() {
    let output = run(&[
        "pencil", "family", "--m0", "10", "--n", "1", "--g0", "6", "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["sequence"], serde_json::json!([9, 13, 8]));
    assert_eq!(value["final_data"], serde_json::json!([32, 0, 44, 23, 1]));
    assert_eq!(value["genus"].as_u64(), Some(111));
    assert_eq!(value["simulation_check"], "pass");

    let output = run(&["pencil", "family", "--m0", "10", "--n", "5"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("7n/3"));
}

#[test]
fn search_verify_round_trip() {
    let dir = Dir::new();
    let output = run(&[
        "pencil", "search", "--g0", "6", "--m0", "10", "--count", "5", "--max-d", "3", "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let report = dir.file("family.json", &stdout(&output));
    let verify = run(&["pencil", "verify", arg(&report)]);
    assert_eq!(exit_code(&verify), 0);

    // Tampering with a dataset makes verification fail with exit 1.
    let mut value = json(&output);
    value["family"]["datasets"][0][0] = serde_json::json!(7);
    let tampered = dir.file("tampered.json", &value["family"].to_string());
    let verify = run(&["pencil", "verify", arg(&tampered)]);
    assert_eq!(exit_code(&verify), 1);
    assert!(stdout(&verify).contains("dataset-match: FAIL"));
}

#[test]
fn search_partial_results_use_exit_code_3() {
    let output = run(&[
        "pencil",
        "search",
        "--g0",
        "2",
        "--m0",
        "2",
        "--count",
        "5",
        "--max-d",
        "2",
        "--k-bound",
        "8",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 3);
    let value = json(&output);
    assert_eq!(value["complete"], serde_json::Value::Bool(false));
    assert!(value["found"].as_u64().unwrap() < 5);
}

#[test]
fn signature_and_euler_of_the_elliptic_words() {
    let dir = Dir::new();
    let word6 = write_elliptic_word(&dir, "w6.json", 6, 0);
    let output = run(&["mcg", "signature", arg(&word6), "--json"]);
    let value = json(&output);
    assert_eq!(value["value"].as_i64(), Some(-8));
    assert_eq!(
        value["boundary_relation_holds"],
        serde_json::Value::Bool(true)
    );
    let output = run(&["mcg", "euler", arg(&word6), "--json"]);
    assert_eq!(json(&output)["value"].as_i64(), Some(12));

    // Pencil mode with one base point.
    let pencil_word = write_elliptic_word(&dir, "wp.json", 6, 1);
    let output = run(&["mcg", "signature", arg(&pencil_word), "--pencil", "--json"]);
    assert_eq!(json(&output)["value"].as_i64(), Some(-7));
    let output = run(&["mcg", "euler", arg(&pencil_word), "--pencil", "--json"]);
    assert_eq!(json(&output)["value"].as_i64(), Some(11));
}

#[test]
fn product_of_the_identity_word() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 6, 0);
    let output = run(&["mcg", "product", arg(&word), "--json"]);
    let value = json(&output);
    assert_eq!(value["is_identity"], serde_json::Value::Bool(true));
    assert_eq!(value["matrix"], serde_json::json!([[1, 0], [0, 1]]));
}

#[test]
fn hurwitz_moves_round_trip_through_files() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 1, 0);
    let output = run(&[
        "mcg",
        "hurwitz",
        arg(&word),
        "--index",
        "1",
        "--dir",
        "right",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["letters"][0]["class"], serde_json::json!([0, 1]));
    assert_eq!(value["letters"][1]["class"], serde_json::json!([1, -1]));

    // Feed the output back and undo the move.
    let moved = dir.file("moved.json", &stdout(&output));
    let output = run(&[
        "mcg",
        "hurwitz",
        arg(&moved),
        "--index",
        "1",
        "--dir",
        "left",
        "--json",
    ]);
    let back = json(&output);
    assert_eq!(back["letters"][0]["class"], serde_json::json!([1, 0]));
    assert_eq!(back["letters"][1]["class"], serde_json::json!([0, 1]));

    let output = run(&[
        "mcg",
        "hurwitz",
        arg(&word),
        "--index",
        "2",
        "--dir",
        "right",
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn conjugate_preserves_signature_and_enforces_stabilizers() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 6, 0);
    let output = run(&[
        "mcg",
        "conjugate",
        arg(&word),
        "--range",
        "1..12",
        "--alpha",
        "0,1",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let conjugated = dir.file("conjugated.json", &stdout(&output));
    let sig = run(&["mcg", "signature", arg(&conjugated), "--json"]);
    assert_eq!(json(&sig)["value"].as_i64(), Some(-8));

    // A subword that fixes nothing is rejected in strict mode...
    let output = run(&[
        "mcg",
        "conjugate",
        arg(&word),
        "--range",
        "1..3",
        "--alpha",
        "1,1",
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("stabilize"));
    // ...and allowed with --no-strict.
    let output = run(&[
        "mcg",
        "conjugate",
        arg(&word),
        "--range",
        "1..3",
        "--alpha",
        "1,1",
        "--no-strict",
    ]);
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn twisted_conjugation_needs_the_flag() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 3, 0);
    // The 6-letter half-word product is -I, which reverses every class.
    let args = [
        "mcg",
        "conjugate",
        arg(&word),
        "--range",
        "1..6",
        "--alpha",
        "1,0",
    ];
    let output = run(&args);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("reverses"));
    let output = bin().args(args).arg("--allow-twisted").output().unwrap();
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn fingerprint_reports_rank_and_orbit() {
    let dir = Dir::new();
    let single = dir.file(
        "single.json",
        r#"{"genus": 1, "boundary_count": 0, "letters": [{"class": [1, 0]}]}"#,
    );
    let output = run(&["mcg", "fingerprint", arg(&single), "--cap", "10", "--json"]);
    let value = json(&output);
    assert_eq!(value["span_rank"].as_u64(), Some(1));
    assert_eq!(value["orbit_size"].as_u64(), Some(1));
    assert_eq!(value["orbit_truncated"], serde_json::Value::Bool(false));
}

#[test]
fn separating_letters_must_be_flagged() {
    let dir = Dir::new();
    let bad = dir.file(
        "bad.json",
        r#"{"genus": 1, "boundary_count": 0, "letters": [{"class": [0, 0]}]}"#,
    );
    let output = run(&["mcg", "product", arg(&bad)]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("separating"));

    let good = dir.file(
        "good.json",
        r#"{"genus": 1, "boundary_count": 0,
            "letters": [{"class": [0, 0], "separating": true}, {"class": [1, 0]}]}"#,
    );
    let output = run(&["mcg", "product", arg(&good), "--json"]);
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn class_length_errors_name_the_letter() {
    let dir = Dir::new();
    let bad = dir.file(
        "bad.json",
        r#"{"genus": 2, "boundary_count": 0,
            "letters": [{"class": [1, 0, 0, 0]}, {"class": [1, 0, 0]}]}"#,
    );
    let output = run(&["mcg", "product", arg(&bad)]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("letter 1"));
}

#[test]
fn orbit_command_reports_commuting_pair() {
    let dir = Dir::new();
    let pair = dir.file(
        "pair.json",
        r#"{"genus": 2, "boundary_count": 0,
            "letters": [{"class": [1, 0, 0, 0]}, {"class": [0, 1, 0, 0]}]}"#,
    );
    let output = run(&[
        "orbit",
        arg(&pair),
        "--depth",
        "5",
        "--size",
        "50",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["visited"].as_u64(), Some(2));
    assert_eq!(value["truncated"], serde_json::Value::Bool(false));
    assert_eq!(value["words"].as_array().unwrap().len(), 2);

    // Truncation exits with 3.
    let word = write_elliptic_word(&dir, "w.json", 2, 0);
    let output = run(&["orbit", arg(&word), "--depth", "2", "--size", "5", "--json"]);
    assert_eq!(exit_code(&output), 3);
    assert_eq!(json(&output)["truncated"], serde_json::Value::Bool(true));
}

#[test]
fn orbit_with_conjugators_uses_the_extended_move_set() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 1, 0);
    let conjugators = dir.file("conj.json", "[[0, 1]]");
    let output = run(&[
        "orbit",
        arg(&word),
        "--depth",
        "1",
        "--size",
        "10",
        "--conjugators",
        arg(&conjugators),
        "--json",
    ]);
    let value = json(&output);
    assert_eq!(value["move_set"], "hurwitz+partial-conjugation");
}

#[test]
fn equiv_command_verdicts_and_exit_codes() {
    let dir = Dir::new();
    let one = write_elliptic_word(&dir, "one.json", 1, 0);
    let two = write_elliptic_word(&dir, "two.json", 2, 0);
    let output = run(&[
        "equiv",
        arg(&one),
        arg(&two),
        "--depth",
        "2",
        "--size",
        "10",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(json(&output)["verdict"], "no");

    let swapped = dir.file(
        "swapped.json",
        r#"{"genus": 1, "boundary_count": 0,
            "letters": [{"class": [0, 1]}, {"class": [1, -1]}]}"#,
    );
    let output = run(&[
        "equiv",
        arg(&one),
        arg(&swapped),
        "--depth",
        "1",
        "--size",
        "10",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["verdict"], "yes");
    assert!(value["caveat"].as_str().unwrap().contains("homology"));

    // Same word lengths and screens, but caps too small to connect: unknown.
    let three = write_elliptic_word(&dir, "three.json", 3, 0);
    let far = {
        let raw = std::fs::read_to_string(&three).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&raw).unwrap();
        // Swap two commuting-for-the-move pairs by hand via the binary.
        drop(raw);
        let path = dir.path("far.json");
        std::fs::write(&path, value.to_string()).unwrap();
        for index in ["1", "3", "5"] {
            let output = run(&[
                "mcg",
                "hurwitz",
                arg(&path),
                "--index",
                index,
                "--dir",
                "right",
                "--json",
            ]);
            assert_eq!(exit_code(&output), 0);
            value = json(&output);
            std::fs::write(&path, value.to_string()).unwrap();
        }
        path
    };
    let output = run(&[
        "equiv",
        arg(&three),
        arg(&far),
        "--depth",
        "1",
        "--size",
        "3",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 3);
    assert_eq!(json(&output)["verdict"], "unknown");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = Dir::new();
    let word = write_elliptic_word(&dir, "w.json", 2, 0);
    let args = [
        "orbit",
        arg(&word),
        "--depth",
        "2",
        "--size",
        "30",
        "--seed",
        "7",
        "--json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let value = json(&first);
    assert_eq!(value["seed"].as_u64(), Some(7));
}

#[test]
fn factorization_serialization_is_idempotent() {
    let dir = Dir::new();
    // Loading canonicalizes; a second load-and-serialize changes nothing.
    let word = write_elliptic_word(&dir, "w.json", 1, 0);
    let once = run(&[
        "mcg",
        "hurwitz",
        arg(&word),
        "--index",
        "1",
        "--dir",
        "right",
        "--json",
    ]);
    let moved = dir.file("moved.json", &stdout(&once));
    let round = run(&[
        "mcg",
        "hurwitz",
        arg(&moved),
        "--index",
        "1",
        "--dir",
        "left",
        "--json",
    ]);
    let back = dir.file("back.json", &stdout(&round));
    let forth = run(&[
        "mcg",
        "hurwitz",
        arg(&back),
        "--index",
        "1",
        "--dir",
        "right",
        "--json",
    ]);
    assert_eq!(once.stdout, forth.stdout);
}

#[test]
fn jobs_flag_is_validated() {
    let dir = Dir::new();
    let pencil = dir.file("p.json", r#"{"genus": 6, "exceptional_data": [10]}"#);
    let output = run(&["pencil", "apply", arg(&pencil), "[]", "--jobs", "0"]);
    assert_eq!(exit_code(&output), 2);
    let output = run(&["pencil", "apply", arg(&pencil), "[]", "--jobs", "4"]);
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn integers_beyond_64_bits_survive_as_decimal_strings() {
    let dir = Dir::new();
    // 2^80 base points, accepted as a decimal string on input.
    let pencil = dir.file(
        "big.json",
        r#"{"genus": 2, "exceptional_data": ["1208925819614629174706176"]}"#,
    );
    let output = run(&["pencil", "apply", arg(&pencil), "[]", "--json"]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(
        value["blowup_count"],
        serde_json::json!("1208925819614629174706176")
    );
    assert_eq!(
        value["start"]["exceptional_data"][0],
        serde_json::json!("1208925819614629174706176")
    );

    // 63 consecutive full doubles of a one-point genus-2 pencil push the
    // genus to 2^64, past the JSON number range.
    let small = dir.file("small.json", r#"{"genus": 2, "exceptional_data": [1]}"#);
    let ones = vec!["1"; 63].join(",");
    let output = run(&["pencil", "apply", arg(&small), &ones, "--json"]);
    assert_eq!(exit_code(&output), 0);
    let value = json(&output);
    assert_eq!(value["cross_check"], "pass");
    assert_eq!(
        value["final"]["genus"],
        serde_json::json!("18446744073709551616")
    );
    assert_eq!(value["blowup_count"].as_u64(), Some(190));
}
