//! Binary-level tests: exit codes, stdout/file parity, determinism, the
//! run log, and config-file precedence, exercised through the installed
//! executable exactly as a user would run it.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multikrum_cli::formats::{parse_csv, SearchResultFile, TransitionJson, BOUNDS_CSV_HEADER};
use multikrum_cli::runlog::{RunRecord, RunStatus};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multikrum"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process not killed by signal")
}

fn read_log(path: &Path) -> Vec<RunRecord> {
    std::fs::read_to_string(path)
        .expect("log exists")
        .lines()
        .map(|line| serde_json::from_str(line).expect("log line parses"))
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let help = run_in(dir.path(), &["--help"]);
    assert_eq!(exit_code(&help), 0);
    let text = stdout_of(&help);
    for sub in ["bounds", "transition", "search", "verify", "aggregate"] {
        assert!(text.contains(sub), "help lists {sub}: {text}");
    }
    let version = run_in(dir.path(), &["--version"]);
    assert_eq!(exit_code(&version), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // Missing required value.
    let out = run_in(dir.path(), &["bounds", "--log", "l.jsonl"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("--n"), "{}", stderr_of(&out));
    // Unknown subcommand and unknown flag are parser errors.
    assert_eq!(exit_code(&run_in(dir.path(), &["frobnicate"])), 1);
    assert_eq!(exit_code(&run_in(dir.path(), &["bounds", "--wat", "1"])), 1);
    // Parameter outside the regime: n - 2f >= 1 fails.
    let out = run_in(dir.path(), &["bounds", "--n", "10", "--f", "5", "--log", "l.jsonl"]);
    assert_eq!(exit_code(&out), 1);
    // Transition modes are mutually exclusive.
    let out = run_in(
        dir.path(),
        &["transition", "--n", "100", "--f", "10", "--ratios", "0.1", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn bounds_stdout_matches_the_written_file() {
    let dir = tempfile::tempdir().unwrap();
    let piped = run_in(dir.path(), &["bounds", "--n", "10", "--f", "2", "--log", "l.jsonl"]);
    assert_eq!(exit_code(&piped), 0);
    let filed = run_in(
        dir.path(),
        &["bounds", "--n", "10", "--f", "2", "--out", "table.csv", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&filed), 0);
    assert!(stdout_of(&filed).contains("table.csv"), "summary names the file");
    let file_text = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(stdout_of(&piped), file_text, "stdout and file carry identical bytes");
    let csv = parse_csv(&file_text).unwrap();
    assert_eq!(csv.header.join(","), BOUNDS_CSV_HEADER);
    assert_eq!(csv.rows.len(), 8, "m runs 1..=n-f");
}

#[test]
fn search_example_attains_the_construction_floor_and_stays_sound() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "search", "--n", "10", "--f", "2", "--m", "8", "--seed", "42", "--restarts", "64",
        "--iterations", "50", "--no-timestamp", "--out", "a.json", "--log", "l.jsonl",
    ];
    let first = run_in(dir.path(), &args);
    assert_eq!(exit_code(&first), 0, "{}", stderr_of(&first));
    assert!(stdout_of(&first).contains("best_ratio = "));
    assert!(stdout_of(&first).contains("upper_bound = "));

    let parsed: SearchResultFile =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert!(parsed.best_ratio >= 1.333332, "construction floor: {}", parsed.best_ratio);
    assert!(parsed.best_ratio <= parsed.upper_bound + 1e-9, "soundness");

    // Identical flags, second file: byte-identical certificate.
    let mut args_b = args;
    args_b[15] = "b.json";
    let second = run_in(dir.path(), &args_b);
    assert_eq!(exit_code(&second), 0);
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap(),
        "reruns are byte-identical"
    );
    // Stdout differs only in the `result -> <path>` trailer.
    let values = |o: &Output| stdout_of(o).lines().take(4).map(String::from).collect::<Vec<_>>();
    assert_eq!(values(&first), values(&second));

    // A different seed may land elsewhere but must stay sound.
    let mut args_c = args;
    args_c[8] = "43";
    args_c[15] = "c.json";
    let third = run_in(dir.path(), &args_c);
    assert_eq!(exit_code(&third), 0);
    let parsed: SearchResultFile =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert!(parsed.best_ratio <= parsed.upper_bound + 1e-9);
}

#[test]
fn run_log_records_success_error_and_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("audit.jsonl");
    let log_str = log.to_str().unwrap();

    let ok = run_in(
        dir.path(),
        &["bounds", "--n", "10", "--f", "2", "--out", "t.csv", "--log", log_str, "--no-timestamp"],
    );
    assert_eq!(exit_code(&ok), 0);
    let bad = run_in(dir.path(), &["bounds", "--n", "10", "--f", "5", "--log", log_str]);
    assert_eq!(exit_code(&bad), 1);

    let records = read_log(&log);
    assert_eq!(records.len(), 2, "one line per executed command");
    assert_eq!(records[0].command, "bounds");
    assert_eq!(records[0].status, RunStatus::Ok);
    assert_eq!(records[0].parameters.get("n").map(String::as_str), Some("10"));
    assert_eq!(records[0].parameters.get("f").map(String::as_str), Some("2"));
    assert_eq!(records[0].outputs, vec!["t.csv".to_string()]);
    assert!(records[0].timestamp.is_none(), "--no-timestamp suppresses the stamp");
    for output in &records[0].outputs {
        assert!(dir.path().join(output).exists(), "status ok implies outputs exist");
    }
    assert_eq!(records[1].status, RunStatus::Error);
    assert!(records[1].outputs.is_empty());
    assert!(records[1].timestamp.is_some(), "stamped by default");
}

#[test]
fn default_log_path_is_runs_jsonl_in_the_working_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["bounds", "--n", "6", "--f", "1"]);
    assert_eq!(exit_code(&out), 0);
    let records = read_log(&dir.path().join("runs.jsonl"));
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].command, "bounds");
}

#[test]
fn config_file_fills_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.conf"),
        "# experiment defaults\nn = 10\nf = 2\nm-max = 4\nno-timestamp = true\nlog = conf.jsonl\n",
    )
    .unwrap();

    let from_config = run_in(dir.path(), &["bounds", "--config", "exp.conf"]);
    assert_eq!(exit_code(&from_config), 0, "{}", stderr_of(&from_config));
    let csv = parse_csv(&stdout_of(&from_config)).unwrap();
    assert_eq!(csv.rows.len(), 4, "m-max from config trims the table");
    let krum_from_config = csv.column_f64("krum_lower").unwrap()[0];

    // An explicit flag beats the config value (f: 2 -> 3).
    let overridden = run_in(dir.path(), &["bounds", "--config", "exp.conf", "--f", "3"]);
    assert_eq!(exit_code(&overridden), 0);
    let csv = parse_csv(&stdout_of(&overridden)).unwrap();
    let krum_overridden = csv.column_f64("krum_lower").unwrap()[0];
    assert_ne!(krum_from_config, krum_overridden, "f really changed");

    // Config-provided log path and timestamp suppression were honored.
    let records = read_log(&dir.path().join("conf.jsonl"));
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.timestamp.is_none()));

    // Malformed config is a usage error.
    std::fs::write(dir.path().join("bad.conf"), "nonsense line\n").unwrap();
    let bad = run_in(dir.path(), &["bounds", "--config", "bad.conf", "--n", "6", "--f", "1"]);
    assert_eq!(exit_code(&bad), 1);
    assert!(stderr_of(&bad).contains("line 1"), "{}", stderr_of(&bad));
}

#[test]
fn aggregate_reads_points_and_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("points.json"), "{\"points\": [[0.0], [1.0]]}").unwrap();
    let mean = run_in(
        dir.path(),
        &["aggregate", "--input", "points.json", "--rule", "mean", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&mean), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&mean)).unwrap();
    assert_eq!(value["aggregate"], serde_json::json!([0.5]));
    assert_eq!(value["rule"], "mean");

    let multikrum = run_in(
        dir.path(),
        &[
            "aggregate", "--input", "points.json", "--rule", "multikrum", "--f", "0", "--m", "2",
            "--log", "l.jsonl",
        ],
    );
    assert_eq!(exit_code(&multikrum), 0);
    let mk: serde_json::Value = serde_json::from_str(&stdout_of(&multikrum)).unwrap();
    assert_eq!(mk["aggregate"], value["aggregate"], "m = n multikrum equals the mean");

    std::fs::write(dir.path().join("broken.json"), "{\"points\": [[0.0], [\"x\"]]}").unwrap();
    let bad = run_in(
        dir.path(),
        &["aggregate", "--input", "broken.json", "--rule", "mean", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&bad), 1);
    let err = stderr_of(&bad);
    assert!(err.contains("broken.json") && err.contains("line"), "{err}");

    let missing = run_in(
        dir.path(),
        &["aggregate", "--input", "absent.json", "--rule", "mean", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&missing), 1);
}

#[test]
fn transition_single_and_sweep_modes_work_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let single = run_in(
        dir.path(),
        &["transition", "--n", "100", "--f", "10", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&single), 0);
    let report: TransitionJson = serde_json::from_str(&stdout_of(&single)).unwrap();
    assert_eq!((report.n, report.f), (100, 10));
    assert_eq!(report.m_dagger_int, Some(39));

    let sweep = run_in(
        dir.path(),
        &[
            "transition", "--ratios", "0.1,0.01", "--n-list", "1000", "--out", "sweep.csv",
            "--log", "l.jsonl",
        ],
    );
    assert_eq!(exit_code(&sweep), 0, "{}", stderr_of(&sweep));
    let csv =
        parse_csv(&std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(csv.rows.len(), 2);
    let ns = csv.column_f64("n").unwrap();
    assert!(ns.iter().all(|v| *v == Some(1000.0)));
}

#[test]
fn verify_passes_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["verify", "--trials", "10", "--seed", "7", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("5/5 lemma suites passed"), "{text}");
    assert!(text.contains("verify: PASS"), "{text}");
    let records = read_log(&dir.path().join("l.jsonl"));
    assert_eq!(records[0].seed, Some(7));
    assert_eq!(records[0].status, RunStatus::Ok);
}

#[test]
fn emitted_files_are_reparseable_by_the_library_readers() {
    // Round-trip property: everything the binary writes, the crate's own
    // readers accept.
    let dir = tempfile::tempdir().unwrap();
    let bounds = run_in(
        dir.path(),
        &["bounds", "--n", "12", "--f", "3", "--out", "b.csv", "--log", "l.jsonl"],
    );
    assert_eq!(exit_code(&bounds), 0);
    parse_csv(&std::fs::read_to_string(dir.path().join("b.csv")).unwrap()).unwrap();

    let search = run_in(
        dir.path(),
        &[
            "search", "--n", "7", "--f", "2", "--m", "5", "--seed", "9", "--restarts", "3",
            "--iterations", "20", "--out", "s.json", "--log", "l.jsonl",
        ],
    );
    assert_eq!(exit_code(&search), 0, "{}", stderr_of(&search));
    let result = multikrum_cli::formats::load_search_result(&dir.path().join("s.json")).unwrap();
    let scenario = result.scenario.clone().into_scenario().unwrap();
    let replay = scenario.ratio().unwrap().ratio;
    assert!((replay - result.best_ratio).abs() <= 1e-12, "certificate replays");
}

#[test]
fn out_and_seed_accept_config_values_too() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.conf"), "seed = 42\nout = via-config.json\n").unwrap();
    let run = run_in(
        dir.path(),
        &[
            "search", "--n", "7", "--f", "2", "--m", "5", "--restarts", "2", "--iterations",
            "10", "--config", "s.conf", "--log", "l.jsonl",
        ],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_of(&run));
    let path: PathBuf = dir.path().join("via-config.json");
    assert!(path.exists(), "out came from the config file");
    let parsed = multikrum_cli::formats::load_search_result(&path).unwrap();
    assert_eq!(parsed.seed, 42, "seed came from the config file");
}
