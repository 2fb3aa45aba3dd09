//! End-to-end checks of the `fishery` binary: artifact layout, byte
//! stability, worker-count independence, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fishery"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn base_text() -> String {
    fs::read_to_string(scenario_path("base_case.json")).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn assert_code(out: &Output, code: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{what}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn check_accepts_the_shipped_scenarios() {
    for name in ["base_case.json", "solo.json"] {
        let out = run(&["check", "--scenario", scenario_path(name).to_str().unwrap()]);
        assert_code(&out, 0, name);
        assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_code(&run(&["no-such-command"]), 1, "unknown subcommand");
    assert_code(&run(&["simulate"]), 1, "missing required flags");
    assert_code(&run(&["--help"]), 0, "help display");
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = run(&["check", "--scenario", missing.to_str().unwrap()]);
    assert_code(&out, 2, "missing file");

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    let out = run(&["check", "--scenario", garbage.to_str().unwrap()]);
    assert_code(&out, 2, "unparsable file");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, base_text().replacen("\"r\": 0.5", "\"r\": -0.5", 1)).unwrap();
    let out = run(&["check", "--scenario", bad.to_str().unwrap()]);
    assert_code(&out, 2, "validation failure");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("species[0].growth.r"),
        "violation must name the field: {stderr}"
    );
}

#[test]
fn unreachable_target_exits_with_four_and_names_the_range() {
    let dir = tempfile::tempdir().unwrap();
    let far = dir.path().join("far.json");
    fs::write(&far, base_text().replacen("\"xT\": 500.0", "\"xT\": 5000.0", 1)).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "optimize",
        "--scenario",
        far.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 4, "unreachable target");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("reachable"), "{stderr}");
}

#[test]
fn stock_collapse_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate",
        "--scenario",
        scenario_path("base_case.json").to_str().unwrap(),
        "--harvest",
        "200",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 3, "collapse under heavy harvest");
}

#[test]
fn exhausted_iteration_budget_exits_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let capped = dir.path().join("capped.json");
    fs::write(
        &capped,
        base_text().replacen("\"max_outer_iters\": 20", "\"max_outer_iters\": 1", 1),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "optimize",
        "--scenario",
        capped.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 5, "one-pass budget");
}

#[test]
fn simulate_writes_a_well_formed_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate",
        "--scenario",
        scenario_path("base_case.json").to_str().unwrap(),
        "--horizon",
        "0.1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "short simulate");
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x_1,x_2,x_3,h_1,h_2,h_3");
    // default steps: ten per year with a floor of two -> three rows
    assert_eq!(lines.len(), 4);
    assert!(csv.ends_with('\n'));
    assert!(!csv.contains('\r'));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 7);
    }
}

#[test]
fn single_species_trajectory_has_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate",
        "--scenario",
        scenario_path("solo.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "solo simulate");
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x_1,h_1\n"));
}

#[test]
fn broadcast_harvest_matches_explicit_list() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let scenario = scenario_path("base_case.json");
    for (out_dir, harvest) in [(&a, "5"), (&b, "5,5,5")] {
        let out = run(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--horizon",
            "3",
            "--harvest",
            harvest,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_code(&out, 0, harvest);
    }
    assert_eq!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn optimize_artifacts_are_byte_stable_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let scenario = scenario_path("base_case.json");
    for out_dir in [&a, &b] {
        let out = run(&[
            "optimize",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_code(&out, 0, "optimize");
    }
    for name in ["solution.csv", "history.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"revenue\""));
    assert!(manifest.contains("\"scenario_sha256\""));
}

#[test]
fn sweep_rows_follow_the_grid_order_and_ignore_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario_path("base_case.json");
    let run_sweep = |out_dir: &Path, workers: &str, grid: &str| {
        let out = bin()
            .args([
                "sweep-k",
                "--scenario",
                scenario.to_str().unwrap(),
                "--species",
                "1",
                "--k-grid",
                grid,
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .env("FISHERY_WORKERS", workers)
            .output()
            .unwrap();
        assert_code(&out, 0, "sweep-k");
    };
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    run_sweep(&a, "1", "1.2,0.4,0.8");
    run_sweep(&b, "4", "1.2,0.4,0.8");
    run_sweep(&c, "1", "0.8,0.4,1.2");

    let csv_a = fs::read_to_string(a.join("sweep.csv")).unwrap();
    let csv_b = fs::read_to_string(b.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "worker count changed the artifact");

    let ks: Vec<&str> = csv_a
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ks, ["1.20000", "0.400000", "0.800000"]);

    // same K set in a different order: same values, reordered rows
    let csv_c = fs::read_to_string(c.join("sweep.csv")).unwrap();
    let mut sorted_a: Vec<&str> = csv_a.lines().skip(1).collect();
    let mut sorted_c: Vec<&str> = csv_c.lines().skip(1).collect();
    sorted_a.sort_unstable();
    sorted_c.sort_unstable();
    assert_eq!(sorted_a, sorted_c);

    for k in ["1.20000", "0.400000", "0.800000"] {
        assert!(a.join(format!("path_k_{k}.csv")).exists());
    }
}

#[test]
fn single_point_sweep_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep-k",
        "--scenario",
        scenario_path("solo.json").to_str().unwrap(),
        "--species",
        "1",
        "--k-grid",
        "0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "single-point sweep");
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "K,terminal_stock,feasible_flag");
    assert!(lines[1].starts_with("0.00000,"));
    assert!(lines[1].ends_with(",true"));
    assert!(out_dir.join("path_k_0.00000.csv").exists());
}

#[test]
fn out_of_range_species_is_a_usage_level_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep-k",
        "--scenario",
        scenario_path("solo.json").to_str().unwrap(),
        "--species",
        "2",
        "--k-grid",
        "0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 2, "species out of range");
}

#[test]
fn horizon_study_reports_each_horizon_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep-horizon",
        "--scenario",
        scenario_path("solo.json").to_str().unwrap(),
        "--species",
        "1",
        "--horizons",
        "11,10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "horizon study");
    let csv = fs::read_to_string(out_dir.join("horizons.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "T,max_terminal_stock");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("11.0000,"));
    assert!(lines[2].starts_with("10.0000,"));
}

#[test]
fn manifest_digest_tracks_the_scenario_content() {
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("copy.json");
    fs::write(&copy, base_text()).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run_sim = |scenario: &Path, out_dir: &Path| {
        let out = run(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--horizon",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_code(&out, 0, "simulate for digest");
    };
    run_sim(&copy, &a);
    fs::write(&copy, base_text().replacen("\"r\": 0.5", "\"r\": 0.51", 1)).unwrap();
    run_sim(&copy, &b);

    let digest = |dir: &Path| -> String {
        let manifest = fs::read_to_string(dir.join("manifest.json")).unwrap();
        manifest
            .lines()
            .find(|l| l.contains("scenario_sha256"))
            .unwrap()
            .to_string()
    };
    assert_ne!(digest(&a), digest(&b), "digest ignored a content change");
}

#[test]
fn solo_scenario_converges_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "optimize",
        "--scenario",
        scenario_path("solo.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "solo optimize");
    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines[0], "iter,K_1,objective");
    assert_eq!(lines.len(), 3, "one substantive pass plus confirmation");
}
