use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn tapf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tapf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_two_teams_in_cbm_and_oracle_modes() {
    let inst = data("two_teams.tapf");
    for mode in ["cbm", "oracle", "cbm-unweighted"] {
        let o = tapf(&["solve", path(&inst), "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}");
        assert!(stdout(&o).contains("makespan: 3\n"), "{mode}: {}", stdout(&o));
    }
}

#[test]
fn solve_writes_a_valid_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("two_teams.sol");
    let o = tapf(&["solve", path(&data("two_teams.tapf")), "--out", sol.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = tapf(&["validate", path(&data("two_teams.tapf")), sol.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v), "ok: makespan 3\n");
}

#[test]
fn malformed_instance_is_invalid_input() {
    let o = tapf(&["solve", path(&data("bad.tapf"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let missing = tapf(&["solve", "no/such/file.tapf"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(tapf(&["solve"]).status.code(), Some(2));
    assert_eq!(tapf(&["solve", path(&data("two_teams.tapf")), "--mode", "astar"]).status.code(), Some(2));
    assert_eq!(tapf(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn horizon_cap_and_no_solution_exit_codes() {
    let capped = tapf(&["solve", path(&data("two_teams.tapf")), "--max-t", "2"]);
    assert_eq!(capped.status.code(), Some(6));
    assert!(stdout(&capped).starts_with("outcome: horizon-cap\n"));

    let dir = tempfile::tempdir().unwrap();
    let stuck = dir.path().join("stuck.tapf");
    // two agents on a single edge that both want the other end cannot swap
    fs::write(&stuck, "vertices 2\nedge 0 1\nteams 2\nteam 0: starts 0 targets 1\nteam 1: starts 1 targets 0\n").unwrap();
    let o = tapf(&["solve", stuck.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn validate_reports_swap_and_ragged_horizon() {
    let swap = tapf(&["validate", path(&data("swap.tapf")), path(&data("swap.sol"))]);
    assert_eq!(swap.status.code(), Some(1));
    assert!(stdout(&swap).contains("edge collision"));
    assert!(stdout(&swap).contains("at t=0"));

    let ragged = tapf(&["validate", path(&data("two_teams.tapf")), path(&data("ragged.sol"))]);
    assert_eq!(ragged.status.code(), Some(1));
    assert!(stdout(&ragged).contains("ragged horizon"));
}

#[test]
fn export_ilp_is_deterministic_and_counts_commodities() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.lp");
    let b = dir.path().join("b.lp");
    for out in [&a, &b] {
        let o = tapf(&["export-ilp", path(&data("two_teams.tapf")), "-t", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains("\\ commodities 2\n"));
    assert!(text.ends_with("End\n"));

    let trivial = tapf(&["export-ilp", path(&data("trivial.tapf")), "-t", "0"]);
    assert_eq!(trivial.status.code(), Some(0));
    assert!(stdout(&trivial).contains("snk_0: x_0_1 = 1"));
}

#[test]
fn generate_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g.tapf");
    let o = tapf(&["generate", path(&data("grid.spec")), "--out", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&inst).unwrap().starts_with("grid 8 8\n"));
    let s = tapf(&["solve", inst.to_str().unwrap(), "--no-timing"]);
    assert_eq!(s.status.code(), Some(0));

    let a = tapf(&["generate", path(&data("warehouse.spec")), "--seed", "4"]);
    let b = tapf(&["generate", path(&data("warehouse.spec")), "--seed", "4"]);
    let c = tapf(&["generate", path(&data("warehouse.spec")), "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).contains("flags: shared_start_spread"));
}

#[test]
fn bench_csv_parses_and_repeats() {
    let run = || tapf(&["bench", "--family", path(&data("smoke.family")), "--no-timing"]);
    let first = run();
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, run().stdout);

    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("family,agents,team_size,mode,seed_count,success_rate,mean_makespan,mean_time_s,mean_hl_nodes,mean_ll_calls")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], "smoke");
        let rate: f64 = r[5].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
        assert_eq!(r[7], "NA");
    }
    let modes: Vec<&str> = rows.iter().map(|r| r[3]).collect();
    assert_eq!(modes, ["cbm", "cbm-unweighted", "mapf-random-assign", "oracle"]);
    // cbm and the oracle see the same instances and must agree
    assert_eq!(rows[0][6], rows[3][6]);
}

#[test]
fn solve_output_is_reproducible_without_timing() {
    let run = || tapf(&["solve", path(&data("two_teams.tapf")), "--mode", "mapf-random-assign", "--seed", "9", "--no-timing"]);
    let a = run();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run().stdout);
}
