use std::process::{Command, Output};

use superres_cli::figures::{run_figure, FigureOptions, FIGURES};

fn superres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superres"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn every_figure_builds_with_metadata_and_header() {
    let opts = FigureOptions {
        points: Some(7),
        ..Default::default()
    };
    for id in FIGURES {
        let ds = run_figure(id, &opts).unwrap();
        let csv = ds.to_csv();
        assert!(csv.starts_with(&format!("# id: {id}\n")), "{id}");
        assert!(csv.contains("# version: "), "{id}");
        assert!(csv.contains("# delta: "), "{id}");
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert!(header.ends_with(",note"), "{id}: {header}");
        assert!(ds.rows.iter().any(|r| r.values.is_some()), "{id} has no evaluated rows");
    }
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let out = superres(&["figure", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("fig9"));
}

#[test]
fn bad_flag_exits_with_usage_code() {
    assert_eq!(superres(&["figure", "fig1", "--points", "many"]).status.code(), Some(2));
    assert_eq!(superres(&["validate", "--preset", "huge"]).status.code(), Some(2));
}

#[test]
fn zero_slot_scenario_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "[parameters]\ns = 0.5\nq = 0.5\n\n[run]\nslots = 0\n").unwrap();
    let out = superres(&["simulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("bad.scn:6"), "{err}");
    assert!(err.contains("slots"), "{err}");
}

#[test]
fn validate_passes_and_writes_a_row_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = superres(&["validate", "--preset", "quick", "--report", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stdout));
    let csv = std::fs::read_to_string(&report).unwrap();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 8 * 16);
    assert!(csv
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .all(|l| l.ends_with(",true")));
}

#[test]
fn injected_fault_fails_validation_by_name() {
    let out = superres(&["validate", "--preset", "quick", "--inject-fault", "nu-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("FAIL oracle_equivalence"), "{stdout}");
    assert!(stdout.contains("FAIL sld_residual_4x4"), "{stdout}");
    assert!(stdout.contains("pass sld_residual_2x2"), "{stdout}");
}

#[test]
fn simulate_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("run.scn");
    let csv = dir.path().join("records.csv");
    std::fs::write(
        &scn,
        "[parameters]\ns = 0.5\nq = 0.5\ngamma_r = 0.5\n[measurement]\nkind = counting\n[run]\nslots = 10000\nrepetitions = 12\nseed = 5\nfree = s\n",
    )
    .unwrap();
    let out = superres(&["simulate", scn.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("param,truth,mean,variance,van_trees_bound,ratio\ns,"));
    let records = std::fs::read_to_string(&csv).unwrap();
    assert!(records.contains("# measurement: counting"));
    assert!(records.contains("# seed: 5"));
    assert_eq!(records.lines().filter(|l| !l.starts_with('#')).count(), 13);
}

#[test]
fn counting_without_coherence_cannot_estimate_separation() {
    // The mean photon number is independent of s when the real coherence vanishes.
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("flat.scn");
    std::fs::write(
        &scn,
        "[parameters]\ns = 0.5\nq = 0.5\n[measurement]\nkind = counting\n[run]\nslots = 1000\nrepetitions = 4\n",
    )
    .unwrap();
    let out = superres(&["simulate", scn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("flat likelihood"));
}

#[test]
fn bound_matches_incoherent_benchmark() {
    let out = superres(&["bound", "--s", "0.001", "--q", "0.5"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    let row = stdout.lines().find(|l| l.starts_with("s,s,")).unwrap();
    let units: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((units - 1.0).abs() < 1e-3, "{row}");
}

#[test]
fn out_of_domain_point_is_rejected() {
    let out = superres(&["bound", "--s", "1", "--q", "0.5", "--gr", "0.9", "--gi", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}
