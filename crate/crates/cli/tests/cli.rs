use std::path::Path;
use std::process::{Command, Output};

use fluxshift::io::{read_map, Sidecar, Table};
use fluxshift::sweep::{extract_min_gap, Normalization, OrderPolicy};
use fluxshift::PhotonMode;

fn run(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fluxshift"));
    cmd.arg("--out").arg(dir);
    if let Some(text) = config {
        let p = dir.join("config.json");
        std::fs::create_dir_all(dir).unwrap();
        std::fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(table: &Table, name: &str) -> f64 {
    let row = table.rows.iter().find(|r| r[0] == name).unwrap();
    row[1].parse().unwrap()
}

#[test]
fn shift_report_at_one_ghz() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        dir.path(),
        Some(r#"{"tones": {"drive_amplitude_ghz": 1.0}}"#),
        &["shift"],
    ));
    let t = Table::read_path(&dir.path().join("shift.csv")).unwrap();
    assert!((value(&t, "omega_ac") + 0.0576117).abs() < 1e-6);
    assert!((value(&t, "c_factor") - 0.0521).abs() < 5e-4);
    assert!((value(&t, "relaxation_hat") - 10.26).abs() < 0.01);
    assert!((value(&t, "excitation_hat") - 0.521).abs() < 0.001);
    assert!((value(&t, "dephasing_hat") - 19.22).abs() < 0.01);
}

#[test]
fn undriven_spectroscopy_gap() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&run(dir.path(), None, &["spectroscopy"]));
    assert!(stdout.contains("min gap: 2.97"), "{stdout}");
    let sc = Sidecar::read_path(&dir.path().join("spectroscopy.json")).unwrap();
    let t = Table::read_path(&dir.path().join(&sc.data_file)).unwrap();
    let map = read_map(&t, &sc).unwrap();
    assert_eq!(map.values.len(), 201 * 201);
    assert!((extract_min_gap(&map).unwrap() - 2.97).abs() <= 0.02);
    assert_eq!(sc.overlay.len(), 201);
    assert!(sc
        .defaulted
        .iter()
        .any(|d| d == "geometry.drive_mode_decay_mhz"));
}

#[test]
fn outputs_are_byte_identical_and_config_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"sweep": {"bias_ghz": {"start": -2, "stop": 2, "points": 21},
                            "spectroscopy_ghz": {"start": 2, "stop": 5, "points": 31}},
                  "tones": {"drive_amplitude_ghz": 1.0}}"#;
    ok(&run(a.path(), Some(cfg), &["spectroscopy"]));
    ok(&run(
        b.path(),
        Some(cfg),
        &["--threads", "1", "spectroscopy"],
    ));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(
        read(a.path(), "spectroscopy.csv"),
        read(b.path(), "spectroscopy.csv")
    );

    // the sidecar's resolved config reproduces the run
    let sc = Sidecar::read_path(&a.path().join("spectroscopy.json")).unwrap();
    let resolved = sc.config.clone().resolve().unwrap();
    assert_eq!(resolved.config, sc.config);
    assert!(resolved.defaulted.is_empty());
    let c = tempfile::tempdir().unwrap();
    ok(&run(
        c.path(),
        Some(&sc.config.to_json_string()),
        &["spectroscopy"],
    ));
    assert_eq!(
        read(a.path(), "spectroscopy.csv"),
        read(c.path(), "spectroscopy.csv")
    );
    let mut sc_c = Sidecar::read_path(&c.path().join("spectroscopy.json")).unwrap();
    sc_c.config.output.dir = sc.config.output.dir.clone();
    assert_eq!(sc_c.config, sc.config);
}

#[test]
fn population_oracle_compare() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&run(
        dir.path(),
        Some(r#"{"tones": {"drive_amplitude_ghz": 0.5}}"#),
        &["oracle-compare", "--check", "population"],
    ));
    assert!(stdout.contains("max absolute deviation"));
    let sc = Sidecar::read_path(&dir.path().join("oracle_population.json")).unwrap();
    let max = sc.metadata["max_deviation"].as_f64().unwrap();
    assert!(max < 1e-3, "{max}");
    let t = Table::read_path(&dir.path().join("oracle_population.csv")).unwrap();
    assert_eq!(t.rows.len(), 5);
}

#[test]
fn biastrace_dip_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sweep": {"trace_amplitudes_ghz": [1.0, 3.0]}}"#;
    ok(&run(dir.path(), Some(cfg), &["biastrace"]));
    let t = Table::read_path(&dir.path().join("biastrace_dips.csv")).unwrap();
    let counts: Vec<(String, String)> = t
        .rows
        .iter()
        .map(|r| (r[0].clone(), r[3].clone()))
        .collect();
    assert_eq!(
        counts,
        [
            ("0".into(), "1".into()),
            ("1".into(), "2".into()),
            ("1".into(), "2".into())
        ]
    );
}

#[test]
fn levels_and_calibrate_emit_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sweep": {"level_bias_ghz": {"start": -3, "stop": 3, "points": 13},
                            "calibration_powers_dbm": {"start": -20, "stop": 0, "points": 3}},
                  "geometry": {"calibration_reference": {"power_dbm": 0, "drive_amplitude_ghz": 3.0}}}"#;
    ok(&run(dir.path(), Some(cfg), &["levels"]));
    ok(&run(dir.path(), Some(cfg), &["calibrate"]));
    for stem in [
        "levels_upper",
        "levels_lower",
        "levels_population",
        "calibration",
    ] {
        assert!(dir.path().join(format!("{stem}.csv")).exists());
        Sidecar::read_path(&dir.path().join(format!("{stem}.json"))).unwrap();
    }
    let t = Table::read_path(&dir.path().join("calibration.csv")).unwrap();
    let amp = t.column_f64("drive_amplitude").unwrap();
    assert!((amp[2] - 3.0).abs() < 1e-6);
    assert!((amp[1] / amp[0] - 10f64.sqrt()).abs() < 1e-6);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        dir.path(),
        Some(
            r#"{"sweep": {"bias_ghz": {"start": -1, "stop": 1, "points": 5}, "spectroscopy_ghz": {"start": 2, "stop": 4, "points": 5}}}"#,
        ),
        &[
            "--order",
            "1",
            "--normalize",
            "none",
            "--mode",
            "self-consistent",
            "spectroscopy",
        ],
    ));
    let sc = Sidecar::read_path(&dir.path().join("spectroscopy.json")).unwrap();
    assert_eq!(sc.config.mode.correction_order, OrderPolicy::First);
    assert_eq!(sc.config.mode.normalization, Normalization::None);
    assert_eq!(sc.config.mode.photon_mode, PhotonMode::SelfConsistent);
    assert_eq!(sc.normalization, Some(Normalization::None));
}

#[test]
fn bad_config_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        Some("{\n  \"qubit\": {\"gap_ghz\": \"wide\"}\n}"),
        &["shift"],
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("qubit.gap_ghz") && err.contains("line 2"),
        "{err}"
    );

    let out = run(
        dir.path(),
        Some(r#"{"qubit": {"gap_ghz": -1}}"#),
        &["shift"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gap"));
}

#[test]
fn solver_errors_carry_grid_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"tones": {"drive_amplitude_ghz": 3.0},
                  "sweep": {"bias_ghz": {"start": -6, "stop": 6, "points": 3}, "spectroscopy_ghz": {"start": 2, "stop": 4, "points": 3}}}"#;
    let out = run(dir.path(), Some(cfg), &["spectroscopy"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid point (-6.000000"));
}

#[test]
fn unknown_subcommand_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!run(dir.path(), None, &["plot"]).status.success());
}
