mod common;

use common::dispwave;
use dispwave::output::read_diagnostics;

#[test]
fn simulate_fig1_writes_rows_at_stride() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = dispwave(&["simulate", "--preset", "fig1", "--out", out, "--plots"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("steps 4000"));
    let series = read_diagnostics(&dir.path().join("diagnostics.csv")).unwrap();
    // t = 0, every 100 steps of 5e-4, and the final time
    assert_eq!(series.len(), 41);
    for (i, t) in series.times().iter().enumerate() {
        assert!((t - 0.05 * i as f64).abs() < 1e-9);
    }
    for plot in ["heatmap", "snapshots", "conserved", "spectrum"] {
        let svg = std::fs::read_to_string(dir.path().join("plots").join(format!("{plot}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    }
}

#[test]
fn twave_prints_the_slope_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = dispwave(&["twave", "--c", "2", "--alpha1", "1", "--alpha2", "3", "--out", out]);
    assert_eq!(code, 0);
    assert!(stdout.contains("-1.7320508"));
    assert!(stdout.contains(",1.7320508"));
    let csv = std::fs::read_to_string(dir.path().join("twave.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn blowup_exits_three_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, _) = dispwave(&["simulate", "--alpha1", "-1", "--alpha2", "-1", "--alpha3", "-1", "--N", "256", "--out", out]);
    assert_eq!(code, 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["blowup"]["t_blow"].as_f64().unwrap() <= 2.0);
    assert!(dir.path().join("diagnostics.csv").exists());
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    let (code, _, stderr) = dispwave(&["simulate", "--sigma", "0", "--out", out]);
    assert_eq!(code, 2);
    assert!(stderr.contains("sigma ≥ 1"), "{stderr}");

    let (code, _, stderr) = dispwave(&["simulate", "--N", "63", "--out", out]);
    assert_eq!(code, 2);
    assert!(stderr.contains("grid.points"), "{stderr}");

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[params]\nalpha1 = 1.0\nalpha2 = 1.0\nalpha3 = 1.0\nsigma = 2\n[grid]\nnodes = 4\n").unwrap();
    let (code, _, stderr) = dispwave(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2);
    assert!(stderr.contains("grid.nodes"), "{stderr}");

    let (code, _, _) = dispwave(&["simulate", "--no-such-flag"]);
    assert_eq!(code, 2);
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let (code, _, stderr) = dispwave(&["dispersion", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{stderr}");
}

#[test]
fn toml_config_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[params]\nalpha1 = 1.0\nalpha2 = 0.5\nalpha3 = 1.0\nsigma = 3\n\n[grid]\npoints = 128\n\n\
         [ic]\nkind = \"sech2\"\n\n[control]\ndt = 1e-3\nt_max = 0.1\nsnapshot_stride = 10\n\n\
         [outputs]\nsnapshot_times = [0.0, 0.05, 0.1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, _, stderr) = dispwave(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    let series = read_diagnostics(&out.join("diagnostics.csv")).unwrap();
    assert_eq!(series.len(), 11);
    let snaps = std::fs::read_to_string(out.join("snapshots.csv")).unwrap();
    assert_eq!(snaps.lines().next().unwrap(), "x,psi@0.000000,psi@0.050000,psi@0.100000");
    assert_eq!(snaps.lines().count(), 129);
}

#[test]
fn dispersion_table_spans_the_real_band() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = dispwave(&["dispersion", "--alpha1", "1", "--alpha2", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("band edge"));
    let csv = std::fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    for line in csv.lines().skip(2) {
        let omega_sq: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(omega_sq > 0.0);
    }
}
