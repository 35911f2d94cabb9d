use std::path::Path;
use std::process::{Command, Output};

fn bozk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bozk"))
        .args(args)
        .current_dir(dir)
        .env("BOZK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

const SMALL: &str = "grid.nx = 32\ngrid.ny = 32\ngrid.lx = 8pi\ngrid.ly = 8pi\nsolver.dt = 1e-3\nsolver.t_final = 0.05\nsolver.stride = 5\n";

#[test]
fn verify_passes_on_default_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = bozk(&["verify", "--out", "v", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("v/verify.csv")).unwrap();
    assert!(csv.starts_with("check[label],value[1],limit[1],pass[bool]\n"));
    assert!(!csv.contains(",false"));
    assert_eq!(
        json(&dir.path().join("v/summary.json"))["failed"],
        serde_json::json!([])
    );
}

#[test]
fn odd_grid_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "bad.conf", "grid.nx = 127\n");
    let out = bozk(&["simulate", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("typo.conf", "solver.tfinal = 1\n"),
        ("kind.conf", "data.kind = soliton\n"),
        ("weight.conf", "diagnostics.weights = gamma:3\n"),
        ("missing.conf", "data.kind = file\ndata.path = nowhere.bozk\n"),
    ] {
        let conf = write(dir.path(), name, text);
        let out = bozk(&["simulate", "--config", &conf, "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    assert_eq!(bozk(&["plot", "--out", "o"], dir.path()).status.code(), Some(2));
    assert_eq!(bozk(&["--out", "o"], dir.path()).status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn cfl_violation_exits_three_with_abort_record() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "cfl.conf", "solver.dt = 0.2\nsolver.t_final = 1\n");
    let out = bozk(&["simulate", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let summary = json(&dir.path().join("o/summary.json"));
    assert_eq!(summary["abort"]["audit"], "cfl");
}

#[test]
fn simulate_then_diagnose_the_stored_field() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(
        dir.path(),
        "run.conf",
        &format!("{SMALL}diagnostics.hs = 1, 0.5\ndiagnostics.weights = trunc:4\n"),
    );
    let out = bozk(&["simulate", "--config", &conf, "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let series = std::fs::read_to_string(dir.path().join("run/series.csv")).unwrap();
    let header = series.lines().next().unwrap();
    assert_eq!(
        header,
        "t[time],l2[norm],hs_1[norm],hs_0.5[norm],zmode_linf_drift[amplitude],moment_x[length*amplitude],w_trunc4[norm]"
    );
    // t = 0, 5 strides, and the final time
    assert_eq!(series.lines().count(), 1 + 11);
    let summary = json(&dir.path().join("run/summary.json"));
    assert!(summary["conservation"]["l2_drift"].as_f64().unwrap() < 1e-10);

    let diag = write(
        dir.path(),
        "diag.conf",
        "data.kind = file\ndata.path = run/final.bozk\ndiagnostics.norms = hs:1, l2w:poly:0\n",
    );
    let out = bozk(&["diagnose", "--config", &diag, "--out", "d"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let norms = std::fs::read_to_string(dir.path().join("d/norms.csv")).unwrap();
    let rows: Vec<&str> = norms.lines().collect();
    assert_eq!(rows[0], "norm[label],value[norm]");
    // the stored field reproduces the last recorded L² norm (up to the
    // roundoff of one more transform)
    let last_l2: f64 = series
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let value = |row: &str, name: &str| -> f64 {
        let (n, v) = row.split_once(',').unwrap();
        assert_eq!(n, name);
        v.parse().unwrap()
    };
    assert!((value(rows[1], "hs_0") - last_l2).abs() < 1e-14 * last_l2);
    assert!((value(rows[3], "w_poly0") - last_l2).abs() < 1e-14 * last_l2);
}

#[test]
fn linear_run_keeps_the_norm() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "lin.conf", &format!("{SMALL}data.amplitude = 50\n"));
    let out = bozk(&["linear", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&dir.path().join("o/summary.json"));
    assert_eq!(summary["solver"]["nonlinear"], false);
    assert!(summary["conservation"]["l2_drift"].as_f64().unwrap() < 1e-13);
}

#[test]
fn picard_needs_viscosity_and_converges_with_it() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "p0.conf", SMALL);
    assert_eq!(
        bozk(&["picard", "--config", &conf, "--out", "o"], dir.path())
            .status
            .code(),
        Some(2)
    );
    let conf = write(
        dir.path(),
        "p.conf",
        &format!("{SMALL}solver.mu = 0.1\ndata.amplitude = 0.1\n"),
    );
    let out = bozk(&["picard", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("o/summary.json"));
    assert!(summary["stepper_gap"].as_f64().unwrap() < 1e-8);
    let csv = std::fs::read_to_string(dir.path().join("o/picard_residuals.csv")).unwrap();
    assert!(csv.starts_with("iteration[index],residual[norm]\n1,"));
}

#[test]
fn picard_without_convergence_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(
        dir.path(),
        "p.conf",
        &format!("{SMALL}solver.mu = 0.1\npicard.max_iter = 1\npicard.tol = 1e-300\n"),
    );
    let out = bozk(&["picard", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(
        json(&dir.path().join("o/summary.json"))["abort"]["audit"],
        "picard_convergence"
    );
}

#[test]
fn uc_reports_obstruction_for_gaussian_data() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(
        dir.path(),
        "uc.conf",
        "grid.nx = 128\ngrid.ny = 128\nsolver.dt = 1e-3\nsolver.t_final = 0.1\nuc.r_list = 1\nuc.s = 2\nuc.boundary_tolerance = 1e-9\n",
    );
    let out = bozk(&["uc", "--config", &conf, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("o/uc_report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().collect();
    assert_eq!(rows[0], "level[index],window_norm[norm],ratio[1],verdict[label]");
    assert_eq!(rows.len(), 1 + 4);
    assert!(rows[1..].iter().all(|r| r.ends_with(",obstructed")));
    let summary = json(&dir.path().join("o/summary.json"));
    assert!(summary["moment_drift"]["slope"].as_f64().unwrap() > 0.0);
    let persistence = std::fs::read_to_string(dir.path().join("o/persistence.csv")).unwrap();
    assert!(persistence.starts_with("t[time],z_2_1[norm],l2r_1[norm]\n"));
}

#[test]
fn seed_changes_random_data_only_through_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "r.conf", &format!("{SMALL}data.kind = random_smooth\n"));
    let run = |seed: &str, out: &str| {
        let o = bozk(
            &["simulate", "--config", &conf, "--seed", seed, "--out", out],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(dir.path().join(out).join("series.csv")).unwrap()
    };
    let (a, b, c) = (run("7", "a"), run("7", "b"), run("8", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
