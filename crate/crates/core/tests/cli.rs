use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spraymom"))
}

fn cases_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("cases")
}

#[test]
fn every_shipped_config_checks() {
    let mut n = 0;
    for entry in std::fs::read_dir(cases_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = bin().arg("check").arg(&path).output().unwrap();
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "case_id = \"evap0d_smooth\"\n[schemes]\nn_neg = 5\n").unwrap();
    let out = bin().arg("check").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = bin().arg("check").arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_reports_smooth_case_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--threads", "1", "--out"])
        .arg(dir.path())
        .arg(cases_dir().join("evap0d_smooth.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let line = summary.lines().find(|l| l.starts_with("max_rel_error_vs_fully_kinetic")).unwrap();
    let v: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(v > 0.0 && v < 0.02, "{v}");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(cases_dir().join("evap0d_square.toml"))
        .env("SPRAYMOM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        cfg.path(),
        "case_id = \"taylor_green_2d\"\n[grid]\nnx = 24\nny = 24\n[time]\nt_end = 0.2\n[output]\ntimes = [0.1]\ndirectory = \"x\"\n",
    )
    .unwrap();
    for d in [&a, &b] {
        let out = bin().args(["run", "--threads", "1", "--out"]).arg(d.path()).arg(cfg.path()).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut files: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert!(files.iter().filter(|f| f.to_string_lossy().ends_with(".dat")).count() == 2);
    for f in files {
        let x = std::fs::read(a.path().join(&f)).unwrap();
        let y = std::fs::read(b.path().join(&f)).unwrap();
        assert!(x == y, "{f:?} differs");
    }
}

#[test]
fn convergence_reports_two_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["convergence", "--grids", "32,64,128", "--out"])
        .arg(dir.path())
        .arg(cases_dir().join("transport1d.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("fitted_order_1") && summary.contains("fitted_order_2"), "{summary}");
}
