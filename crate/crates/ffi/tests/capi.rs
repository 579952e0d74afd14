use std::ffi::{c_char, CString};
use std::ptr;

use spraymom_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { spray_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn runs_a_case_through_handles() {
    let toml = CString::new("case_id = \"evap0d_smooth\"\n[output]\ntimes = [0.1]\n").unwrap();
    let mut case = ptr::null_mut();
    assert_eq!(unsafe { spray_case_from_str(toml.as_ptr(), &mut case) }, SprayStatus::Ok);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { spray_run(case, &mut run) }, SprayStatus::Ok);

    let mut count = 0;
    assert_eq!(unsafe { spray_run_snapshot_count(run, &mut count) }, SprayStatus::Ok);
    assert_eq!(count, 2);
    let (mut t, mut nx, mut ny) = (0.0, 0, 0);
    assert_eq!(unsafe { spray_run_snapshot_info(run, 1, &mut t, &mut nx, &mut ny) }, SprayStatus::Ok);
    assert!((t - 0.2).abs() < 1e-12 && nx == 1 && ny == 1);
    let mut m = [0.0; 4];
    assert_eq!(unsafe { spray_run_snapshot_moments(run, 1, m.as_mut_ptr(), 4) }, SprayStatus::Ok);
    assert!(m[0] > 0.0 && m.iter().all(|v| v.is_finite()));
    assert_eq!(unsafe { spray_run_snapshot_moments(run, 1, m.as_mut_ptr(), 3) }, SprayStatus::InvalidArgument);
    assert_eq!(unsafe { spray_run_snapshot_info(run, 5, &mut t, &mut nx, &mut ny) }, SprayStatus::OutOfRange);

    let name = CString::new("number_balance_defect").unwrap();
    let mut v = f64::NAN;
    assert_eq!(unsafe { spray_run_scalar(run, name.as_ptr(), &mut v) }, SprayStatus::Ok);
    assert!(v < 1e-12);
    let missing = CString::new("nope").unwrap();
    assert_eq!(unsafe { spray_run_scalar(run, missing.as_ptr(), &mut v) }, SprayStatus::OutOfRange);
    assert!(last_error().contains("nope"));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { spray_run_write(run, path.as_ptr()) }, SprayStatus::Ok);
    assert!(dir.path().join("summary.txt").exists());

    unsafe {
        spray_run_free(run);
        spray_case_free(case);
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let toml = CString::new("case_id = \"evap0d_smooth\"\n[schemes]\nn_neg = 7\n").unwrap();
    let mut case = ptr::null_mut();
    assert_eq!(unsafe { spray_case_from_str(toml.as_ptr(), &mut case) }, SprayStatus::Config);
    assert!(case.is_null());
    assert!(last_error().contains("line 3"), "{}", last_error());
    let missing = CString::new("/nonexistent/case.toml").unwrap();
    assert_eq!(unsafe { spray_case_from_file(missing.as_ptr(), &mut case) }, SprayStatus::Config);
}

#[test]
fn null_pointers_are_rejected() {
    let mut case = ptr::null_mut();
    assert_eq!(unsafe { spray_case_from_str(ptr::null(), &mut case) }, SprayStatus::NullPointer);
    assert!(last_error().contains("toml"));
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { spray_run(ptr::null(), &mut run) }, SprayStatus::NullPointer);
    unsafe {
        spray_case_free(ptr::null_mut());
        spray_run_free(ptr::null_mut());
    }
    assert_eq!(unsafe { spray_last_error(ptr::null_mut(), 0) }, last_error().len());
}

#[test]
fn maxent_recovers_uniform_density() {
    let m = [1.0, 2.0 / 3.0, 0.5, 0.4];
    let mut lambdas = [f64::NAN; 4];
    let mut its = usize::MAX;
    let s = unsafe { spray_maxent(m.as_ptr(), SprayBasis::Fractional, 1e-12, 50, lambdas.as_mut_ptr(), &mut its) };
    assert_eq!(s, SprayStatus::Ok);
    assert!(lambdas.iter().all(|l| l.abs() < 1e-8), "{lambdas:?}");
    assert!(its <= 5);

    let outside = [1.0, 0.9, 0.1, 0.05];
    let s = unsafe { spray_maxent(outside.as_ptr(), SprayBasis::Fractional, 1e-12, 50, lambdas.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(s, SprayStatus::NotRealizable);
    let mut class = SprayRealizability::Interior;
    assert_eq!(unsafe { spray_classify(outside.as_ptr(), SprayBasis::Fractional, 1e-10, &mut class) }, SprayStatus::Ok);
    assert_eq!(class, SprayRealizability::Outside);
    assert_eq!(unsafe { spray_classify(m.as_ptr(), SprayBasis::Fractional, 1e-10, &mut class) }, SprayStatus::Ok);
    assert_eq!(class, SprayRealizability::Interior);
}

#[test]
fn evaporation_balances_number() {
    let m = [1.0, 2.0 / 3.0, 0.5, 0.4];
    let (mut up, mut flux) = ([0.0; 4], [0.0; 4]);
    let s = unsafe { spray_evaporate_d2(m.as_ptr(), SprayBasis::Fractional, 1.0, 0.01, 1, up.as_mut_ptr(), flux.as_mut_ptr()) };
    assert_eq!(s, SprayStatus::Ok);
    // Uniform density: a fraction K dt of the droplets vanishes.
    assert!((flux[0] - 0.01).abs() < 1e-10, "{flux:?}");
    assert!((up[0] + flux[0] - 1.0).abs() < 1e-14);
    let s = unsafe { spray_evaporate_d2(m.as_ptr(), SprayBasis::Fractional, -1.0, 0.01, 1, up.as_mut_ptr(), flux.as_mut_ptr()) };
    assert_eq!(s, SprayStatus::InvalidArgument);
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spraymom.h")).unwrap();
    for name in [
        "spray_last_error",
        "spray_case_from_file",
        "spray_case_from_str",
        "spray_case_free",
        "spray_run",
        "spray_run_free",
        "spray_run_write",
        "spray_run_snapshot_count",
        "spray_run_snapshot_info",
        "spray_run_snapshot_moments",
        "spray_run_scalar",
        "spray_classify",
        "spray_maxent",
        "spray_evaporate_d2",
        "SPRAY_STATUS_OK = 0",
        "typedef struct SprayRun SprayRun",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
