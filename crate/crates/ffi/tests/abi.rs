use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use frontlab_ffi::*;

fn last_error() -> String {
    let p = fl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn simulation_lifecycle() {
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(
            fl_simulation_new(FlModel::Fa1f, FlInit::Delta0, 0.9, 3, 0, -400, 400, &mut sim),
            FlStatus::Ok
        );
        let mut extinct = -1;
        assert_eq!(fl_simulation_run_until(sim, 40.0, &mut extinct), FlStatus::Ok);
        assert_eq!(extinct, 0);
        let (mut t, mut x, mut rings) = (0.0, 0i64, 0u64);
        assert_eq!(fl_simulation_time(sim, &mut t), FlStatus::Ok);
        assert_eq!(fl_simulation_front(sim, &mut x), FlStatus::Ok);
        assert_eq!(fl_simulation_rings(sim, &mut rings), FlStatus::Ok);
        assert_eq!(t, 40.0);
        assert!(rings > 0);
        let mut s = 9u8;
        assert_eq!(fl_simulation_spin(sim, x - 1, &mut s), FlStatus::Ok);
        assert_eq!(s, 1);
        fl_simulation_free(sim);
    }
}

#[test]
fn matches_core_trajectory() {
    use frontlab::ensemble::{run_front, FrontRunSpec, InitSpec};
    let params = frontlab::ModelParams::fa1f(0.85).unwrap();
    let spec = FrontRunSpec::new(params, InitSpec::Bernoulli, 11, 30.0);
    let rec = run_front(&spec, 4, false).unwrap();
    let (lo, hi) = spec.policy.window(30.0);
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(
            fl_simulation_new(FlModel::Fa1f, FlInit::Bernoulli, 0.85, 11, 4, lo, hi, &mut sim),
            FlStatus::Ok
        );
        assert_eq!(fl_simulation_run_until(sim, 30.0, ptr::null_mut()), FlStatus::Ok);
        let mut x = 0;
        assert_eq!(fl_simulation_front(sim, &mut x), FlStatus::Ok);
        assert_eq!(x, rec.final_front);
        fl_simulation_free(sim);
    }
}

#[test]
fn contact_extinction_is_reported() {
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(
            fl_simulation_new(FlModel::Tcp, FlInit::Delta0, 0.3, 1, 0, -200, 200, &mut sim),
            FlStatus::Ok
        );
        let mut extinct = 0;
        assert_eq!(fl_simulation_run_until(sim, 200.0, &mut extinct), FlStatus::Ok);
        assert_eq!(extinct, 1);
        let mut x = 0;
        assert_eq!(fl_simulation_front(sim, &mut x), FlStatus::NoFront);
        fl_simulation_free(sim);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(
            fl_simulation_new(FlModel::Fa1f, FlInit::Delta0, 1.5, 1, 0, -10, 10, &mut sim),
            FlStatus::InvalidArgument
        );
        assert!(last_error().contains("q = 1.5"));
        assert_eq!(
            fl_simulation_new(FlModel::Fa1f, FlInit::Delta0, 0.9, 1, 0, -10, 10, ptr::null_mut()),
            FlStatus::NullPointer
        );
        assert_eq!(fl_simulation_time(ptr::null(), ptr::null_mut()), FlStatus::NullPointer);

        // A tiny window is compromised quickly.
        assert_eq!(
            fl_simulation_new(FlModel::Fa1f, FlInit::Delta0, 0.9, 1, 0, -12, 12, &mut sim),
            FlStatus::Ok
        );
        assert_eq!(fl_simulation_run_until(sim, 500.0, ptr::null_mut()), FlStatus::WindowTooSmall);
        assert!(last_error().contains("window"));
        fl_simulation_free(sim);

        let mut x = 0.0;
        assert_eq!(fl_oracle_detailed_balance(4, 0.9, &mut x), FlStatus::Ok);
        assert!(fl_last_error_message().is_null());
        assert!(x < 1e-12);
        let mut small = [0.0; 4];
        assert_eq!(
            fl_oracle_transient(3, 0.9, 1.0, 0, small.as_mut_ptr(), small.len()),
            FlStatus::BufferTooSmall
        );
        assert_eq!(fl_oracle_detailed_balance(40, 0.9, &mut x), FlStatus::InvalidArgument);
    }
}

#[test]
fn json_entry_points() {
    unsafe {
        let cfg = CString::new(r#"{"kind":"velocity","q":1.0,"t":20,"n":50,"seed":2}"#).unwrap();
        let mut out = ptr::null_mut();
        let mut errors = -1;
        assert_eq!(fl_validate_json(cfg.as_ptr(), &mut out, &mut errors), FlStatus::Ok);
        assert_eq!(errors, 0);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "[]");
        fl_string_free(out);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut summary = ptr::null_mut();
        assert_eq!(fl_experiment_run_json(cfg.as_ptr(), path.as_ptr(), &mut summary), FlStatus::Ok);
        let s: serde_json::Value = serde_json::from_str(CStr::from_ptr(summary).to_str().unwrap()).unwrap();
        fl_string_free(summary);
        assert_eq!(s["kind"], "velocity");
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join("runs.csv").exists());

        let bad = CString::new(r#"{"kind":"velocity","q":3}"#).unwrap();
        assert_eq!(
            fl_experiment_run_json(bad.as_ptr(), ptr::null(), ptr::null_mut()),
            FlStatus::InvalidArgument
        );
        let garbage = CString::new("{not json").unwrap();
        assert_eq!(
            fl_validate_json(garbage.as_ptr(), &mut out, ptr::null_mut()),
            FlStatus::InvalidArgument
        );
        assert_eq!(fl_validate_json(ptr::null(), &mut out, ptr::null_mut()), FlStatus::NullPointer);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/frontlab.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct FlSimulation FlSimulation;"));
}

/// Compiles the C smoke test against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libfrontlab_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler");
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}
