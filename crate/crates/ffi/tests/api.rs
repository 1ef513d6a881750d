use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rabichirp_ffi::*;

const SYMMETRIC: &str = r#"
[model]
sign_ab = 1
omega_ab = { kind = "constant", value = 1.0 }
mu_aa = { kind = "constant", value = 0.02 }
mu_bb = { kind = "constant", value = 0.02 }
mu_ab = { kind = "constant", value = 0.35 }

[pulse]
f0 = 0.8379
t_start = 0.0
t_end = 70.0
envelope = { kind = "gaussian", center = 35.0, width = 10.0 }
chirp = "design"

[run]
samples = 400
"#;

fn parse(text: &str) -> *mut RcConfig {
    let c = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { rc_config_parse(c.as_ptr(), ptr::null(), &mut cfg) };
    assert_eq!(status, RcStatus::Ok, "{}", last_error());
    assert!(!cfg.is_null());
    cfg
}

fn last_error() -> String {
    let p = rc_last_error_message();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

fn set(cfg: *mut RcConfig, assignment: &str) -> RcStatus {
    let c = CString::new(assignment).unwrap();
    unsafe { rc_config_set(cfg, c.as_ptr()) }
}

#[test]
fn symmetric_design_returns_omega_ab() {
    let cfg = parse(SYMMETRIC);
    let mut design = ptr::null_mut();
    assert_eq!(unsafe { rc_design(cfg, &mut design) }, RcStatus::Ok);
    unsafe {
        assert!(rc_design_converged(design));
        assert_eq!(rc_design_iterations(design), 1);
        let n = rc_design_len(design);
        assert!(n > 100);
        let mut t = vec![0.0; n];
        let mut w = vec![0.0; n];
        assert_eq!(
            rc_design_chirp(design, t.as_mut_ptr(), w.as_mut_ptr(), n),
            RcStatus::Ok
        );
        assert!(w.iter().all(|&x| x == 1.0));
        assert_eq!(t[0], 0.0);
        assert_eq!(t[n - 1], 70.0);
        assert_eq!(
            rc_design_chirp(design, t.as_mut_ptr(), w.as_mut_ptr(), n - 1),
            RcStatus::BufferTooSmall
        );
        assert!(last_error().contains("need"));
        let report = rc_design_report(design);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        rc_string_free(report);
        assert!(text.contains("converged = true"));
        rc_design_free(design);
        rc_config_free(cfg);
    }
}

#[test]
fn negative_amplitude_is_a_config_error_naming_the_key() {
    let cfg = parse(SYMMETRIC);
    assert_eq!(set(cfg, "pulse.f0=-1"), RcStatus::Config);
    let msg = last_error();
    assert!(msg.contains("pulse.f0"), "{msg}");
    assert!(msg.contains("F0 > 0"), "{msg}");
    // the handle keeps its previous state
    let toml = unsafe { rc_config_to_toml(cfg) };
    let text = unsafe { CStr::from_ptr(toml) }.to_str().unwrap().to_owned();
    unsafe { rc_string_free(toml) };
    assert!(text.contains("f0 = 0.8379"));
    unsafe { rc_config_free(cfg) };
}

#[test]
fn verify_reports_complete_transfer_and_detuning_fails() {
    let cfg = parse(SYMMETRIC);
    let mut v = RcVerification::default();
    assert_eq!(unsafe { rc_verify(cfg, &mut v) }, RcStatus::Ok);
    assert!(v.passed);
    assert!(v.p_beta_max >= 1.0 - 1e-6);
    assert!(v.norm_drift < 1e-8);
    assert_eq!(
        set(cfg, r#"pulse.chirp={ kind = "constant", value = 1.3 }"#),
        RcStatus::Ok
    );
    assert_eq!(unsafe { rc_verify(cfg, &mut v) }, RcStatus::VerifyFailed);
    assert!(!v.passed);
    assert!(v.p_beta_max < 0.5);
    unsafe { rc_config_free(cfg) };
}

#[test]
fn rabi_trace_columns() {
    let cfg = parse(SYMMETRIC);
    let mut tr = ptr::null_mut();
    assert_eq!(
        unsafe { rc_simulate(cfg, RcFrame::RabiB, &mut tr) },
        RcStatus::Ok
    );
    let n = unsafe { rc_trace_len(tr) };
    assert_eq!(n, 401);
    let mut tau = vec![0.0; n];
    let mut p2 = vec![0.0; n];
    unsafe {
        assert_eq!(
            rc_trace_column(tr, RcColumn::Tau, tau.as_mut_ptr(), n),
            RcStatus::Ok
        );
        assert_eq!(
            rc_trace_column(tr, RcColumn::Pop2, p2.as_mut_ptr(), n),
            RcStatus::Ok
        );
    }
    for (x, p) in tau.iter().zip(&p2) {
        assert!((p - x.sin().powi(2)).abs() < 1e-8);
    }
    let csv = unsafe { rc_trace_csv(tr) };
    let head = unsafe { CStr::from_ptr(csv) }
        .to_str()
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert_eq!(head, "t,tau,re_1,im_1,re_2,im_2,pop_1,pop_2,field,chirp");
    unsafe {
        rc_string_free(csv);
        rc_trace_free(tr);
        rc_config_free(cfg);
    }
}

#[test]
fn null_arguments_are_rejected() {
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { rc_config_parse(ptr::null(), ptr::null(), &mut cfg) },
        RcStatus::NullPointer
    );
    assert!(last_error().contains("toml"));
    let mut v = RcVerification::default();
    assert_eq!(
        unsafe { rc_verify(ptr::null(), &mut v) },
        RcStatus::NullPointer
    );
    unsafe {
        rc_config_free(ptr::null_mut());
        rc_design_free(ptr::null_mut());
        rc_trace_free(ptr::null_mut());
        rc_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { rc_design_len(ptr::null()) }, 0);
}

#[test]
fn parse_errors_set_the_message() {
    let c = CString::new("[model]\nsign_ab = 1\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { rc_config_parse(c.as_ptr(), ptr::null(), &mut cfg) },
        RcStatus::Config
    );
    assert!(cfg.is_null());
    assert!(last_error().contains("missing field"));
    rc_clear_last_error();
    assert!(rc_last_error_message().is_null());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(rc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/rabichirp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "rc_config_load",
        "rc_design_chirp",
        "rc_simulate",
        "rc_verify",
        "rc_last_error_message",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}
