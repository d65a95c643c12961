use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use recurlab_ffi::*;

const TENT: &str = r#"{"kind":"interval-pl","breakpoints":["0","1/2","1"],"values":["0","1","0"]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    rl_string_free(s);
    out
}

unsafe fn system(json: &str) -> *mut RlSystem {
    let mut h = ptr::null_mut();
    assert_eq!(rl_system_from_json(c(json).as_ptr(), &mut h), RlStatus::Ok);
    h
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(rl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn program_symbols_and_table() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(rl_program_new(2, 1, &mut p), RlStatus::Ok);
        let mut s = 9u8;
        assert_eq!(rl_program_symbol_at(p, c("0").as_ptr(), &mut s), RlStatus::Ok);
        assert_eq!(s, 1);
        assert_eq!(rl_program_symbol_at(p, c("3").as_ptr(), &mut s), RlStatus::Ok);
        assert_eq!(s, 0);
        let mut csv = ptr::null_mut();
        assert_eq!(rl_program_checkpoints_csv(p, &mut csv), RlStatus::Ok);
        assert!(take(csv).contains("2,1,361,38,1084,1,361"));

        let status = rl_program_symbol_at(p, c("100000000000").as_ptr(), &mut s);
        assert_eq!(status, RlStatus::OutOfRange);
        let msg = take(rl_last_error());
        assert!(msg.contains("level"), "{msg}");
        rl_program_free(p);
    }
}

#[test]
fn level_guard_is_resource_error() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rl_program_new(99, 1, &mut p) }, RlStatus::Resource);
    assert!(p.is_null());
}

#[test]
fn null_arguments() {
    unsafe {
        assert_eq!(rl_program_new(2, 1, ptr::null_mut()), RlStatus::NullPointer);
        assert_eq!(rl_system_from_json(ptr::null(), ptr::null_mut()), RlStatus::NullPointer);
        let mut n = 0u64;
        let status = rl_return_count(ptr::null(), ptr::null(), c("0").as_ptr(), c("1").as_ptr(), 5, &mut n);
        assert_eq!(status, RlStatus::NullPointer);
        rl_string_free(ptr::null_mut());
        rl_system_free(ptr::null_mut());
    }
}

#[test]
fn counts_and_reports() {
    unsafe {
        let tent = system(TENT);
        let mut n = 0u64;
        let status = rl_return_count(tent, ptr::null(), c("0").as_ptr(), c("1/1000").as_ptr(), 100, &mut n);
        assert_eq!(status, RlStatus::Ok);
        assert_eq!(n, 100);

        let mut out = ptr::null_mut();
        let status = rl_density_csv(tent, ptr::null(), c("2/5").as_ptr(), c("1/4,1/16").as_ptr(), 200, 16, &mut out);
        assert_eq!(status, RlStatus::Ok);
        assert!(take(out).starts_with("point_id,radius,horizon"));

        let status = rl_classify_json(tent, ptr::null(), c("0").as_ptr(), ptr::null(), 64, ptr::null(), ptr::null(), &mut out);
        assert_eq!(status, RlStatus::Ok);
        let json: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(json["flags"]["ap"], true);

        let (mut h, mut achieved) = (0.0f64, 0usize);
        assert_eq!(rl_lap_entropy(tent, 20, &mut h, &mut achieved), RlStatus::Ok);
        assert!((h - std::f64::consts::LN_2).abs() < 1e-6);
        assert_eq!(achieved, 20);

        assert_eq!(rl_turbulence_json(tent, 3, &mut out), RlStatus::Ok);
        let w: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(w["m"], 2);
        assert_eq!(w["k1"]["lo"], "1/2");

        let id = system(r#"{"kind":"interval-pl","breakpoints":["0","1"],"values":["0","1"]}"#);
        assert_eq!(rl_turbulence_json(id, 2, &mut out), RlStatus::Ok);
        assert_eq!(take(out), "null");
        rl_system_free(id);
        rl_system_free(tent);
    }
}

#[test]
fn constructed_point_needs_program() {
    unsafe {
        let shift = system(r#"{"kind":"shift"}"#);
        let mut n = 0u64;
        let status = rl_return_count(shift, ptr::null(), c("u").as_ptr(), c("1").as_ptr(), 9, &mut n);
        assert_eq!(status, RlStatus::InvalidArgument);
        let mut p = ptr::null_mut();
        assert_eq!(rl_program_new(2, 1, &mut p), RlStatus::Ok);
        assert_eq!(rl_return_count(shift, p, c("u").as_ptr(), c("1").as_ptr(), 9, &mut n), RlStatus::Ok);
        assert_eq!(n, 2);
        rl_program_free(p);
        rl_system_free(shift);
    }
}

#[test]
fn kind_mismatch_and_bad_config() {
    unsafe {
        let odo = system(r#"{"kind":"odometer"}"#);
        let mut out = ptr::null_mut();
        assert_eq!(rl_turbulence_json(odo, 2, &mut out), RlStatus::KindMismatch);
        rl_system_free(odo);
        let mut h = ptr::null_mut();
        assert_eq!(rl_system_from_json(c(r#"{"kind":"torus"}"#).as_ptr(), &mut h), RlStatus::Config);
        assert!(h.is_null());
    }
}

#[test]
fn header_declares_the_interface() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/recurlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rl_version",
        "rl_last_error",
        "rl_string_free",
        "rl_program_new",
        "rl_program_symbol_at",
        "rl_system_from_json",
        "rl_return_count",
        "rl_density_csv",
        "rl_classify_json",
        "rl_lap_entropy",
        "rl_turbulence_json",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing");
    }
    if let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).status() {
        assert!(status.success(), "header does not compile as C");
    }
}
