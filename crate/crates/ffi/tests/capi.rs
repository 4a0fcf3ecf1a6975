use std::ffi::{CStr, CString};
use std::ptr;

use densify_ffi::*;

fn preset(name: &str) -> *mut DensifyConfig {
    let name = CString::new(name).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { densify_config_from_preset(name.as_ptr(), &mut cfg) }, DensifyStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

fn last_error() -> String {
    let p = densify_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(densify_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn pathloss_and_tail() {
    let cfg = preset("fig1a");
    let mut x = 0.0;
    unsafe {
        assert_eq!(densify_pathloss(cfg, 100.0, &mut x), DensifyStatus::Ok);
        assert!((x / 1e7 - 1.0).abs() < 1e-12, "{x}");
        assert_eq!(densify_distance_cdf(cfg, 20_000.0, &mut x), DensifyStatus::Ok);
        assert!((x - 0.25).abs() < 1e-12);
        assert_eq!(densify_tail(cfg, 1e-6, &mut x), DensifyStatus::Ok);
        assert!(x > 0.0 && x < 1.0);
        let mut regime = DensifyRegime::Unclassified;
        assert_eq!(densify_predict_regime(cfg, &mut regime), DensifyStatus::Ok);
        assert_eq!(regime, DensifyRegime::Saturation);
        densify_config_free(cfg);
    }
}

#[test]
fn errors_are_reported() {
    let cfg = preset("fig2b");
    let mut x = 0.0;
    unsafe {
        assert_eq!(densify_pathloss(cfg, 1e9, &mut x), DensifyStatus::InvalidArgument);
        assert!(last_error().contains("outside the domain"));
        assert_eq!(densify_tail(ptr::null(), 1.0, &mut x), DensifyStatus::NullPointer);
        assert_eq!(densify_tail(cfg, 1.0, ptr::null_mut()), DensifyStatus::NullPointer);
        densify_config_free(cfg);
        densify_config_free(ptr::null_mut());
    }
}

#[test]
fn bad_config_is_a_validation_error() {
    let src = CString::new("[domain]\ndimension = 2\nouter_radius = 100.0\n[pathloss]\nanchor = 1.0\nexponents = [2.0, 0.5]\nbreakpoints = [10.0]\n[fading]\nkind = \"rayleigh\"\nmean = 1.0\n").unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { densify_config_from_toml(src.as_ptr(), &mut cfg) };
    assert_eq!(status, DensifyStatus::Validation);
    assert!(cfg.is_null());
    assert!(last_error().contains("line 6"), "{}", last_error());

    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { densify_config_from_preset(name.as_ptr(), &mut cfg) }, DensifyStatus::Validation);
}

#[test]
fn coverage_and_capacity() {
    let cfg = preset("fig2b");
    let y = [1.0, 3.0, 10.0];
    let mut p = [0.0; 3];
    let mut ci = [0.0; 3];
    let (mut c, mut se) = (0.0, 0.0);
    unsafe {
        assert_eq!(densify_config_set_trials(cfg, 500), DensifyStatus::Ok);
        assert_eq!(densify_config_set_trials(cfg, 0), DensifyStatus::InvalidArgument);
        assert_eq!(densify_coverage(cfg, 1.0, y.as_ptr(), 3, p.as_mut_ptr(), ci.as_mut_ptr()), DensifyStatus::Ok);
        assert!(p[0] >= p[1] && p[1] >= p[2]);
        assert!(ci.iter().all(|&h| h > 0.0));
        assert_eq!(densify_capacity(cfg, 1.0, &mut c, &mut se), DensifyStatus::Ok);
        assert!(c > 0.0 && se > 0.0);
        let unsorted = [1.0, 0.1];
        assert_eq!(
            densify_coverage(cfg, 1.0, unsorted.as_ptr(), 2, p.as_mut_ptr(), ptr::null_mut()),
            DensifyStatus::Validation
        );
        densify_config_free(cfg);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/densify.h")).unwrap();
    for name in [
        "DENSIFY_H",
        "typedef struct DensifyConfig DensifyConfig",
        "DENSIFY_STATUS_OK",
        "DENSIFY_STATUS_PANIC",
        "DENSIFY_REGIME_INVERSE_U",
        "densify_config_from_toml",
        "densify_config_free",
        "densify_coverage",
        "densify_last_error",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
