use std::f64::consts::TAU;
use std::ffi::{CStr, CString};
use std::ptr;

use idealflow_ffi::*;

fn last_error() -> String {
    let p = icf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn circle_queries() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(icf_profile_circle(TAU, 1, 64, &mut p), IcfStatus::Ok);
        let (mut e, mut w, mut h, mut dev) = (1.0, 0.0, 1.0, 1.0);
        let mut n = 0usize;
        assert_eq!(icf_profile_energy(p, &mut e), IcfStatus::Ok);
        assert_eq!(icf_profile_winding(p, &mut w), IcfStatus::Ok);
        assert_eq!(icf_profile_constraint_h(p, &mut h), IcfStatus::Ok);
        assert_eq!(icf_profile_sup_deviation(p, &mut dev), IcfStatus::Ok);
        assert_eq!(icf_profile_len(p, &mut n), IcfStatus::Ok);
        assert_eq!((n, e, dev), (64, 0.0, 0.0));
        assert!((w - 1.0).abs() < 1e-14 && h.abs() < 1e-13);
        icf_profile_free(p);
    }
}

#[test]
fn perturbed_energy_matches_closed_form() {
    unsafe {
        let mut p = ptr::null_mut();
        let (m, a, ph) = ([2u32], [0.1], [0.0]);
        assert_eq!(
            icf_profile_perturbed(TAU, 1, 128, m.as_ptr(), a.as_ptr(), ph.as_ptr(), 1, &mut p),
            IcfStatus::Ok
        );
        let mut e = 0.0;
        icf_profile_energy(p, &mut e);
        assert!((e - 0.02 * std::f64::consts::PI).abs() < 1e-12);
        icf_profile_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            icf_profile_circle(TAU, 0, 64, &mut p),
            IcfStatus::WindingMismatch
        );
        assert!(p.is_null());
        assert!(last_error().contains("winding"));

        assert_eq!(
            icf_profile_circle(TAU, 1, 15, &mut p),
            IcfStatus::InvalidArgument
        );
        assert!(last_error().contains("15"));

        // curvature integrating to 2 pi * 1.5 on a winding-1 request
        let k = vec![1.5; 32];
        assert_eq!(
            icf_profile_from_samples(k.as_ptr(), 32, TAU, 1, &mut p),
            IcfStatus::WindingMismatch
        );

        assert_eq!(
            icf_profile_energy(ptr::null(), &mut 0.0),
            IcfStatus::NullPointer
        );
        assert!(last_error().contains("profile"));

        assert_eq!(icf_profile_circle(TAU, 1, 32, &mut p), IcfStatus::Ok);
        assert!(icf_last_error_message().is_null());
        let mut small = [0.0; 8];
        assert_eq!(
            icf_profile_copy_curvature(p, small.as_mut_ptr(), 8),
            IcfStatus::BufferTooSmall
        );
        icf_profile_free(p);
        icf_profile_free(ptr::null_mut());
    }
}

#[test]
fn flow_decays_energy_and_keeps_winding() {
    unsafe {
        let mut p = ptr::null_mut();
        let (m, a, ph) = ([2u32], [1e-3], [0.0]);
        icf_profile_perturbed(TAU, 1, 64, m.as_ptr(), a.as_ptr(), ph.as_ptr(), 1, &mut p);
        let mut e0 = 0.0;
        icf_profile_energy(p, &mut e0);

        let mut f = ptr::null_mut();
        assert_eq!(
            icf_flow_new(p, IcfScheme::ImexBdf2, 1e-4, 0.0, &mut f),
            IcfStatus::Ok
        );
        icf_profile_free(p);
        assert_eq!(icf_flow_step(f, 100), IcfStatus::Ok);

        let (mut t, mut e) = (0.0, 0.0);
        icf_flow_time(f, &mut t);
        icf_flow_energy(f, &mut e);
        assert!((t - 0.01).abs() < 1e-12);
        // linear rate 72
        assert!((e / e0 - (-72.0 * t).exp()).abs() < 1e-3);

        let mut k = vec![0.0; 64];
        assert_eq!(
            icf_flow_copy_curvature(f, k.as_mut_ptr(), k.len()),
            IcfStatus::Ok
        );
        let mut snap = ptr::null_mut();
        assert_eq!(icf_flow_profile(f, &mut snap), IcfStatus::Ok);
        let mut w = 0.0;
        icf_profile_winding(snap, &mut w);
        assert!((w - 1.0).abs() < 1e-12);
        icf_profile_free(snap);
        icf_flow_free(f);
    }
}

#[test]
fn flow_rejects_bad_step() {
    unsafe {
        let mut p = ptr::null_mut();
        icf_profile_circle(TAU, 1, 32, &mut p);
        let mut f = ptr::null_mut();
        assert_eq!(
            icf_flow_new(p, IcfScheme::ImexEuler, -1.0, 0.0, &mut f),
            IcfStatus::InvalidArgument
        );
        assert!(f.is_null());
        icf_profile_free(p);
    }
}

#[test]
fn run_config_json_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().join("r").to_str().unwrap()).unwrap();
    let cfg = CString::new(r#"{"preset": "circle", "t_max": 0.01, "output_stride": 10}"#).unwrap();
    let mut passed = false;
    unsafe {
        assert_eq!(
            icf_run_config_json(cfg.as_ptr(), out.as_ptr(), &mut passed),
            IcfStatus::Ok
        );
        assert!(passed);
        let bad = CString::new(r#"{"preset": "circle", "omega": 0}"#).unwrap();
        assert_eq!(
            icf_run_config_json(bad.as_ptr(), out.as_ptr(), &mut passed),
            IcfStatus::Config
        );
        assert!(last_error().contains("omega"));
    }
    assert!(dir.path().join("r/summary.json").exists());
}
