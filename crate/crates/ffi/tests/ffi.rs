use std::ffi::{CStr, CString};
use std::ptr;

use cvqec_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cvqec_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut v = f64::NAN;
    unsafe {
        assert_eq!(cvqec_modular_reduce(4.0, &mut v), CvqecStatus::Ok);
        assert!((v - (4.0 - 2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12);
        assert_eq!(cvqec_residual_variance(0.2f64.sqrt(), &mut v), CvqecStatus::Ok);
        assert!((v - 0.11593).abs() < 5e-5, "{v}");
        assert_eq!(cvqec_finite_squeezing_residual_variance(0.2, 1.0, &mut v), CvqecStatus::Ok);
        assert!((v - (0.02 + (-2.0f64).exp() / 8.0)).abs() < 1e-12);
        assert_eq!(cvqec_residual_pdf(0.0, 0.3, &mut v), CvqecStatus::Ok);
        assert!(v > 0.0);
    }
    assert!((cvqec_q_function(0.0) - 0.5).abs() < 1e-15);
    assert!(last_error().is_empty());
}

#[test]
fn errors_carry_status_and_message() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(cvqec_modular_reduce(f64::NAN, &mut v), CvqecStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(cvqec_modular_reduce(1.0, ptr::null_mut()), CvqecStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(cvqec_residual_variance(-1.0, &mut v), CvqecStatus::InvalidArgument);
        let mut out = [0.0; 3];
        assert_eq!(cvqec_syndrome(2, [0.0; 7].as_ptr(), out.as_mut_ptr()), CvqecStatus::InvalidArgument);
        assert_eq!(cvqec_syndrome(0, ptr::null(), out.as_mut_ptr()), CvqecStatus::NullPointer);
    }
}

#[test]
fn decoder_round_trip() {
    unsafe {
        let mut dec = ptr::null_mut();
        assert_eq!(cvqec_decoder_new(0, 0.1, 0.0, &mut dec), CvqecStatus::Ok);
        assert!(!dec.is_null());
        for j in 1..=7u32 {
            let mut eps = [0.0; 7];
            eps[j as usize - 1] = 3.0;
            let mut s = [0.0; 3];
            assert_eq!(cvqec_syndrome(0, eps.as_ptr(), s.as_mut_ptr()), CvqecStatus::Ok);
            let mut r = CvqecDecodeResult { j_star: 0, d_hat: 0.0, t: [0.0; 7], triggered: false };
            assert_eq!(cvqec_decoder_decode(dec, s.as_ptr(), 4.0, &mut r), CvqecStatus::Ok);
            assert_eq!(r.j_star, j);
            assert!((r.d_hat - 3.0).abs() < 1e-9);
        }
        let mut var = 0.0;
        assert_eq!(cvqec_decoder_estimator_variance(dec, 1, &mut var), CvqecStatus::Ok);
        assert!(var > 0.0);
        assert_eq!(cvqec_decoder_estimator_variance(dec, 8, &mut var), CvqecStatus::InvalidArgument);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(cvqec_decoder_miscorrection_bound(dec, 2, 1.0, &mut a), CvqecStatus::Ok);
        assert_eq!(cvqec_decoder_miscorrection_bound(dec, 2, 3.0, &mut b), CvqecStatus::Ok);
        assert!(b < a);
        cvqec_decoder_free(dec);
        cvqec_decoder_free(ptr::null_mut());

        let mut r = CvqecDecodeResult { j_star: 0, d_hat: 0.0, t: [0.0; 7], triggered: false };
        assert_eq!(cvqec_decoder_decode(ptr::null(), [0.0; 3].as_ptr(), 4.0, &mut r), CvqecStatus::NullPointer);
        assert_eq!(cvqec_decoder_new(0, 0.0, 0.0, &mut dec), CvqecStatus::DegenerateModel);
        assert_eq!(cvqec_decoder_new(0, 0.1, -1.0, &mut dec), CvqecStatus::InvalidArgument);
        assert_eq!(cvqec_decoder_new(0, 0.1, 0.0, ptr::null_mut()), CvqecStatus::NullPointer);
    }
}

#[test]
fn experiment_handle() {
    let cfg = CString::new(r#"{"rounds": 12, "trajectories": 10, "seed": 5}"#).unwrap();
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(cvqec_experiment_run(cfg.as_ptr(), 2, 1, &mut a), CvqecStatus::Ok, "{}", last_error());
        assert_eq!(cvqec_experiment_run(cfg.as_ptr(), 2, 4, &mut b), CvqecStatus::Ok);
        assert_eq!(cvqec_stats_rounds(a), 12);
        let mut ma = vec![0.0; 12];
        let mut mb = vec![0.0; 12];
        assert_eq!(cvqec_stats_copy_mean(a, ma.as_mut_ptr(), ma.len()), CvqecStatus::Ok);
        assert_eq!(cvqec_stats_copy_mean(b, mb.as_mut_ptr(), mb.len()), CvqecStatus::Ok);
        assert_eq!(ma, mb);
        let mut sd = vec![0.0; 12];
        assert_eq!(cvqec_stats_copy_std(a, sd.as_mut_ptr(), sd.len()), CvqecStatus::Ok);
        assert!(sd.iter().all(|s| *s >= 0.0));
        assert_eq!(cvqec_stats_copy_std(a, sd.as_mut_ptr(), 5), CvqecStatus::InvalidArgument);
        cvqec_stats_free(a);
        cvqec_stats_free(b);
        assert_eq!(cvqec_stats_rounds(ptr::null()), 0);

        let mut s = ptr::null_mut();
        let bad = CString::new(r#"{"sigma": 0.2}"#).unwrap();
        assert_eq!(cvqec_experiment_run(bad.as_ptr(), 0, 1, &mut s), CvqecStatus::Config);
        assert!(last_error().contains("sigma"));
        assert_eq!(cvqec_experiment_run(cfg.as_ptr(), 3, 1, &mut s), CvqecStatus::InvalidArgument);
        assert!(s.is_null());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cvqec_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_public_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cvqec.h")).unwrap();
    for name in [
        "CVQEC_STATUS_NULL_POINTER",
        "typedef struct CvqecDecoder CvqecDecoder;",
        "typedef struct CvqecStats CvqecStats;",
        "cvqec_last_error(void)",
        "cvqec_decoder_new(",
        "cvqec_decoder_decode(",
        "cvqec_decoder_free(",
        "cvqec_experiment_run(",
        "cvqec_stats_copy_mean(",
        "cvqec_syndrome(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
