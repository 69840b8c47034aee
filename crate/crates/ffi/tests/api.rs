use std::ffi::CStr;
use std::ptr;

use linfball_ffi::*;

fn matrix(rows: usize, cols: usize, data: &[f64]) -> *mut LfbMatrix {
    let mut m = ptr::null_mut();
    let status = unsafe { lfb_matrix_new(rows, cols, data.as_ptr(), &mut m) };
    assert_eq!(status, LfbStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = lfb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn worked_example_through_the_c_abi() {
    let m = matrix(2, 2, &[0.5, 0.2, 0.1, 0.1]);
    unsafe {
        assert_eq!(lfb_matrix_rows(m), 2);
        assert_eq!(lfb_matrix_cols(m), 2);
        assert!((lfb_matrix_norm_linf_1(m) - 0.6).abs() < 1e-15);

        for method in [LfbMethod::Newton, LfbMethod::Grf, LfbMethod::Srf] {
            let opts = LfbOptions {
                method,
                ..lfb_options_default()
            };
            let mut r = ptr::null_mut();
            assert_eq!(lfb_project(m, 0.3, &opts, &mut r), LfbStatus::Ok);
            assert!(lfb_result_converged(r));
            assert!((lfb_result_gamma(r) - 0.2).abs() < 1e-12);
            assert!(lfb_result_iterations(r) >= 1 || lfb_result_evaluations(r) >= 1);
            assert!(lfb_result_residual(r) <= 1e-12);
            assert!(lfb_result_elapsed_seconds(r) >= 0.0);
            if method == LfbMethod::Newton {
                // ‖b_2‖1 equals γ*, so a root a few ulps low leaves row 2 at
                // round-off level; only the Newton root lands on it exactly.
                assert_eq!(lfb_result_sparsity_percent(r), 50.0);
            }

            let mut x = [f64::NAN; 4];
            assert_eq!(lfb_result_copy_x(r, x.as_mut_ptr(), 4), LfbStatus::Ok);
            let want = [0.3, 0.2, 0.0, 0.0];
            for (a, b) in x.iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{method:?}: {x:?}");
            }
            lfb_result_free(r);
        }
        lfb_matrix_free(m);
    }
}

#[test]
fn null_options_mean_defaults() {
    let m = matrix(1, 3, &[3.0, -1.0, 0.5]);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(lfb_project(m, 1.0, ptr::null(), &mut r), LfbStatus::Ok);
        let mut x = [0.0; 3];
        assert_eq!(lfb_result_copy_x(r, x.as_mut_ptr(), 3), LfbStatus::Ok);
        assert_eq!(x, [1.0, -1.0, 0.5]);
        lfb_result_free(r);
        lfb_matrix_free(m);
    }
}

#[test]
fn argument_errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        let data = [1.0, f64::NAN];
        assert_eq!(
            lfb_matrix_new(1, 2, data.as_ptr(), &mut m),
            LfbStatus::NonFinite
        );
        assert!(m.is_null());
        assert_eq!(
            lfb_matrix_new(0, 2, data.as_ptr(), &mut m),
            LfbStatus::InvalidArgument
        );
        assert_eq!(
            lfb_matrix_new(1, 2, ptr::null(), &mut m),
            LfbStatus::NullPointer
        );
        assert!(last_error().contains("data"));
        assert_eq!(
            lfb_matrix_new(1, 2, data.as_ptr(), ptr::null_mut()),
            LfbStatus::NullPointer
        );

        let m = matrix(1, 2, &[1.0, 2.0]);
        let mut r = ptr::null_mut();
        assert_eq!(
            lfb_project(m, -1.0, ptr::null(), &mut r),
            LfbStatus::InvalidArgument
        );
        assert!(r.is_null());
        assert!(last_error().contains("-1"), "{}", last_error());
        assert_eq!(
            lfb_project(ptr::null(), 1.0, ptr::null(), &mut r),
            LfbStatus::NullPointer
        );

        let bad = LfbOptions {
            tolerance: -1.0,
            ..lfb_options_default()
        };
        assert_eq!(
            lfb_project(m, 1.0, &bad, &mut r),
            LfbStatus::InvalidArgument
        );

        assert_eq!(lfb_project(m, 1.0, ptr::null(), &mut r), LfbStatus::Ok);
        let mut small = [0.0; 1];
        assert_eq!(
            lfb_result_copy_x(r, small.as_mut_ptr(), 1),
            LfbStatus::InvalidArgument
        );
        assert_eq!(
            lfb_result_copy_x(r, ptr::null_mut(), 2),
            LfbStatus::NullPointer
        );
        assert_eq!(
            lfb_result_copy_x(ptr::null(), small.as_mut_ptr(), 1),
            LfbStatus::NullPointer
        );
        lfb_result_free(r);
        lfb_matrix_free(m);
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        lfb_matrix_free(ptr::null_mut());
        lfb_result_free(ptr::null_mut());
        assert_eq!(lfb_matrix_rows(ptr::null()), 0);
        assert!(lfb_result_gamma(ptr::null()).is_nan());
        assert!(!lfb_result_converged(ptr::null()));
    }
}

#[test]
fn iteration_limit_yields_not_converged_with_a_result() {
    let data: Vec<f64> = (0..400)
        .map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5)
        .collect();
    let m = matrix(40, 10, &data);
    unsafe {
        let opts = LfbOptions {
            max_iter: 1,
            use_initial_point: false,
            ..lfb_options_default()
        };
        let mut r = ptr::null_mut();
        assert_eq!(lfb_project(m, 0.05, &opts, &mut r), LfbStatus::NotConverged);
        assert!(!r.is_null());
        assert!(!lfb_result_converged(r));
        assert!(last_error().contains("no convergence"));
        lfb_result_free(r);
        lfb_matrix_free(m);
    }
}

#[test]
fn l1_vector_projection() {
    let u = [0.5, -0.2, 0.1];
    let mut out = [0.0; 3];
    let mut t = f64::NAN;
    unsafe {
        assert_eq!(
            lfb_project_l1(u.as_ptr(), 3, 0.4, out.as_mut_ptr(), &mut t),
            LfbStatus::Ok
        );
    }
    assert!((t - 0.15).abs() < 1e-15);
    assert!((out[0] - 0.35).abs() < 1e-15 && (out[1] + 0.05).abs() < 1e-15 && out[2] == 0.0);

    // In place, without asking for the threshold.
    let mut v = [0.5, -0.2, 0.1];
    unsafe {
        let p = v.as_mut_ptr();
        assert_eq!(lfb_project_l1(p, 3, 0.4, p, ptr::null_mut()), LfbStatus::Ok);
        assert_eq!(
            lfb_project_l1(p, 3, -1.0, p, ptr::null_mut()),
            LfbStatus::InvalidArgument
        );
    }
    assert_eq!(v, out);
}

#[test]
fn status_strings() {
    for (s, want) in [
        (LfbStatus::Ok, "ok"),
        (LfbStatus::NotConverged, "not converged"),
        (LfbStatus::Internal, "internal error"),
    ] {
        let got = unsafe { CStr::from_ptr(lfb_status_string(s)) };
        assert_eq!(got.to_str().unwrap(), want);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/linfball.h"))
            .unwrap();
    for name in [
        "lfb_matrix_new",
        "lfb_matrix_free",
        "lfb_project",
        "lfb_result_copy_x",
        "lfb_result_free",
        "lfb_status_string",
        "lfb_last_error",
        "lfb_project_l1",
        "LFB_STATUS_NOT_CONVERGED",
        "typedef struct LfbMatrix LfbMatrix;",
    ] {
        assert!(header.contains(name), "header is missing {name}");
    }
}
