use std::ffi::{CStr, CString};
use std::ptr;

use ksearch_ffi::*;

fn last_error() -> String {
    let p = ks_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn generate_count_and_free() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(ks_generate_ff(10, 60, 3, 7, ptr::null(), &mut h), KsStatus::Ok);
        let (mut n, mut m, mut k) = (0, 0, 0);
        assert_eq!(ks_instance_shape(h, &mut n, &mut m, &mut k), KsStatus::Ok);
        assert_eq!((n, m, k), (10, 60, 3));
        let mut t = 0u64;
        assert_eq!(ks_instance_planted(h, &mut t), KsStatus::Ok);
        let mut sat = 0u32;
        assert_eq!(ks_count_satisfied(h, t, &mut sat), KsStatus::Ok);
        assert_eq!(sat, 60);
        let mut count = 0u64;
        assert_eq!(ks_count_interpretations(h, &mut count), KsStatus::Ok);
        assert!(count >= 1);
        ks_instance_free(h);
    }
}

#[test]
fn planted_target_is_honoured() {
    unsafe {
        let t = 0b1011_0110u64;
        let mut h = ptr::null_mut();
        assert_eq!(ks_generate_ff(8, 30, 3, 1, &t, &mut h), KsStatus::Ok);
        let mut got = 0;
        assert_eq!(ks_instance_planted(h, &mut got), KsStatus::Ok);
        assert_eq!(got, t);
        ks_instance_free(h);

        let mut u = ptr::null_mut();
        assert_eq!(ks_generate_f(8, 30, 3, 1, &mut u), KsStatus::Ok);
        assert_eq!(ks_instance_planted(u, &mut got), KsStatus::InvalidArgument);
        assert!(last_error().contains("planted"));
        ks_instance_free(u);
    }
}

#[test]
fn dimacs_round_trip_through_text_and_file() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(ks_generate_fs(9, 40, 3, 3, &mut h), KsStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(ks_instance_to_dimacs(h, &mut text), KsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ks_instance_from_dimacs(text, &mut back), KsStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(ks_instance_to_dimacs(back, &mut again), KsStatus::Ok);
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(again));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("x.cnf").to_str().unwrap()).unwrap();
        assert_eq!(ks_instance_write_dimacs(h, path.as_ptr()), KsStatus::Ok);
        let mut read = ptr::null_mut();
        assert_eq!(ks_instance_read_dimacs(path.as_ptr(), &mut read), KsStatus::Ok);
        let (mut n, mut m) = (0, 0);
        assert_eq!(ks_instance_shape(read, &mut n, &mut m, ptr::null_mut()), KsStatus::Ok);
        assert_eq!((n, m), (9, 40));

        for p in [h, back, read] {
            ks_instance_free(p);
        }
        ks_string_free(text);
        ks_string_free(again);
    }
}

#[test]
fn malformed_input_maps_to_status_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        let bad = CString::new("p cnf 3 1\n1 -9 0\n").unwrap();
        assert_eq!(ks_instance_from_dimacs(bad.as_ptr(), &mut h), KsStatus::Parse);
        assert!(h.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(ks_generate_f(10, 5, 3, 1, ptr::null_mut()), KsStatus::NullPointer);
        assert_eq!(ks_generate_fs(40, 5, 3, 1, &mut h), KsStatus::TooLarge);
        assert_eq!(ks_generate_f(3, 5, 4, 1, &mut h), KsStatus::InvalidArgument);
        let missing = CString::new("/nonexistent/dir/x.cnf").unwrap();
        assert_eq!(ks_instance_read_dimacs(missing.as_ptr(), &mut h), KsStatus::Io);

        // A successful call clears the message.
        let mut p = 0;
        let mut prob = 0.0;
        assert_eq!(ks_first_local_max(10, 2, std::f64::consts::PI, &mut p, &mut prob), KsStatus::Ok);
        assert!(ks_last_error().is_null());
    }
}

#[test]
fn unsatisfiable_instance_is_reported() {
    unsafe {
        let text = CString::new("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(ks_instance_from_dimacs(text.as_ptr(), &mut h), KsStatus::Ok);
        let mut r = std::mem::MaybeUninit::<KsSolveResult>::uninit();
        assert_eq!(ks_solve(h, 1, 0, r.as_mut_ptr()), KsStatus::Unsatisfiable);
        let mut prob = 0.0;
        assert_eq!(ks_run_qs_instance(h, std::f64::consts::PI, 3, &mut prob), KsStatus::Unsatisfiable);
        ks_instance_free(h);
    }
}

#[test]
fn simulations_match_known_values() {
    unsafe {
        let (mut p, mut prob) = (0u32, 0.0);
        assert_eq!(ks_first_local_max(12, 1, std::f64::consts::PI, &mut p, &mut prob), KsStatus::Ok);
        assert_eq!(p, 8);
        assert!((prob - 1.0).abs() < 1e-3);

        let mut traj = vec![0.0; 9];
        assert_eq!(ks_run_qs(12, 1, std::f64::consts::PI, 8, 0b1010, traj.as_mut_ptr(), traj.len()), KsStatus::Ok);
        assert!((traj[0] - 1.0 / 4096.0).abs() < 1e-15);
        assert!((traj[8] - prob).abs() < 1e-12);
        assert_eq!(ks_run_qs(12, 1, std::f64::consts::PI, 8, 0, traj.as_mut_ptr(), 8), KsStatus::InvalidArgument);

        assert_eq!(ks_min_threshold_steps(10, 3, 0.99, KsConvention::Tabulated, &mut p, &mut prob), KsStatus::Ok);
        assert_eq!(p, 98);
        let mut again = 0.0;
        assert_eq!(ks_run_aqs(10, 3, 98, 0, KsConvention::Tabulated, &mut again), KsStatus::Ok);
        assert_eq!(again, prob);
        assert_eq!(ks_run_aqs(10, 3, 0, 0, KsConvention::Tabulated, &mut again), KsStatus::InvalidArgument);
    }
}

#[test]
fn solve_and_classical_return_verified_answers() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(ks_generate_fs(10, 100, 3, 11, &mut h), KsStatus::Ok);
        let mut r = std::mem::MaybeUninit::<KsSolveResult>::uninit();
        assert_eq!(ks_solve(h, 5, 0, r.as_mut_ptr()), KsStatus::Ok);
        let r = r.assume_init();
        assert!(r.satisfied);
        assert_ne!(r.method, KsMethod::Classical);
        let mut sat = 0;
        assert_eq!(ks_count_satisfied(h, r.assignment, &mut sat), KsStatus::Ok);
        assert_eq!(sat, 100);
        let mut prob = 0.0;
        assert_eq!(ks_run_aqs_instance(h, 100, KsConvention::Tabulated, &mut prob), KsStatus::Ok);
        assert!(prob > 0.0 && prob <= 1.0 + 1e-12);
        ks_instance_free(h);

        let mut c = KsClassicalResult::default();
        let target = 0xDEAD_BEEF_CAFE_F00Du64;
        assert_eq!(ks_classical(64, 3, target, 9, &mut c), KsStatus::Ok);
        assert_eq!(c.assignment, target);
        assert!(c.queries > 0);
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        ks_instance_free(ptr::null_mut());
        ks_string_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(ks_version()) }.to_bytes().is_empty());
}
