use super::*;
use crate::hamiltonian::{build_hc_normalized, build_hk, dense_hadamard};
use crate::instances::{generate_ff, surviving_assignments};
use nalgebra::{DMatrix, DVector};

type CMat = DMatrix<Complex64>;

fn random_state(n: usize, seed: u64) -> Statevector {
    let mut rng = rng::stream(seed, 0);
    let mut amp: Vec<Complex64> =
        (0..1 << n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amp.iter_mut().for_each(|a| *a /= norm);
    Statevector::from_amplitudes(n, amp).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn dense_h(n: usize) -> CMat {
    dense_hadamard(n).map(|v| Complex64::new(v, 0.0))
}

fn dense_phase(h: &DiagonalHamiltonian, theta: f64) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        h.len(),
        h.values().iter().map(|&v| Complex64::from_polar(1.0, -theta * v)),
    ))
}

fn apply_dense(u: &CMat, psi: &Statevector) -> Vec<Complex64> {
    (u * DVector::from_column_slice(psi.amplitudes())).iter().copied().collect()
}

fn grover_closed_form(n: usize, p: usize) -> f64 {
    let a = (-(n as f64) / 2.0).exp2().asin();
    ((2 * p + 1) as f64 * a).sin().powi(2)
}

#[test]
fn fwht_matches_dense_hadamard() {
    let psi = random_state(3, 4);
    let want = apply_dense(&dense_h(3), &psi);
    let mut got = psi.clone();
    fwht(&mut got);
    assert!(max_diff(got.amplitudes(), &want) < 1e-12);
    let mut zero = Statevector::basis(4, 0).unwrap();
    fwht(&mut zero);
    assert!(zero.amplitudes().iter().all(|a| (a.re - 0.25).abs() < 1e-15 && a.im == 0.0));
}

#[test]
fn fwht_involution_and_norm_on_random_states() {
    for seed in 0..100 {
        let psi = random_state(1 + (seed as usize % 10), seed);
        let mut phi = psi.clone();
        fwht(&mut phi);
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-12);
        fwht(&mut phi);
        assert!(max_diff(phi.amplitudes(), psi.amplitudes()) < 1e-12);
    }
}

#[test]
fn diag_phase_examples() {
    let h = build_hk0(5, 2).unwrap();
    let psi = random_state(5, 1);
    let mut same = psi.clone();
    apply_diag_phase(&mut same, &h, 0.0).unwrap();
    assert_eq!(same, psi);

    let mut phased = psi.clone();
    apply_diag_phase(&mut phased, &h, 0.7).unwrap();
    assert!((phased.norm_sqr() - 1.0).abs() < 1e-12);

    // Full-width objective at θ = π is the sign-flip oracle on the target.
    let oracle = build_hk0(4, 4).unwrap();
    let mut u = Statevector::uniform(4).unwrap();
    apply_diag_phase(&mut u, &oracle, PI).unwrap();
    assert!((u.amplitudes()[0].re + 0.25).abs() < 1e-15);
    assert!(u.amplitudes()[1..].iter().all(|a| (a.re - 0.25).abs() < 1e-15 && a.im.abs() < 1e-15));

    assert!(apply_diag_phase(&mut u, &build_hk0(3, 1).unwrap(), 1.0).is_err());
}

#[test]
fn leveled_phase_equals_direct_phase() {
    let inst = generate_ff(9, 50, 3, 2, None).unwrap();
    let h = build_hc_normalized(&inst).unwrap();
    let psi = random_state(9, 3);
    let mut a = psi.clone();
    let mut b = psi.clone();
    apply_diag_phase(&mut a, &h, 1.3).unwrap();
    PhaseDiagonal::new(&h).apply(&mut b, 1.3);
    assert!(max_diff(a.amplitudes(), b.amplitudes()) < 1e-15);
}

#[test]
fn qs_iterate_matches_dense_product() {
    let (n, k, theta) = (4, 2, 0.9);
    let t: Assignment = "1011".parse().unwrap();
    let cost = build_hk(n, k, &t).unwrap();
    let mix = build_hk0(n, k).unwrap();
    let hn = dense_h(n);
    let u = &hn * dense_phase(&mix, theta) * &hn * dense_phase(&cost, theta);
    let psi = random_state(n, 9);
    let want = apply_dense(&u, &psi);
    let mut got = psi;
    qs_iterate(&mut got, &cost, &mix, theta).unwrap();
    assert!(max_diff(got.amplitudes(), &want) < 1e-12);

    let before = random_state(n, 10);
    let mut same = before.clone();
    qs_iterate(&mut same, &cost, &mix, 0.0).unwrap();
    assert!(max_diff(same.amplitudes(), before.amplitudes()) < 1e-12);
}

#[test]
fn aqs_matches_dense_product_in_both_conventions() {
    let (n, k, p) = (4, 2, 3);
    let t: Assignment = "0110".parse().unwrap();
    let cost = build_hk(n, k, &t).unwrap();
    let mix = build_hk0(n, k).unwrap();
    let hn = dense_h(n);
    for conv in [ScheduleConvention::Tabulated, ScheduleConvention::Transcribed] {
        let mut u = CMat::identity(1 << n, 1 << n);
        for l in 1..=p {
            let (a, b) = conv.angles(l, p);
            u = &hn * dense_phase(&mix, b) * &hn * dense_phase(&cost, a) * u;
        }
        let want = apply_dense(&u, &Statevector::uniform(n).unwrap());
        let engine = SearchEngine::new(&cost, k).unwrap();
        let got = engine.aqs_state(AdiabaticParams::with_convention(p, conv).unwrap()).unwrap();
        assert!(max_diff(got.amplitudes(), &want) < 1e-12, "{conv:?}");
        let prob = run_aqs(n, k, &cost, AdiabaticParams::with_convention(p, conv).unwrap(), &t).unwrap();
        assert!((prob - want[t.bits() as usize].norm_sqr()).abs() < 1e-12);
    }
}

#[test]
fn transcribed_angles() {
    let (a, b) = ScheduleConvention::Transcribed.angles(1, 3);
    assert!((a - PI / 4.0).abs() < 1e-15 && (b - PI / 2.0).abs() < 1e-15);
    let (a, b) = ScheduleConvention::Tabulated.angles(3, 3);
    assert!((a - 1.5 * PI).abs() < 1e-15 && (b - PI / 2.0).abs() < 1e-15);
}

#[test]
fn uniform_start_and_zero_iterations() {
    let t = Assignment::zeros(6).unwrap();
    let cost = build_hk(6, 2, &t).unwrap();
    let tr = run_qs(6, 2, &cost, SearchParams::new(PI, 0).unwrap(), &t).unwrap();
    assert_eq!(tr.len(), 1);
    assert!((tr[0] - 1.0 / 64.0).abs() < 1e-15);
    assert!(SearchParams::new(0.0, 3).is_err());
    assert!(SearchParams::new(4.0, 3).is_err());
    assert!(AdiabaticParams::new(0).is_err());
}

#[test]
fn grover_reduction_matches_closed_form() {
    for n in 2..=12 {
        let t = Assignment::new(n, 0x5A5 & ((1u64 << n) - 1)).unwrap();
        let cost = build_hk(n, n, &t).unwrap();
        let p = 2 * ((PI / 4.0) * (n as f64 / 2.0).exp2()).round() as usize;
        let tr = run_qs(n, n, &cost, SearchParams::new(PI, p).unwrap(), &t).unwrap();
        for (i, &v) in tr.iter().enumerate() {
            assert!((v - grover_closed_form(n, i)).abs() < 1e-10, "n = {n}, p = {i}");
        }
    }
    let t = Assignment::zeros(10).unwrap();
    let cost = build_hk(10, 10, &t).unwrap();
    let p = ((PI / 4.0) * 32.0).round() as usize;
    let tr = run_qs(10, 10, &cost, SearchParams::new(PI, p).unwrap(), &t).unwrap();
    assert!(tr[p] >= 1.0 - 2f64.powi(-10));
}

#[test]
fn grover_first_local_max() {
    let t = Assignment::zeros(8).unwrap();
    let cost = build_hk(8, 8, &t).unwrap();
    let lm = find_first_local_max(8, 8, &cost, PI, &t).unwrap();
    assert_eq!(lm.p, 12);
    assert!(!lm.plateau);
}

#[test]
fn table_one_samples() {
    let cases = [(1, 10, 7, 0.958), (2, 10, 5, 0.987), (3, 10, 5, 0.921)];
    for (k, n, p, prob) in cases {
        let t = Assignment::zeros(n).unwrap();
        let cost = build_hk(n, k, &t).unwrap();
        let lm = find_first_local_max(n, k, &cost, PI, &t).unwrap();
        assert_eq!(lm.p, p, "k = {k}, n = {n}");
        assert!((lm.prob - prob).abs() < 1e-3, "k = {k}, n = {n}: {}", lm.prob);
    }
}

#[test]
fn target_reduction_is_exact() {
    for n in [4usize, 7, 10, 12] {
        for k in 1..=3 {
            let t = Assignment::new(n, 0xB6D & ((1u64 << n) - 1)).unwrap();
            let zero = Assignment::zeros(n).unwrap();
            let params = SearchParams::new(PI, 6).unwrap();
            let a = run_qs(n, k, &build_hk(n, k, &t).unwrap(), params, &t).unwrap();
            let b = run_qs(n, k, &build_hk0(n, k).unwrap(), params, &zero).unwrap();
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n = {n}, k = {k}: {err}");
        }
    }
}

#[test]
fn small_angle_tracks_full_angle() {
    for n in [8usize, 10, 12, 14] {
        let t = Assignment::zeros(n).unwrap();
        let cost = build_hk(n, 3, &t).unwrap();
        let engine = SearchEngine::new(&cost, 3).unwrap();
        let lm = engine.first_local_max(PI, &[0], default_qs_cap(n)).unwrap();
        let fine = engine.qs_trajectory(PI / n as f64, n * lm.p, &[0]).unwrap();
        assert!((fine[n * lm.p] - lm.prob).abs() <= 0.1, "n = {n}");
    }
}

#[test]
fn threshold_search_finds_tabulated_step_count() {
    let t = Assignment::zeros(10).unwrap();
    let cost = build_hk(10, 3, &t).unwrap();
    let r = find_min_threshold_steps(10, 3, &cost, 0.99, &t, ThresholdSearch::default()).unwrap();
    assert_eq!(r.p, 98);
    assert!(r.prob >= 0.99);
}

#[test]
fn threshold_search_agrees_with_linear_scan() {
    let n = 6;
    let t = Assignment::zeros(n).unwrap();
    let cost = build_hk(n, 3, &t).unwrap();
    let engine = SearchEngine::new(&cost, 3).unwrap();
    let scan = |thr: f64| {
        (1..400).find(|&p| engine.aqs_probability(AdiabaticParams::new(p).unwrap(), &[0]).unwrap() >= thr).unwrap()
    };
    let tiny = 2f64.powi(-(n as i32));
    let r = engine.min_threshold_steps(tiny, &[0], ThresholdSearch::default()).unwrap();
    assert_eq!(r.p, scan(tiny));
    let r = engine.min_threshold_steps(0.9, &[0], ThresholdSearch::default()).unwrap();
    assert_eq!(r.p, scan(0.9));
    let tight = ThresholdSearch { cap: Some(2), ..Default::default() };
    assert!(matches!(engine.min_threshold_steps(0.999, &[0], tight), Err(Error::BudgetExhausted(_))));
}

#[test]
fn long_schedules_do_not_degrade() {
    let n = 8;
    let t = Assignment::zeros(n).unwrap();
    let cost = build_hk(n, 3, &t).unwrap();
    let engine = SearchEngine::new(&cost, 3).unwrap();
    let base = engine.min_threshold_steps(0.99, &[0], ThresholdSearch::default()).unwrap();
    let long = engine.aqs_probability(AdiabaticParams::new(10 * base.p).unwrap(), &[0]).unwrap();
    assert!(long >= base.prob - 0.005, "{long} vs {}", base.prob);
}

#[test]
fn survivor_set_probability_counts_every_interpretation() {
    let inst = generate_ff(8, 40, 3, 6, None).unwrap();
    let h = build_hc_normalized(&inst).unwrap();
    let sols = surviving_assignments(&inst).unwrap().to_vec();
    let engine = SearchEngine::new(&h, 3).unwrap();
    let psi = engine.aqs_state(AdiabaticParams::new(30).unwrap()).unwrap();
    let total: f64 = sols.iter().map(|&x| psi.probability(x)).sum();
    assert!((engine.aqs_probability(AdiabaticParams::new(30).unwrap(), &sols).unwrap() - total).abs() < 1e-15);
}

#[test]
fn sampling() {
    let t: Assignment = "1101".parse().unwrap();
    let psi = Statevector::basis(4, t.bits()).unwrap();
    for seed in 0..20 {
        assert_eq!(sample_measurement(&psi, seed).unwrap(), t);
    }
    let u = Statevector::uniform(4).unwrap();
    let draws = sample_shots(&u, 100_000, 5).unwrap();
    assert_eq!(draws, sample_shots(&u, 100_000, 5).unwrap());
    let mut counts = [0usize; 16];
    for d in &draws {
        counts[d.bits() as usize] += 1;
    }
    let e = 100_000.0 / 16.0;
    let chi2: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
    // 15 degrees of freedom; 4 standard deviations above the mean.
    assert!(chi2 < 15.0 + 4.0 * 30f64.sqrt(), "chi2 = {chi2}");
}
