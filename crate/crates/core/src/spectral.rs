//! Top of the spectrum of the mixer-plus-cost operators, gap scans and the
//! dense lemma checks.
//!
//! Operators are applied matrix-free as
//! `v ↦ w_c · h_cost ∘ v + w_m · H^{⊗n}(h_mix0 ∘ H^{⊗n} v)`. The two largest
//! eigenvalues come from a restarted Rayleigh–Ritz iteration whose subspace is
//! grown by the residuals of the current top Ritz pairs (a block Krylov method).

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::RngExt;
use serde::Serialize;

use crate::combinatorics::Assignment;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{build_dense_hbk, build_hk, build_hk0, DiagonalHamiltonian};
use crate::rng;
use crate::simulator::fwht_in_place;

/// Largest n accepted by the gap-scaling fit.
pub const MAX_SPECTRAL_VARS: usize = 20;

/// Weighted sum of a cost diagonal and the Hadamard-conjugated mixer diagonal.
#[derive(Clone, Debug)]
pub struct OperatorHandle {
    n: usize,
    diag_cost: DiagonalHamiltonian,
    diag_mix0: DiagonalHamiltonian,
    weight_cost: f64,
    weight_mix: f64,
}

impl OperatorHandle {
    pub fn new(
        diag_cost: DiagonalHamiltonian,
        diag_mix0: DiagonalHamiltonian,
        weight_cost: f64,
        weight_mix: f64,
    ) -> Result<Self> {
        if diag_cost.n() != diag_mix0.n() {
            return Err(Error::DimensionMismatch { expected: diag_cost.n(), got: diag_mix0.n() });
        }
        if !(weight_cost.is_finite() && weight_mix.is_finite()) {
            return Err(invalid("operator weights must be finite"));
        }
        Ok(Self { n: diag_cost.n(), diag_cost, diag_mix0, weight_cost, weight_mix })
    }

    /// Mixer plus cost with unit weights.
    pub fn sum(cost: &DiagonalHamiltonian, k: usize) -> Result<Self> {
        Self::new(cost.clone(), build_hk0(cost.n(), k)?, 1.0, 1.0)
    }

    /// `s · cost + (1 - s) · mixer`.
    pub fn interpolated(cost: &DiagonalHamiltonian, k: usize, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid(format!("interpolation point s = {s} outside [0, 1]")));
        }
        Self::new(cost.clone(), build_hk0(cost.n(), k)?, s, 1.0 - s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.weight_cost, self.weight_mix)
    }

    /// `out ← A v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        if self.weight_mix != 0.0 {
            out.copy_from_slice(v);
            fwht_in_place(out);
            for (o, &h) in out.iter_mut().zip(self.diag_mix0.values()) {
                *o *= h;
            }
            fwht_in_place(out);
            for ((o, &x), &h) in out.iter_mut().zip(v).zip(self.diag_cost.values()) {
                *o = self.weight_mix * *o + self.weight_cost * h * x;
            }
        } else {
            for ((o, &x), &h) in out.iter_mut().zip(v).zip(self.diag_cost.values()) {
                *o = self.weight_cost * h * x;
            }
        }
    }

    /// Dense matrix of the operator, built column by column (small n only).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n > crate::hamiltonian::MAX_DENSE_VARS {
            return Err(Error::TooLarge {
                n: self.n,
                limit: crate::hamiltonian::MAX_DENSE_VARS,
                what: "a dense operator",
            });
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        let mut col = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(m)
    }
}

/// Two largest eigenvalues of an operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Interpolation point, or `None` for the unit-weight sum.
    pub s: Option<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    /// Operator applications used.
    pub iterations: usize,
    /// Largest residual norm `‖Av - λv‖` of the two returned pairs.
    pub residual: f64,
    /// The top eigenvalue is degenerate to within the tolerance; `gap` is then 0.
    pub degenerate: bool,
}

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Target residual is `10 · tol`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Subspace size that triggers a restart.
    pub max_basis: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 50_000, max_basis: 24, seed: 0x5eed }
    }
}

/// Top two eigenpairs with the default controls and the given tolerance.
pub fn top_two_eigen(op: &OperatorHandle, tol: f64) -> Result<SpectrumResult> {
    top_two_eigen_with(op, EigenOptions { tol, ..Default::default() })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `v` against `basis` twice; returns the remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    norm(v)
}

/// `Σ_j coef[j] · vecs[j]`.
fn combine(vecs: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vecs[0].len()];
    for (v, &c) in vecs.iter().zip(coef) {
        out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
    }
    out
}

/// Eigenpairs of a symmetric matrix, sorted by decreasing eigenvalue.
fn sorted_eigen(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs =
        DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

pub fn top_two_eigen_with(op: &OperatorHandle, opts: EigenOptions) -> Result<SpectrumResult> {
    if opts.tol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(invalid("tolerance must be positive"));
    }
    let dim = op.dim();
    if dim < 2 {
        return Err(invalid("operator needs at least two eigenvalues"));
    }
    let s = (op.weight_cost + op.weight_mix == 1.0).then_some(op.weight_cost);
    if dim <= 64 {
        let (vals, _) = sorted_eigen(op.to_dense()?);
        return Ok(finish(s, vals[0], vals[1], dim, 0.0, opts.tol));
    }
    let target = 10.0 * opts.tol;
    let max_basis = opts.max_basis.max(6);
    let mut rng = rng::stream(opts.seed, 0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut applications = 0usize;

    let mut pending: Vec<Vec<f64>> = (0..2).map(|_| (0..dim).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    loop {
        for mut v in pending.drain(..) {
            let nv = orthogonalize(&mut v, &basis);
            if nv < 1e-10 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let mut w = vec![0.0; dim];
            op.apply(&v, &mut w);
            applications += 1;
            basis.push(v);
            images.push(w);
        }
        let m = basis.len();
        if m < 2 {
            return Err(Error::NoConvergence("Krylov subspace collapsed".into()));
        }
        let g = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let (vals, vecs) = sorted_eigen(g);

        let mut residual = 0f64;
        let mut ritz = Vec::with_capacity(2);
        for (idx, &theta) in vals.iter().enumerate().take(2) {
            let y: Vec<f64> = vecs.column(idx).iter().copied().collect();
            let u = combine(&basis, &y);
            let au = combine(&images, &y);
            let r: Vec<f64> = au.iter().zip(&u).map(|(a, x)| a - theta * x).collect();
            let rn = norm(&r);
            residual = residual.max(rn);
            ritz.push((rn, r));
        }
        if residual <= target {
            return Ok(finish(s, vals[0], vals[1], applications, residual, opts.tol));
        }
        if applications >= opts.max_iterations {
            return Err(Error::NoConvergence(format!(
                "top-two eigensolve: residual {residual:.3e} after {applications} applications"
            )));
        }
        if m + 2 > max_basis {
            // Thick restart onto the leading Ritz vectors.
            let keep = (max_basis / 3).max(4).min(m);
            let cols: Vec<Vec<f64>> = (0..keep).map(|j| vecs.column(j).iter().copied().collect()).collect();
            let new_basis: Vec<Vec<f64>> = cols.iter().map(|y| combine(&basis, y)).collect();
            let new_images: Vec<Vec<f64>> = cols.iter().map(|y| combine(&images, y)).collect();
            basis = new_basis;
            images = new_images;
        }
        pending = ritz.into_iter().filter(|(rn, _)| *rn > target).map(|(_, r)| r).collect();
    }
}

fn finish(s: Option<f64>, l1: f64, l2: f64, iterations: usize, residual: f64, tol: f64) -> SpectrumResult {
    let raw = l1 - l2;
    let degenerate = raw <= 10.0 * tol;
    SpectrumResult {
        s,
        lambda1: l1,
        lambda2: l2,
        gap: if degenerate { 0.0 } else { raw },
        iterations,
        residual,
        degenerate,
    }
}

/// Gaps along the interpolation `s · cost + (1 - s) · mixer`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScan {
    pub n: usize,
    pub k: usize,
    pub points: Vec<SpectrumResult>,
    pub argmin_s: f64,
    pub min_gap: f64,
}

pub fn gap_scan(n: usize, k: usize, h_cost: &DiagonalHamiltonian, s_grid: &[f64]) -> Result<GapScan> {
    if h_cost.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h_cost.n() });
    }
    if s_grid.is_empty() {
        return Err(invalid("empty s grid"));
    }
    let mix = build_hk0(n, k)?;
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid(format!("interpolation point s = {s} outside [0, 1]")));
        }
        let op = OperatorHandle::new(h_cost.clone(), mix.clone(), s, 1.0 - s)?;
        let mut r = top_two_eigen(&op, 1e-10)?;
        r.s = Some(s);
        points.push(r);
    }
    let best = points.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).expect("grid is nonempty");
    let (argmin_s, min_gap) = (best.s.unwrap_or(0.0), best.gap);
    Ok(GapScan { n, k, points, argmin_s, min_gap })
}

/// Which operator the scaling fit measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMode {
    /// Unit-weight sum of mixer and objective.
    Sum,
    /// The interpolation at `s = 1/2`.
    Midpoint,
}

impl std::str::FromStr for GapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "midpoint" => Ok(Self::Midpoint),
            other => Err(invalid(format!("unknown gap mode {other:?}"))),
        }
    }
}

/// Objective locality for a family over n: a fixed k or k = n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locality {
    Fixed(usize),
    Full,
}

impl Locality {
    pub fn k(self, n: usize) -> usize {
        match self {
            Self::Fixed(k) => k,
            Self::Full => n,
        }
    }
}

/// Least-squares fits of gap against n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub ns: Vec<usize>,
    pub gaps: Vec<f64>,
    /// Slope of `ln gap` against `ln n`.
    pub slope: f64,
    pub intercept: f64,
    pub r2_loglog: f64,
    /// Slope of `ln gap` against n and its fit quality.
    pub slope_loglinear: f64,
    pub r2_loglinear: f64,
}

/// Ordinary least squares; returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let my = y.iter().sum::<f64>() / len;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Gap of the objective-plus-mixer family for each n (target 0 without loss of
/// generality) and power-law / exponential fits.
pub fn gap_scaling_fit(locality: Locality, n_range: &[usize], mode: GapMode) -> Result<ScalingFit> {
    if n_range.len() < 4 {
        return Err(invalid("gap scaling needs at least four values of n"));
    }
    let mut gaps = Vec::with_capacity(n_range.len());
    for &n in n_range {
        if n == 0 || n > MAX_SPECTRAL_VARS {
            return Err(Error::TooLarge { n, limit: MAX_SPECTRAL_VARS, what: "the gap-scaling fit" });
        }
        let k = locality.k(n);
        let cost = build_hk(n, k, &Assignment::zeros(n)?)?;
        let op = match mode {
            GapMode::Sum => OperatorHandle::sum(&cost, k)?,
            GapMode::Midpoint => OperatorHandle::interpolated(&cost, k, 0.5)?,
        };
        let r = top_two_eigen(&op, 1e-10)?;
        if r.degenerate {
            return Err(Error::NoConvergence(format!("degenerate top eigenvalue at n = {n}")));
        }
        gaps.push(r.gap);
    }
    let ln_gap: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let ln_n: Vec<f64> = n_range.iter().map(|&n| (n as f64).ln()).collect();
    let lin_n: Vec<f64> = n_range.iter().map(|&n| n as f64).collect();
    let (slope, intercept, r2_loglog) = linear_fit(&ln_n, &ln_gap);
    let (slope_loglinear, _, r2_loglinear) = linear_fit(&lin_n, &ln_gap);
    Ok(ScalingFit { ns: n_range.to_vec(), gaps, slope, intercept, r2_loglog, slope_loglinear, r2_loglinear })
}

/// Largest elementwise difference between the two dense mixer constructions.
pub fn verify_exchange_lemma(n: usize, k: usize) -> Result<f64> {
    if n > 8 {
        return Err(Error::TooLarge { n, limit: 8, what: "the exchange check" });
    }
    let (a, b) = build_dense_hbk(n, k)?;
    Ok((a - b).amax())
}

type C2 = nalgebra::Matrix2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single-qubit factor of the 1-local search operator:
/// `H e^{iπZ/2n} H e^{iπZ/2n}`.
pub fn one_local_factor(n: usize) -> C2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = C2::new(c(s), c(s), c(s), c(-s));
    let a = PI / (2.0 * n as f64);
    let ez = C2::new(Complex64::from_polar(1.0, a), c(0.0), c(0.0), Complex64::from_polar(1.0, -a));
    h * ez * h * ez
}

/// Rotation by π/8 used in the approximate eigendecomposition.
pub fn rotation_v0() -> nalgebra::Matrix2<f64> {
    let (sn, cs) = (PI / 8.0).sin_cos();
    nalgebra::Matrix2::new(cs, sn, -sn, cs)
}

/// `V₀ᵀ E₀ V₀` with `E₀ = diag(e^{iπ/(√2 n)}, e^{-iπ/(√2 n)})`.
pub fn one_local_approximation(n: usize) -> C2 {
    let v = rotation_v0().map(c);
    let ph = PI / (std::f64::consts::SQRT_2 * n as f64);
    let e = C2::new(Complex64::from_polar(1.0, ph), c(0.0), c(0.0), Complex64::from_polar(1.0, -ph));
    v.transpose() * e * v
}

/// Residuals of the approximate eigendecomposition of the 1-local operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionResidual {
    pub n: usize,
    /// Elementwise max of `|U_C - (V₀ᵀE₀V₀)^{⊗n}|`.
    pub residual: f64,
    /// The same for one qubit.
    pub single_qubit: f64,
}

/// Elementwise `|A^{⊗n} - B^{⊗n}|_max` without materializing either matrix
/// beyond `2^{⌈n/2⌉} x 2^{⌈n/2⌉}` blocks.
fn tensor_power_residual(a: &C2, b: &C2, n: usize) -> f64 {
    let dense_power = |m: &C2, p: usize| -> DMatrix<Complex64> {
        let base = DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
        let mut out = DMatrix::from_element(1, 1, c(1.0));
        for _ in 0..p {
            out = base.kronecker(&out);
        }
        out
    };
    let lo = n / 2;
    let hi = n - lo;
    let (a_lo, a_hi, b_lo, b_hi) = (dense_power(a, lo), dense_power(a, hi), dense_power(b, lo), dense_power(b, hi));
    let mut worst = 0f64;
    for (ah, bh) in a_hi.iter().zip(b_hi.iter()) {
        for (al, bl) in a_lo.iter().zip(b_lo.iter()) {
            worst = worst.max((ah * al - bh * bl).norm());
        }
    }
    worst
}

pub fn verify_1local_decomposition(ns: &[usize]) -> Result<Vec<DecompositionResidual>> {
    ns.iter()
        .map(|&n| {
            if n == 0 || n > 12 {
                return Err(Error::TooLarge { n, limit: 12, what: "the 1-local decomposition check" });
            }
            let u = one_local_factor(n);
            let approx = one_local_approximation(n);
            Ok(DecompositionResidual {
                n,
                residual: tensor_power_residual(&u, &approx, n),
                single_qubit: (u - approx).iter().map(|z| z.norm()).fold(0.0, f64::max),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hc_normalized;
    use crate::instances::generate_ff;
    use crate::simulator::{qs_iterate, Statevector};

    fn dense_top_two(op: &OperatorHandle) -> (f64, f64) {
        let (vals, _) = sorted_eigen(op.to_dense().unwrap());
        (vals[0], vals[1])
    }

    #[test]
    fn diagonal_only_operator() {
        let inst = generate_ff(8, 40, 3, 3, None).unwrap();
        let h = build_hc_normalized(&inst).unwrap();
        let op = OperatorHandle::new(h.clone(), build_hk0(8, 3).unwrap(), 1.0, 0.0).unwrap();
        let r = top_two_eigen(&op, 1e-10).unwrap();
        let mut v = h.values().to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        assert!((r.lambda1 - v[0]).abs() < 1e-9);
        assert!((r.lambda2 - v[1]).abs() < 1e-9);
    }

    #[test]
    fn matches_dense_eigensolve() {
        for (n, k) in [(6, 3), (7, 2), (8, 1), (8, 3)] {
            let cost = build_hk0(n, k).unwrap();
            let op = OperatorHandle::sum(&cost, k).unwrap();
            let r = top_two_eigen(&op, 1e-10).unwrap();
            let (l1, l2) = dense_top_two(&op);
            assert!((r.lambda1 - l1).abs() < 1e-9 && (r.lambda2 - l2).abs() < 1e-9, "n = {n}, k = {k}");
            assert!(r.residual <= 1e-9);
        }
        let inst = generate_ff(8, 64, 3, 5, None).unwrap();
        let h = build_hc_normalized(&inst).unwrap();
        for s in [0.2, 0.5, 0.8] {
            let op = OperatorHandle::interpolated(&h, 3, s).unwrap();
            let r = top_two_eigen(&op, 1e-10).unwrap();
            let (l1, l2) = dense_top_two(&op);
            assert!((r.lambda1 - l1).abs() < 1e-9 && (r.lambda2 - l2).abs() < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn operator_is_hermitian() {
        let inst = generate_ff(9, 50, 3, 1, None).unwrap();
        let h = build_hc_normalized(&inst).unwrap();
        let op = OperatorHandle::interpolated(&h, 3, 0.3).unwrap();
        let mut rng = rng::stream(2, 0);
        for _ in 0..5 {
            let u: Vec<f64> = (0..512).map(|_| rng.random::<f64>() - 0.5).collect();
            let v: Vec<f64> = (0..512).map(|_| rng.random::<f64>() - 0.5).collect();
            let (mut au, mut av) = (vec![0.0; 512], vec![0.0; 512]);
            op.apply(&u, &mut au);
            op.apply(&v, &mut av);
            assert!((dot(&u, &av) - dot(&v, &au)).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugated_mixer_shares_the_diagonal_spectrum() {
        let (n, k) = (9, 3);
        let mix = build_hk0(n, k).unwrap();
        let scan = gap_scan(n, k, &mix, &[0.0]).unwrap();
        let mut v = mix.values().to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        assert!((scan.points[0].lambda1 - v[0]).abs() < 1e-10);
        assert!((scan.points[0].lambda2 - v[1]).abs() < 1e-10);
    }

    #[test]
    fn endpoint_gaps_are_k_over_n() {
        let (n, k) = (10, 3);
        let cost = build_hk0(n, k).unwrap();
        let scan = gap_scan(n, k, &cost, &[0.0, 1.0]).unwrap();
        for p in &scan.points {
            assert!((p.gap - k as f64 / n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn grover_midpoint_gap_halves_every_two_qubits() {
        let gaps: Vec<f64> = [6usize, 8, 10]
            .iter()
            .map(|&n| {
                let cost = build_hk0(n, n).unwrap();
                top_two_eigen(&OperatorHandle::interpolated(&cost, n, 0.5).unwrap(), 1e-12).unwrap().gap
            })
            .collect();
        for w in gaps.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.02, "{gaps:?}");
        }
        let fit = gap_scaling_fit(Locality::Full, &[4, 6, 8, 10, 12], GapMode::Sum).unwrap();
        assert!(fit.r2_loglinear > 0.999);
        assert!(fit.r2_loglinear > fit.r2_loglog);
    }

    #[test]
    fn degenerate_top_is_flagged() {
        // Two basis states share the top value.
        let mut v = vec![0.0; 128];
        v[3] = 1.0;
        v[77] = 1.0;
        let h = DiagonalHamiltonian::new(7, v).unwrap();
        let op = OperatorHandle::new(h, build_hk0(7, 2).unwrap(), 1.0, 0.0).unwrap();
        let r = top_two_eigen(&op, 1e-10).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn one_local_gap_matches_decomposition_phase() {
        // The 1-local sum has eigenvalues 1/2 + (1/2n)(ΣX) + d/n restricted to
        // single qubits: per qubit (1/n)(|+⟩⟨+| + |0⟩⟨0|), gap √2/n.
        for n in [8usize, 10, 12] {
            let cost = build_hk0(n, 1).unwrap();
            let r = top_two_eigen(&OperatorHandle::sum(&cost, 1).unwrap(), 1e-10).unwrap();
            assert!((r.gap - std::f64::consts::SQRT_2 / n as f64).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn exchange_lemma_residuals() {
        for n in 1..=8 {
            for k in 1..=n.min(3) {
                assert!(verify_exchange_lemma(n, k).unwrap() < 1e-12);
            }
        }
        assert!(verify_exchange_lemma(3, 3).unwrap() < 1e-14);
        assert!(verify_exchange_lemma(9, 2).is_err());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let v = rotation_v0();
        assert!((v.transpose() * v - nalgebra::Matrix2::identity()).amax() < 1e-15);
    }

    #[test]
    fn decomposition_residual_shrinks() {
        let r = verify_1local_decomposition(&[4, 6, 8, 10]).unwrap();
        for w in r.windows(2) {
            assert!(w[1].residual < w[0].residual);
        }
        assert!(r[2].residual / r[0].residual <= 0.5);
        // Tensor residual equals a dense Kronecker product at small n.
        let u = one_local_factor(4);
        let a = one_local_approximation(4);
        let kron = |m: &C2| {
            let b = DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
            (1..4).fold(b.clone(), |acc, _| b.kronecker(&acc))
        };
        let dense = (kron(&u) - kron(&a)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((dense - r[0].residual).abs() < 1e-15);
    }

    #[test]
    fn one_local_operator_equals_simulator_composite() {
        // H_{1,0} = 1/2 + ΣZ/(2n), so the per-qubit product equals minus one
        // search iteration at θ = -π on the 1-local objective.
        let n = 4;
        let u = one_local_factor(n);
        let b = DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
        let dense = (1..n).fold(b.clone(), |acc, _| b.kronecker(&acc));
        let h10 = build_hk0(n, 1).unwrap();
        for x in 0..(1u64 << n) {
            let mut psi = Statevector::basis(n, x).unwrap();
            qs_iterate(&mut psi, &h10, &h10, -PI).unwrap();
            for (y, a) in psi.amplitudes().iter().enumerate() {
                assert!((-a - dense[(y, x as usize)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sum_gap_scales_inverse_linearly() {
        let fit = gap_scaling_fit(Locality::Fixed(3), &[8, 10, 12, 14], GapMode::Sum).unwrap();
        assert!((-1.3..=-0.7).contains(&fit.slope), "{fit:?}");
    }

    #[test]
    fn midpoint_minimum_is_central() {
        let n = 10;
        let cost = build_hk0(n, 3).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let scan = gap_scan(n, 3, &cost, &grid).unwrap();
        assert!((scan.argmin_s - 0.5).abs() <= 0.1, "{}", scan.argmin_s);
    }

    #[test]
    fn clause_perturbation_shrinks_with_more_clauses() {
        let (n, k) = (10, 3);
        let mut medians = Vec::new();
        for m in [n, n * n, n * n * n] {
            let mut diffs: Vec<f64> = (0..9)
                .map(|seed| {
                    let inst = generate_ff(n, m, k, seed, None).unwrap();
                    let t = *inst.planted().unwrap();
                    let hb = build_hc_normalized(&inst).unwrap();
                    let hk = build_hk(n, k, &t).unwrap();
                    let g = |h: &DiagonalHamiltonian| {
                        top_two_eigen(&OperatorHandle::interpolated(h, k, 0.5).unwrap(), 1e-10).unwrap().gap
                    };
                    (g(&hb) - g(&hk)).abs()
                })
                .collect();
            diffs.sort_by(f64::total_cmp);
            medians.push(diffs[4]);
        }
        assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    }

    #[test]
    fn fit_rejects_short_ranges() {
        assert!(gap_scaling_fit(Locality::Fixed(3), &[8, 10, 12], GapMode::Sum).is_err());
    }
}
