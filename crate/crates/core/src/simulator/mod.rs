//! Statevector evolution for k-local quantum search and its Trotterized
//! adiabatic variant.
//!
//! One search iteration is `H^{⊗n} e^{-iθ H_{k,0}} H^{⊗n} · e^{-iθ H_cost}`; the
//! mixer exponential is applied exactly by conjugating a diagonal phase with
//! the Walsh–Hadamard transform.

mod fwht;
mod statevector;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::RngExt;

pub use fwht::{fwht_in_place, FwhtScalar};
pub use statevector::{Statevector, MAX_QUBITS, NORM_TOLERANCE};

use crate::combinatorics::Assignment;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{build_hk0, DiagonalHamiltonian};
use crate::rng;

/// Unitary Walsh–Hadamard transform of a statevector.
pub fn fwht(psi: &mut Statevector) {
    fwht_in_place(psi.amplitudes_mut());
}

/// A diagonal stored as distinct levels plus a per-state level index, so a
/// phase layer costs one complex exponential per level.
#[derive(Clone, Debug)]
pub struct PhaseDiagonal {
    n: usize,
    levels: Vec<f64>,
    index: Vec<u32>,
}

impl PhaseDiagonal {
    pub fn new(h: &DiagonalHamiltonian) -> Self {
        let (levels, index) = h.levels();
        Self { n: h.n(), levels, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// `amp[x] *= exp(-i θ h[x])`.
    pub fn apply(&self, psi: &mut Statevector, theta: f64) {
        debug_assert_eq!(psi.n(), self.n);
        let table: Vec<Complex64> = self.levels.iter().map(|&v| Complex64::from_polar(1.0, -theta * v)).collect();
        for (a, &i) in psi.amplitudes_mut().iter_mut().zip(&self.index) {
            *a *= table[i as usize];
        }
    }
}

/// `ψ ← e^{-iθH} ψ`.
pub fn apply_diag_phase(psi: &mut Statevector, h: &DiagonalHamiltonian, theta: f64) -> Result<()> {
    if psi.n() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), got: psi.n() });
    }
    if !theta.is_finite() {
        return Err(invalid("phase angle must be finite"));
    }
    for (a, &v) in psi.amplitudes_mut().iter_mut().zip(h.values()) {
        *a *= Complex64::from_polar(1.0, -theta * v);
    }
    Ok(())
}

/// One exact search iteration: cost phase, then the Hadamard-conjugated mixer.
pub fn qs_iterate(
    psi: &mut Statevector,
    h_cost: &DiagonalHamiltonian,
    h_mix0: &DiagonalHamiltonian,
    theta: f64,
) -> Result<()> {
    if h_mix0.n() != h_cost.n() {
        return Err(Error::DimensionMismatch { expected: h_cost.n(), got: h_mix0.n() });
    }
    apply_diag_phase(psi, h_cost, theta)?;
    fwht(psi);
    apply_diag_phase(psi, h_mix0, theta)?;
    fwht(psi);
    psi.check_norm()
}

/// Phase angle and iteration count of the search circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub theta: f64,
    pub p: usize,
}

impl SearchParams {
    pub fn new(theta: f64, p: usize) -> Result<Self> {
        validate_theta(theta)?;
        Ok(Self { theta, p })
    }
}

fn validate_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(invalid(format!("theta = {theta} outside (0, π]")));
    }
    Ok(())
}

/// How the ramped angles of the adiabatic schedule are read.
///
/// Step `l = 1..=p` applies the cost phase and then the mixer phase, with
///
/// - `Tabulated`: cost angle `2π l/(p+1)`, mixer angle `2π (p+1-l)/(p+1)`;
/// - `Transcribed`: cost angle `π l/(p+1)`, mixer angle `π (p-l)/(p+1)`.
///
/// `Tabulated` reproduces the published minimum step counts exactly; the
/// `Transcribed` reading of the product formula needs markedly more steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleConvention {
    #[default]
    Tabulated,
    Transcribed,
}

impl ScheduleConvention {
    /// `(cost angle, mixer angle)` for step `l` of `p`.
    pub fn angles(self, l: usize, p: usize) -> (f64, f64) {
        let denom = (p + 1) as f64;
        match self {
            Self::Tabulated => (2.0 * PI * l as f64 / denom, 2.0 * PI * (p + 1 - l) as f64 / denom),
            Self::Transcribed => (PI * l as f64 / denom, PI * (p - l) as f64 / denom),
        }
    }
}

impl std::str::FromStr for ScheduleConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabulated" => Ok(Self::Tabulated),
            "transcribed" => Ok(Self::Transcribed),
            other => Err(invalid(format!("unknown schedule convention {other:?}"))),
        }
    }
}

/// Step count of the adiabatic schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdiabaticParams {
    pub p: usize,
    pub convention: ScheduleConvention,
}

impl AdiabaticParams {
    pub fn new(p: usize) -> Result<Self> {
        Self::with_convention(p, ScheduleConvention::default())
    }

    pub fn with_convention(p: usize, convention: ScheduleConvention) -> Result<Self> {
        if p == 0 {
            return Err(invalid("adiabatic step count must be at least 1"));
        }
        Ok(Self { p, convention })
    }
}

/// First local maximum of a search trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMax {
    pub p: usize,
    pub prob: f64,
    /// The maximum was reached from a flat step (`p_t[p] == p_t[p-1]` up to rounding).
    pub plateau: bool,
}

/// Outcome of the minimal-step search for the adiabatic schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSteps {
    pub p: usize,
    pub prob: f64,
    /// Number of distinct schedules simulated.
    pub evaluations: usize,
}

/// Knobs of the minimal-step search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ThresholdSearch {
    /// Largest step count tried; `None` uses [`default_aqs_cap`].
    pub cap: Option<usize>,
    /// After bisection, step counts in `[hi - window, hi)` are rescanned so that
    /// an earlier crossing of the oscillating success curve is not missed.
    /// `None` uses n.
    pub window: Option<usize>,
    pub convention: ScheduleConvention,
}

/// Default QS iteration cap for the local-maximum search.
pub fn default_qs_cap(n: usize) -> usize {
    16 * n
}

/// Default step cap for the adiabatic threshold search: `max(⌊2^{n/2}⌋, 4n²)`.
/// The square-root bound alone sits below the required step counts for n ≤ 14.
pub fn default_aqs_cap(n: usize) -> usize {
    sqrt_n_states(n).max(4 * n * n)
}

/// `⌊√(2^n)⌋`.
pub fn sqrt_n_states(n: usize) -> usize {
    let half = 1usize << (n / 2);
    if n.is_multiple_of(2) {
        half
    } else {
        (half as f64 * std::f64::consts::SQRT_2).floor() as usize
    }
}

/// Reusable evolution context: a cost diagonal and the k-local mixer, both
/// pre-levelled.
#[derive(Clone, Debug)]
pub struct SearchEngine {
    n: usize,
    k: usize,
    cost: PhaseDiagonal,
    mixer: PhaseDiagonal,
}

const NORM_CHECK_INTERVAL: usize = 64;

impl SearchEngine {
    pub fn new(h_cost: &DiagonalHamiltonian, k: usize) -> Result<Self> {
        let n = h_cost.n();
        if n > MAX_QUBITS {
            return Err(Error::TooLarge { n, limit: MAX_QUBITS, what: "a statevector" });
        }
        let mixer = PhaseDiagonal::new(&build_hk0(n, k)?);
        Ok(Self { n, k, cost: PhaseDiagonal::new(h_cost), mixer })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn check_targets(&self, targets: &[u64]) -> Result<()> {
        if targets.is_empty() {
            return Err(invalid("empty target set"));
        }
        if let Some(&x) = targets.iter().find(|&&x| x >> self.n != 0) {
            return Err(invalid(format!("target {x} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    #[inline]
    fn step(&self, psi: &mut Statevector, cost_angle: f64, mix_angle: f64) {
        self.cost.apply(psi, cost_angle);
        fwht(psi);
        self.mixer.apply(psi, mix_angle);
        fwht(psi);
    }

    /// Success probability on `targets` after each of `0..=p` iterations.
    pub fn qs_trajectory(&self, theta: f64, p: usize, targets: &[u64]) -> Result<Vec<f64>> {
        validate_theta(theta)?;
        self.check_targets(targets)?;
        let mut psi = Statevector::uniform(self.n)?;
        let mut out = Vec::with_capacity(p + 1);
        out.push(psi.probability_on(targets.iter().copied()));
        for i in 1..=p {
            self.step(&mut psi, theta, theta);
            if i % NORM_CHECK_INTERVAL == 0 {
                psi.check_norm()?;
            }
            out.push(psi.probability_on(targets.iter().copied()));
        }
        psi.check_norm()?;
        Ok(out)
    }

    /// State after `p` search iterations from the uniform superposition.
    pub fn qs_state(&self, theta: f64, p: usize) -> Result<Statevector> {
        validate_theta(theta)?;
        let mut psi = Statevector::uniform(self.n)?;
        for i in 1..=p {
            self.step(&mut psi, theta, theta);
            if i % NORM_CHECK_INTERVAL == 0 {
                psi.check_norm()?;
            }
        }
        psi.check_norm()?;
        Ok(psi)
    }

    /// State after the full adiabatic schedule.
    pub fn aqs_state(&self, params: AdiabaticParams) -> Result<Statevector> {
        if params.p == 0 {
            return Err(invalid("adiabatic step count must be at least 1"));
        }
        let mut psi = Statevector::uniform(self.n)?;
        for l in 1..=params.p {
            let (a, b) = params.convention.angles(l, params.p);
            self.step(&mut psi, a, b);
            if l % NORM_CHECK_INTERVAL == 0 {
                psi.check_norm()?;
            }
        }
        psi.check_norm()?;
        Ok(psi)
    }

    pub fn aqs_probability(&self, params: AdiabaticParams, targets: &[u64]) -> Result<f64> {
        self.check_targets(targets)?;
        Ok(self.aqs_state(params)?.probability_on(targets.iter().copied()))
    }

    /// Smallest `p ≥ 1` with `p_t[p] ≥ p_t[p-1]` and `p_t[p] > p_t[p+1]`,
    /// searching up to `cap` iterations.
    pub fn first_local_max(&self, theta: f64, targets: &[u64], cap: usize) -> Result<LocalMax> {
        validate_theta(theta)?;
        self.check_targets(targets)?;
        let mut psi = Statevector::uniform(self.n)?;
        let prob = |psi: &Statevector| psi.probability_on(targets.iter().copied());
        let mut prev = prob(&psi);
        self.step(&mut psi, theta, theta);
        let mut cur = prob(&psi);
        for p in 1..=cap {
            self.step(&mut psi, theta, theta);
            let next = prob(&psi);
            if p % NORM_CHECK_INTERVAL == 0 {
                psi.check_norm()?;
            }
            if cur >= prev && cur > next {
                psi.check_norm()?;
                let plateau = (cur - prev).abs() <= 1e-12 * cur.max(1e-300);
                return Ok(LocalMax { p, prob: cur, plateau });
            }
            prev = cur;
            cur = next;
        }
        Err(Error::NoConvergence(format!("no local maximum within {cap} iterations")))
    }

    /// Minimal adiabatic step count reaching `threshold` on `targets`: doubling,
    /// bisection, then a rescan of the window just below the bisection result.
    pub fn min_threshold_steps(
        &self,
        threshold: f64,
        targets: &[u64],
        opts: ThresholdSearch,
    ) -> Result<ThresholdSteps> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid(format!("threshold {threshold} outside (0, 1)")));
        }
        self.check_targets(targets)?;
        let cap = opts.cap.unwrap_or_else(|| default_aqs_cap(self.n)).max(1);
        let window = opts.window.unwrap_or(self.n);
        let mut memo: HashMap<usize, f64> = HashMap::new();
        let mut eval = |p: usize| -> Result<f64> {
            if let Some(&v) = memo.get(&p) {
                return Ok(v);
            }
            let v = self.aqs_probability(AdiabaticParams::with_convention(p, opts.convention)?, targets)?;
            memo.insert(p, v);
            Ok(v)
        };

        let mut lo = 0usize; // largest probed failure (0 = none)
        let mut hi = 1usize;
        loop {
            if eval(hi)? >= threshold {
                break;
            }
            if hi >= cap {
                return Err(Error::BudgetExhausted(format!(
                    "success probability {threshold} not reached within {cap} steps"
                )));
            }
            lo = hi;
            hi = (hi * 2).min(cap);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if eval(mid)? >= threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for q in hi.saturating_sub(window).max(1)..hi {
            if eval(q)? >= threshold {
                hi = q;
                break;
            }
        }
        let prob = eval(hi)?;
        Ok(ThresholdSteps { p: hi, prob, evaluations: memo.len() })
    }
}

fn target_bits(n: usize, t: &Assignment) -> Result<[u64; 1]> {
    if t.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.n() });
    }
    Ok([t.bits()])
}

/// Success probability `|⟨t|ψ⟩|²` after each of `0..=p` iterations.
pub fn run_qs(
    n: usize,
    k: usize,
    h_cost: &DiagonalHamiltonian,
    params: SearchParams,
    t: &Assignment,
) -> Result<Vec<f64>> {
    check_cost_n(n, h_cost)?;
    SearchEngine::new(h_cost, k)?.qs_trajectory(params.theta, params.p, &target_bits(n, t)?)
}

/// Final success probability of the adiabatic schedule.
pub fn run_aqs(
    n: usize,
    k: usize,
    h_cost: &DiagonalHamiltonian,
    params: AdiabaticParams,
    t: &Assignment,
) -> Result<f64> {
    check_cost_n(n, h_cost)?;
    SearchEngine::new(h_cost, k)?.aqs_probability(params, &target_bits(n, t)?)
}

/// First local maximum of the search trajectory (cap: [`default_qs_cap`]).
pub fn find_first_local_max(
    n: usize,
    k: usize,
    h_cost: &DiagonalHamiltonian,
    theta: f64,
    t: &Assignment,
) -> Result<LocalMax> {
    check_cost_n(n, h_cost)?;
    SearchEngine::new(h_cost, k)?.first_local_max(theta, &target_bits(n, t)?, default_qs_cap(n))
}

/// Minimal adiabatic step count whose success probability reaches `threshold`.
pub fn find_min_threshold_steps(
    n: usize,
    k: usize,
    h_cost: &DiagonalHamiltonian,
    threshold: f64,
    t: &Assignment,
    opts: ThresholdSearch,
) -> Result<ThresholdSteps> {
    check_cost_n(n, h_cost)?;
    SearchEngine::new(h_cost, k)?.min_threshold_steps(threshold, &target_bits(n, t)?, opts)
}

fn check_cost_n(n: usize, h: &DiagonalHamiltonian) -> Result<()> {
    if h.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.n() });
    }
    Ok(())
}

/// Draws one basis state with probability `|amp[x]|²`.
pub fn sample_measurement(psi: &Statevector, seed: u64) -> Result<Assignment> {
    Ok(sample_shots(psi, 1, seed)?.remove(0))
}

/// Draws `shots` independent measurement outcomes from one seeded stream.
pub fn sample_shots(psi: &Statevector, shots: usize, seed: u64) -> Result<Vec<Assignment>> {
    psi.check_norm()?;
    let mut cumulative = Vec::with_capacity(psi.amplitudes().len());
    let mut acc = 0.0;
    for a in psi.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = rng::stream(seed, 0);
    (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let x = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            Assignment::new(psi.n(), x as u64)
        })
        .collect()
}

#[cfg(test)]
mod tests;
