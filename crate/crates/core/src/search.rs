//! Classical ascent on the k-local objective, the Grover fallback and the
//! doubling adiabatic solver for satisfiable instances.

use std::f64::consts::PI;

use rand::RngExt;
use serde::Serialize;

use crate::combinatorics::{c, full_mask, match_count_bits, Assignment, MAX_VARS};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{build_hc_normalized, DiagonalHamiltonian};
use crate::instances::{count_satisfied, surviving_assignments, Instance};
use crate::rng::{self, derive_seed};
use crate::simulator::{sample_shots, sqrt_n_states, AdiabaticParams, ScheduleConvention, SearchEngine};

/// Largest n for the simulated solvers.
pub const MAX_SOLVER_VARS: usize = 24;

/// A black-box k-local objective for a hidden target, returning `f_k(x)` as the
/// exact numerator `C(d, k)` over the fixed denominator `C(n, k)`.
#[derive(Clone, Copy, Debug)]
pub struct HiddenTarget {
    n: usize,
    k: usize,
    t: u64,
}

impl HiddenTarget {
    pub fn new(k: usize, t: Assignment) -> Result<Self> {
        let n = t.n();
        if k == 0 || k > n {
            return Err(invalid(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
        }
        Ok(Self { n, k, t: t.bits() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `f_k(x) · C(n, k)`.
    pub fn query(&self, x: u64) -> u64 {
        c(match_count_bits(self.n, x, self.t), self.k)
    }

    pub fn value(&self, x: u64) -> f64 {
        self.query(x) as f64 / c(self.n, self.k) as f64
    }
}

/// Result of the classical ascent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalOutcome {
    #[serde(serialize_with = "ser_assignment")]
    pub assignment: Assignment,
    /// Random draws made while the objective was zero.
    pub restarts: usize,
    /// Total objective evaluations.
    pub queries: usize,
}

fn ser_assignment<S: serde::Serializer>(a: &Assignment, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(a)
}

/// Starts from 0, redraws uniformly while the objective is zero, then makes a
/// single pass of one-bit improvements. `f` must be monotone in the match
/// count once nonzero, as `f_k` is.
pub fn classical_local_search<F, V>(mut f: F, n: usize, seed: u64) -> Result<ClassicalOutcome>
where
    F: FnMut(u64) -> V,
    V: PartialOrd + Default,
{
    if n == 0 || n > MAX_VARS {
        return Err(invalid(format!("n = {n} outside 1..={MAX_VARS}")));
    }
    let mut rng = rng::stream(seed, 0);
    let mask = full_mask(n);
    let zero = V::default();
    let mut x = 0u64;
    let mut fx = f(x);
    let mut queries = 1;
    let mut restarts = 0;
    while fx <= zero {
        x = rng.random::<u64>() & mask;
        fx = f(x);
        queries += 1;
        restarts += 1;
    }
    for j in 0..n {
        let flipped = x ^ (1 << j);
        let fy = f(flipped);
        queries += 1;
        if fx < fy {
            x = flipped;
            fx = fy;
        }
    }
    Ok(ClassicalOutcome { assignment: Assignment::new(n, x)?, restarts, queries })
}

/// Which routine produced a solver answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Classical,
    Aqs,
    Grover,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Classical => "classical",
            Self::Aqs => "aqs",
            Self::Grover => "grover",
        })
    }
}

/// A verified solver answer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOutcome {
    #[serde(serialize_with = "ser_assignment")]
    pub assignment: Assignment,
    /// Re-checked against every clause.
    pub satisfied: bool,
    pub method: SolveMethod,
    /// Adiabatic steps plus Grover iterations simulated.
    pub steps_used: usize,
    /// Adiabatic evolutions attempted.
    pub aqs_rounds: usize,
}

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    /// Measurements per adiabatic evolution before the round counts as failed.
    pub shots: usize,
    /// Measurement attempts for the Grover fallback.
    pub grover_retries: usize,
    /// When false, skip straight to the Grover fallback.
    pub aqs_enabled: bool,
    pub convention: ScheduleConvention,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { shots: 8, grover_retries: 16, aqs_enabled: true, convention: ScheduleConvention::default() }
    }
}

fn check_solver_n(inst: &Instance) -> Result<()> {
    if inst.n() > MAX_SOLVER_VARS {
        return Err(Error::TooLarge { n: inst.n(), limit: MAX_SOLVER_VARS, what: "the simulated solver" });
    }
    Ok(())
}

fn verified(inst: &Instance, x: &Assignment) -> Result<bool> {
    Ok(count_satisfied(inst, x)? == inst.m())
}

/// Full-width search on the interpretation indicator with
/// `⌊(π/4) √(2^n / M)⌋` iterations, `M` the exact number of interpretations.
pub fn grover_solve(inst: &Instance, seed: u64) -> Result<SolveOutcome> {
    grover_solve_with(inst, seed, SolverOptions::default().grover_retries)
}

fn grover_solve_with(inst: &Instance, seed: u64, retries: usize) -> Result<SolveOutcome> {
    check_solver_n(inst)?;
    let n = inst.n();
    let survivors = surviving_assignments(inst)?;
    if survivors.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    let mut oracle = vec![0.0; 1 << n];
    for x in survivors.iter() {
        oracle[x as usize] = 1.0;
    }
    let oracle = DiagonalHamiltonian::new(n, oracle)?;
    let ratio = (1u64 << n) as f64 / survivors.len() as f64;
    let p = ((PI / 4.0) * ratio.sqrt()).floor() as usize;
    let psi = SearchEngine::new(&oracle, n)?.qs_state(PI, p)?;
    for attempt in 0..retries.max(1) {
        let x = sample_shots(&psi, 1, derive_seed(seed, &[attempt as u64]))?[0];
        if verified(inst, &x)? {
            return Ok(SolveOutcome {
                assignment: x,
                satisfied: true,
                method: SolveMethod::Grover,
                steps_used: p * (attempt + 1),
                aqs_rounds: 0,
            });
        }
    }
    Err(Error::BudgetExhausted(format!("no interpretation measured in {retries} Grover attempts")))
}

/// Adiabatic evolution on the normalized clause Hamiltonian with `T = n²`
/// steps, doubling `T` while unverified and `T ≤ ⌊√(2^n)⌋`, then the Grover
/// fallback.
pub fn solve_max_kssat(inst: &Instance, seed: u64) -> Result<SolveOutcome> {
    solve_max_kssat_with(inst, seed, SolverOptions::default())
}

pub fn solve_max_kssat_with(inst: &Instance, seed: u64, opts: SolverOptions) -> Result<SolveOutcome> {
    check_solver_n(inst)?;
    let n = inst.n();
    let mut steps_used = 0;
    let mut rounds = 0;
    if opts.aqs_enabled {
        let cost =
            if inst.m() == 0 { DiagonalHamiltonian::new(n, vec![1.0; 1 << n])? } else { build_hc_normalized(inst)? };
        let engine = SearchEngine::new(&cost, inst.k())?;
        let cap = sqrt_n_states(n);
        let mut t = n * n;
        loop {
            let psi = engine.aqs_state(AdiabaticParams::with_convention(t, opts.convention)?)?;
            steps_used += t;
            rounds += 1;
            let shots = sample_shots(&psi, opts.shots.max(1), derive_seed(seed, &[rounds as u64]))?;
            for x in shots {
                if verified(inst, &x)? {
                    return Ok(SolveOutcome {
                        assignment: x,
                        satisfied: true,
                        method: SolveMethod::Aqs,
                        steps_used,
                        aqs_rounds: rounds,
                    });
                }
            }
            if t > cap {
                break;
            }
            t *= 2;
        }
    }
    let mut out = grover_solve_with(inst, derive_seed(seed, &[u64::MAX]), opts.grover_retries)?;
    out.steps_used += steps_used;
    out.aqs_rounds = rounds;
    Ok(out)
}
