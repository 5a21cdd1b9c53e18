//! C ABI over `ksearch`.
//!
//! Conventions:
//! - Every fallible function returns a [`KsStatus`]; results go through out
//!   pointers that are written only on success.
//! - Instances live behind the opaque [`KsInstance`] handle, created by the
//!   generators or the DIMACS readers and released with [`ks_instance_free`].
//! - Assignments are `uint64_t` bit masks: variable j (1-based) is bit j - 1.
//! - After a failure, [`ks_last_error`] describes it on the calling thread.
//! - Panics never cross the boundary; they surface as `KS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ksearch::combinatorics::Assignment;
use ksearch::hamiltonian::{build_hc_normalized, build_hk};
use ksearch::instances::{
    count_satisfied, dimacs_read, dimacs_write, generate_f, generate_ff, generate_fs, parse_dimacs,
    surviving_assignments, to_dimacs, Instance,
};
use ksearch::search::{classical_local_search, solve_max_kssat_with, HiddenTarget, SolveMethod, SolverOptions};
use ksearch::simulator::{default_qs_cap, AdiabaticParams, ScheduleConvention, SearchEngine, ThresholdSearch};
use ksearch::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    /// A parameter is out of range or inconsistent.
    InvalidArgument = 1,
    /// A required pointer was null.
    NullPointer = 2,
    /// The problem size exceeds a documented limit.
    TooLarge = 3,
    /// Malformed DIMACS text, or a string that is not UTF-8.
    Parse = 4,
    /// The instance has no satisfying assignment.
    Unsatisfiable = 5,
    /// An iterative search did not converge within its cap.
    NoConvergence = 6,
    /// A bounded search used up its budget.
    BudgetExhausted = 7,
    /// File-system failure.
    Io = 8,
    /// Numerical failure (norm drift or integer overflow).
    Numeric = 9,
    /// Internal panic; the library state is still usable.
    Panic = 10,
}

/// Angle convention of the adiabatic schedule.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsConvention {
    /// Matches the published minimal step counts.
    Tabulated = 0,
    Transcribed = 1,
}

impl From<KsConvention> for ScheduleConvention {
    fn from(c: KsConvention) -> Self {
        match c {
            KsConvention::Tabulated => ScheduleConvention::Tabulated,
            KsConvention::Transcribed => ScheduleConvention::Transcribed,
        }
    }
}

/// Which routine produced a solver answer.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsMethod {
    Classical = 0,
    Aqs = 1,
    Grover = 2,
}

/// Result of [`ks_solve`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KsSolveResult {
    pub assignment: u64,
    /// Re-verified against every clause.
    pub satisfied: bool,
    pub method: KsMethod,
    pub steps_used: u64,
    pub aqs_rounds: u32,
}

/// Result of [`ks_classical`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KsClassicalResult {
    pub assignment: u64,
    pub queries: u64,
    pub restarts: u64,
}

/// Opaque k-SAT instance.
pub struct KsInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KsStatus {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::Config(_) => KsStatus::InvalidArgument,
        Error::TooLarge { .. } => KsStatus::TooLarge,
        Error::Dimacs { .. } | Error::Csv(_) | Error::Json(_) => KsStatus::Parse,
        Error::Unsatisfiable => KsStatus::Unsatisfiable,
        Error::NoConvergence(_) => KsStatus::NoConvergence,
        Error::BudgetExhausted(_) => KsStatus::BudgetExhausted,
        Error::Io(_) => KsStatus::Io,
        Error::NormDrift(_) | Error::Overflow(..) => KsStatus::Numeric,
    }
}

/// Failure raised inside a wrapper before reaching the library.
struct Fail(KsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            KsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(KsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or a live handle.
unsafe fn inst<'a>(p: *const KsInstance, what: &str) -> Result<&'a Instance, Fail> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or a nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(KsStatus::Parse, format!("{what} is not UTF-8")))
}

fn usize_of(v: u32) -> usize {
    v as usize
}

fn boxed(i: Instance) -> *mut KsInstance {
    Box::into_raw(Box::new(KsInstance(i)))
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Uniform random instance: m clauses of k distinct variables with uniform
/// signs.
///
/// # Safety
/// `out_instance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_generate_f(
    n: u32,
    m: u32,
    k: u32,
    seed: u64,
    out_instance: *mut *mut KsInstance,
) -> KsStatus {
    guard(|| {
        let o = out(out_instance, "out_instance")?;
        *o = boxed(generate_f(usize_of(n), usize_of(m), usize_of(k), seed)?);
        Ok(())
    })
}

/// Planted instance: every clause is satisfied by the target. `planted` may be
/// null, in which case the target is drawn from the seed.
///
/// # Safety
/// `planted` is null or readable; `out_instance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_generate_ff(
    n: u32,
    m: u32,
    k: u32,
    seed: u64,
    planted: *const u64,
    out_instance: *mut *mut KsInstance,
) -> KsStatus {
    guard(|| {
        let o = out(out_instance, "out_instance")?;
        let t = match planted.as_ref() {
            Some(&bits) => Some(Assignment::new(usize_of(n), bits)?),
            None => None,
        };
        *o = boxed(generate_ff(usize_of(n), usize_of(m), usize_of(k), seed, t)?);
        Ok(())
    })
}

/// Satisfiable instance: uniform clauses, each rejected if it would leave no
/// satisfying assignment.
///
/// # Safety
/// `out_instance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_generate_fs(
    n: u32,
    m: u32,
    k: u32,
    seed: u64,
    out_instance: *mut *mut KsInstance,
) -> KsStatus {
    guard(|| {
        let o = out(out_instance, "out_instance")?;
        *o = boxed(generate_fs(usize_of(n), usize_of(m), usize_of(k), seed)?);
        Ok(())
    })
}

/// Parses DIMACS CNF text.
///
/// # Safety
/// `dimacs` is a nul-terminated string; `out_instance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_from_dimacs(
    dimacs: *const c_char,
    out_instance: *mut *mut KsInstance,
) -> KsStatus {
    guard(|| {
        let o = out(out_instance, "out_instance")?;
        *o = boxed(parse_dimacs(text(dimacs, "dimacs")?)?);
        Ok(())
    })
}

/// Reads a DIMACS CNF file.
///
/// # Safety
/// `path` is a nul-terminated string; `out_instance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_read_dimacs(path: *const c_char, out_instance: *mut *mut KsInstance) -> KsStatus {
    guard(|| {
        let o = out(out_instance, "out_instance")?;
        *o = boxed(dimacs_read(text(path, "path")?)?);
        Ok(())
    })
}

/// Writes the instance as a DIMACS CNF file.
///
/// # Safety
/// `instance` is a live handle; `path` is a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_write_dimacs(instance: *const KsInstance, path: *const c_char) -> KsStatus {
    guard(|| {
        dimacs_write(inst(instance, "instance")?, text(path, "path")?)?;
        Ok(())
    })
}

/// DIMACS text of the instance, to be released with [`ks_string_free`].
///
/// # Safety
/// `instance` is a live handle; `out_text` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_to_dimacs(instance: *const KsInstance, out_text: *mut *mut c_char) -> KsStatus {
    guard(|| {
        let o = out(out_text, "out_text")?;
        let s = CString::new(to_dimacs(inst(instance, "instance")?)).expect("DIMACS text has no nul bytes");
        *o = s.into_raw();
        Ok(())
    })
}

/// Variable count, clause count and clause width.
///
/// # Safety
/// `instance` is a live handle; each out pointer is null or writable.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_shape(
    instance: *const KsInstance,
    out_n: *mut u32,
    out_m: *mut u32,
    out_k: *mut u32,
) -> KsStatus {
    guard(|| {
        let i = inst(instance, "instance")?;
        for (p, v) in [(out_n, i.n()), (out_m, i.m()), (out_k, i.k())] {
            if let Some(p) = p.as_mut() {
                *p = u32::try_from(v).map_err(|_| Fail(KsStatus::TooLarge, "value exceeds 32 bits".into()))?;
            }
        }
        Ok(())
    })
}

/// The planted target; `KS_STATUS_INVALID_ARGUMENT` if the instance has none.
///
/// # Safety
/// `instance` is a live handle; `out_bits` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_planted(instance: *const KsInstance, out_bits: *mut u64) -> KsStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        let t = inst(instance, "instance")?
            .planted()
            .ok_or_else(|| Fail(KsStatus::InvalidArgument, "instance has no planted target".into()))?;
        *o = t.bits();
        Ok(())
    })
}

/// Number of clauses satisfied by assignment `x`.
///
/// # Safety
/// `instance` is a live handle; `out_count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_count_satisfied(instance: *const KsInstance, x: u64, out_count: *mut u32) -> KsStatus {
    guard(|| {
        let o = out(out_count, "out_count")?;
        let i = inst(instance, "instance")?;
        *o = count_satisfied(i, &Assignment::new(i.n(), x)?)? as u32;
        Ok(())
    })
}

/// Exact number of satisfying assignments (n ≤ 26).
///
/// # Safety
/// `instance` is a live handle; `out_count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_count_interpretations(instance: *const KsInstance, out_count: *mut u64) -> KsStatus {
    guard(|| {
        let o = out(out_count, "out_count")?;
        *o = surviving_assignments(inst(instance, "instance")?)?.len() as u64;
        Ok(())
    })
}

fn pure_engine(n: u32, k: u32, target: u64) -> Result<(SearchEngine, [u64; 1]), Fail> {
    let (n, k) = (usize_of(n), usize_of(k));
    let t = Assignment::new(n, target)?;
    Ok((SearchEngine::new(&build_hk(n, k, &t)?, k)?, [target]))
}

fn instance_engine(i: &Instance) -> Result<(SearchEngine, Vec<u64>), Fail> {
    let targets = surviving_assignments(i)?.to_vec();
    if targets.is_empty() {
        return Err(Error::Unsatisfiable.into());
    }
    Ok((SearchEngine::new(&build_hc_normalized(i)?, i.k())?, targets))
}

/// Fixed-angle k-local search for a hidden `target`: writes the success
/// probability after 0..=p iterations into `out_probs[0..=p]`.
///
/// # Safety
/// `out_probs` must be valid for `len` writes, with `len ≥ p + 1`.
#[no_mangle]
pub unsafe extern "C" fn ks_run_qs(
    n: u32,
    k: u32,
    theta: f64,
    p: u32,
    target: u64,
    out_probs: *mut f64,
    len: usize,
) -> KsStatus {
    guard(|| {
        if out_probs.is_null() {
            return Err(null("out_probs"));
        }
        if len < usize_of(p) + 1 {
            return Err(Fail(KsStatus::InvalidArgument, format!("buffer of {len} cannot hold {} values", p + 1)));
        }
        let (engine, t) = pure_engine(n, k, target)?;
        let traj = engine.qs_trajectory(theta, usize_of(p), &t)?;
        std::slice::from_raw_parts_mut(out_probs, traj.len()).copy_from_slice(&traj);
        Ok(())
    })
}

/// First local maximum of fixed-angle k-local search (target 0).
///
/// # Safety
/// `out_p` and `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_first_local_max(
    n: u32,
    k: u32,
    theta: f64,
    out_p: *mut u32,
    out_prob: *mut f64,
) -> KsStatus {
    guard(|| {
        let (op, oq) = (out(out_p, "out_p")?, out(out_prob, "out_prob")?);
        let (engine, t) = pure_engine(n, k, 0)?;
        let lm = engine.first_local_max(theta, &t, default_qs_cap(usize_of(n)))?;
        *op = lm.p as u32;
        *oq = lm.prob;
        Ok(())
    })
}

/// Success probability of the p-step adiabatic schedule for a hidden `target`.
///
/// # Safety
/// `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_run_aqs(
    n: u32,
    k: u32,
    p: u32,
    target: u64,
    convention: KsConvention,
    out_prob: *mut f64,
) -> KsStatus {
    guard(|| {
        let o = out(out_prob, "out_prob")?;
        let (engine, t) = pure_engine(n, k, target)?;
        *o = engine.aqs_probability(AdiabaticParams::with_convention(usize_of(p), convention.into())?, &t)?;
        Ok(())
    })
}

/// Fewest adiabatic steps whose success probability reaches `threshold`
/// (pure k-local search, target 0).
///
/// # Safety
/// `out_p` and `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_min_threshold_steps(
    n: u32,
    k: u32,
    threshold: f64,
    convention: KsConvention,
    out_p: *mut u32,
    out_prob: *mut f64,
) -> KsStatus {
    guard(|| {
        let (op, oq) = (out(out_p, "out_p")?, out(out_prob, "out_prob")?);
        let (engine, t) = pure_engine(n, k, 0)?;
        let opts = ThresholdSearch { convention: convention.into(), ..ThresholdSearch::default() };
        let r = engine.min_threshold_steps(threshold, &t, opts)?;
        *op = r.p as u32;
        *oq = r.prob;
        Ok(())
    })
}

/// Fixed-angle search on the instance's normalized clause Hamiltonian;
/// success is the probability on all satisfying assignments after p steps.
///
/// # Safety
/// `instance` is a live handle; `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_run_qs_instance(
    instance: *const KsInstance,
    theta: f64,
    p: u32,
    out_prob: *mut f64,
) -> KsStatus {
    guard(|| {
        let o = out(out_prob, "out_prob")?;
        let (engine, targets) = instance_engine(inst(instance, "instance")?)?;
        *o = engine.qs_state(theta, usize_of(p))?.probability_on(targets);
        Ok(())
    })
}

/// Adiabatic schedule on the instance's normalized clause Hamiltonian.
///
/// # Safety
/// `instance` is a live handle; `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_run_aqs_instance(
    instance: *const KsInstance,
    p: u32,
    convention: KsConvention,
    out_prob: *mut f64,
) -> KsStatus {
    guard(|| {
        let o = out(out_prob, "out_prob")?;
        let (engine, targets) = instance_engine(inst(instance, "instance")?)?;
        *o = engine.aqs_probability(AdiabaticParams::with_convention(usize_of(p), convention.into())?, &targets)?;
        Ok(())
    })
}

/// Adiabatic rounds with doubling step counts, then full-width search; the
/// answer is verified against every clause. `shots` = 0 uses the default.
///
/// # Safety
/// `instance` is a live handle; `out_result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_solve(
    instance: *const KsInstance,
    seed: u64,
    shots: u32,
    out_result: *mut KsSolveResult,
) -> KsStatus {
    guard(|| {
        let o = out(out_result, "out_result")?;
        let mut opts = SolverOptions::default();
        if shots > 0 {
            opts.shots = usize_of(shots);
        }
        let r = solve_max_kssat_with(inst(instance, "instance")?, seed, opts)?;
        let method = match r.method {
            SolveMethod::Classical => KsMethod::Classical,
            SolveMethod::Aqs => KsMethod::Aqs,
            SolveMethod::Grover => KsMethod::Grover,
        };
        *o = KsSolveResult {
            assignment: r.assignment.bits(),
            satisfied: r.satisfied,
            method,
            steps_used: r.steps_used as u64,
            aqs_rounds: r.aqs_rounds as u32,
        };
        Ok(())
    })
}

/// Classical bit-flip local search against the k-local objective of a hidden
/// `target` (n ≤ 64).
///
/// # Safety
/// `out_result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ks_classical(
    n: u32,
    k: u32,
    target: u64,
    seed: u64,
    out_result: *mut KsClassicalResult,
) -> KsStatus {
    guard(|| {
        let o = out(out_result, "out_result")?;
        let n = usize_of(n);
        let oracle = HiddenTarget::new(usize_of(k), Assignment::new(n, target)?)?;
        let r = classical_local_search(|x| oracle.query(x), n, seed)?;
        *o = KsClassicalResult {
            assignment: r.assignment.bits(),
            queries: r.queries as u64,
            restarts: r.restarts as u64,
        };
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `instance` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_instance_free(instance: *mut KsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
