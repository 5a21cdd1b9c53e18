//! Diagonal Hamiltonians over the computational basis and small dense operators
//! used to cross-check the matrix-free kernels.
//!
//! Energies follow the highest-is-best convention: the clause Hamiltonian counts
//! satisfied clauses, so interpretations sit at the top of the spectrum.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::combinatorics::{c, full_mask, match_count_bits, objective_table, Assignment};
use crate::error::{invalid, Error, Result};
use crate::instances::{Instance, MAX_ORACLE_VARS};

/// Largest n for which dense `2^n x 2^n` matrices are built.
pub const MAX_DENSE_VARS: usize = 10;

/// Largest n for which full diagonals are built.
pub const MAX_DIAGONAL_VARS: usize = MAX_ORACLE_VARS;

/// Real eigenvalues indexed by assignment bits.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    values: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_diag_n(n)?;
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite eigenvalue at index {i}")));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u64) -> f64 {
        self.values[x as usize]
    }

    /// Distinct values (in order of first appearance) and, per basis state, the
    /// index of its value. Diagonals here take few distinct values, so kernels
    /// can evaluate one exponential per level rather than per amplitude.
    pub fn levels(&self) -> (Vec<f64>, Vec<u32>) {
        let mut lookup: HashMap<u64, u32> = HashMap::new();
        let mut levels = Vec::new();
        let index = self
            .values
            .iter()
            .map(|&v| {
                *lookup.entry(v.to_bits()).or_insert_with(|| {
                    levels.push(v);
                    (levels.len() - 1) as u32
                })
            })
            .collect();
        (levels, index)
    }

    /// Largest eigenvalue and every basis state attaining it.
    pub fn argmax(&self) -> (f64, Vec<u64>) {
        let top = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let at = (0..self.values.len() as u64).filter(|&x| self.get(x) == top).collect();
        (top, at)
    }

    /// Writes a 16-byte header (`b"KSDIAG\0\0"`, then n as little-endian u64)
    /// followed by the values as little-endian f64.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != DUMP_MAGIC {
            return Err(invalid("not a diagonal dump (bad magic)"));
        }
        let n = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
        check_diag_n(n)?;
        let mut bytes = Vec::with_capacity(8 << n);
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 << n {
            return Err(Error::DimensionMismatch { expected: 8 << n, got: bytes.len() });
        }
        let values = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
        Self::new(n, values)
    }
}

const DUMP_MAGIC: &[u8; 8] = b"KSDIAG\0\0";

fn check_diag_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if n > MAX_DIAGONAL_VARS {
        return Err(Error::TooLarge { n, limit: MAX_DIAGONAL_VARS, what: "a full diagonal" });
    }
    Ok(())
}

/// Satisfied-clause count for every assignment.
///
/// Each clause is false on exactly one subcube of dimension `n - k`, so the
/// count is `m` minus the number of subcubes containing `x`; the cost is
/// `O(m 2^(n-k) + 2^n)` rather than `O(m 2^n)`.
pub fn build_hc(inst: &Instance) -> Result<DiagonalHamiltonian> {
    let n = inst.n();
    check_diag_n(n)?;
    let mut unsat = vec![0u32; 1 << n];
    let all = full_mask(n);
    for (support, falsifier) in inst.clause_masks() {
        let free = all & !support;
        let mut sub = 0u64;
        loop {
            unsat[(sub | falsifier) as usize] += 1;
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                break;
            }
        }
    }
    let m = inst.m() as f64;
    DiagonalHamiltonian::new(n, unsat.into_iter().map(|u| m - u as f64).collect())
}

/// Affine rescale `(2^k - 1) H / m - (2^k - 2)`, mapping a count of `m` to exactly 1.
pub fn normalize_hc(h: &DiagonalHamiltonian, m: usize, k: usize) -> Result<DiagonalHamiltonian> {
    if m == 0 {
        return Err(invalid("cannot normalize a Hamiltonian with m = 0 clauses"));
    }
    if k == 0 || k >= 53 {
        return Err(invalid(format!("k = {k} outside the supported range")));
    }
    let big = ((1u64 << k) - 1) as f64;
    let m = m as f64;
    // Multiply before dividing so that a count of exactly m gives exactly 2^k - 1.
    let values = h.values.iter().map(|&count| big * count / m - (big - 1.0)).collect();
    DiagonalHamiltonian::new(h.n, values)
}

/// Convenience: the normalized clause Hamiltonian of an instance.
pub fn build_hc_normalized(inst: &Instance) -> Result<DiagonalHamiltonian> {
    normalize_hc(&build_hc(inst)?, inst.m(), inst.k())
}

/// The k-local objective `f_k(x)` for target `t` as a diagonal.
pub fn build_hk(n: usize, k: usize, t: &Assignment) -> Result<DiagonalHamiltonian> {
    check_diag_n(n)?;
    if t.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.n() });
    }
    let table = objective_table(n, k)?;
    let tb = t.bits();
    let values = (0..1u64 << n).map(|x| table[match_count_bits(n, x, tb)]).collect();
    DiagonalHamiltonian::new(n, values)
}

/// The k-local objective for the all-zero target, which defines the mixer.
pub fn build_hk0(n: usize, k: usize) -> Result<DiagonalHamiltonian> {
    build_hk(n, k, &Assignment::zeros(n)?)
}

/// Elementwise statistics of `A - B`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub max_abs: f64,
    pub rms: f64,
    /// Mean of `A - B` over assignments with `d` matches to the target, `d = 0..=n`;
    /// empty when no target is given.
    pub per_d_mean: Vec<f64>,
}

pub fn deviation(
    a: &DiagonalHamiltonian,
    b: &DiagonalHamiltonian,
    target: Option<&Assignment>,
) -> Result<DeviationReport> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: b.n });
    }
    let n = a.n;
    let mut max_abs = 0f64;
    let mut sum_sq = 0f64;
    let mut per_d = vec![(0f64, 0usize); if target.is_some() { n + 1 } else { 0 }];
    for (x, (&va, &vb)) in a.values.iter().zip(&b.values).enumerate() {
        let delta = va - vb;
        max_abs = max_abs.max(delta.abs());
        sum_sq += delta * delta;
        if let Some(t) = target {
            let d = n - ((x as u64 ^ t.bits()) & full_mask(n)).count_ones() as usize;
            per_d[d].0 += delta;
            per_d[d].1 += 1;
        }
    }
    Ok(DeviationReport {
        max_abs,
        rms: (sum_sq / a.len() as f64).sqrt(),
        per_d_mean: per_d.into_iter().map(|(s, cnt)| s / cnt as f64).collect(),
    })
}

/// Dense Walsh–Hadamard matrix `H^{⊗n}`, built by Kronecker products.
pub fn dense_hadamard(n: usize) -> DMatrix<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = DMatrix::from_row_slice(2, 2, &[s, s, s, -s]);
    // Variable 1 is the least significant bit, hence the last Kronecker factor;
    // all factors are equal here, so the order is immaterial.
    (1..n).fold(h.clone(), |acc, _| h.kronecker(&acc))
}

fn check_dense_n(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_VARS {
        return Err(Error::TooLarge { n, limit: MAX_DENSE_VARS, what: "a dense operator" });
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    Ok(())
}

/// Mixer built by conjugating the target-zero objective with `H^{⊗n}`.
pub fn dense_hbk_conjugated(n: usize, k: usize) -> Result<DMatrix<f64>> {
    check_dense_n(n, k)?;
    let hn = dense_hadamard(n);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(build_hk0(n, k)?.values));
    Ok(&hn * diag * &hn)
}

/// Mixer built as the average over k-subsets `α` of `H^{⊗k} h_k H^{⊗k}` acting
/// on the qubits in `α`, where `h_k` projects onto the k-qubit all-zero state.
pub fn dense_hbk_local_terms(n: usize, k: usize) -> Result<DMatrix<f64>> {
    check_dense_n(n, k)?;
    let dim = 1usize << n;
    let hk = dense_hadamard(k);
    let mut proj = DMatrix::zeros(1 << k, 1 << k);
    proj[(0, 0)] = 1.0;
    let xk = &hk * proj * &hk;
    let mut out = DMatrix::zeros(dim, dim);
    let weight = 1.0 / c(n, k) as f64;
    for alpha in k_subsets(n, k) {
        let support: u64 = alpha.iter().map(|&q| 1u64 << q).sum();
        let local = |x: usize| -> usize { alpha.iter().enumerate().map(|(j, &q)| ((x >> q) & 1) << j).sum() };
        for x in 0..dim {
            for y in 0..dim {
                if (x as u64 ^ y as u64) & !support == 0 {
                    out[(x, y)] += weight * xk[(local(x), local(y))];
                }
            }
        }
    }
    Ok(out)
}

/// Both constructions of the dense mixer.
pub fn build_dense_hbk(n: usize, k: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    Ok((dense_hbk_conjugated(n, k)?, dense_hbk_local_terms(n, k)?))
}

/// All k-subsets of `0..n` in lexicographic order.
pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Gate-count model for one search iteration: one `O(k)` multi-controlled
/// phase per clause in the cost layer and per k-subset in the mixer.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CircuitCost {
    pub n: usize,
    pub k: usize,
    pub mixer_terms: u64,
    pub clause_terms: u64,
    pub gates_per_term: u64,
    pub gates_per_iteration: u64,
}

/// Cost of an iteration whose cost layer is either the k-local objective
/// (`clauses = None`, `C(n, k)` terms) or a clause Hamiltonian with `m` clauses.
pub fn circuit_cost_report(n: usize, k: usize, clauses: Option<usize>) -> Result<CircuitCost> {
    if k == 0 || k > n || n > 64 {
        return Err(invalid(format!("invalid (n, k) = ({n}, {k})")));
    }
    let mixer_terms = c(n, k);
    let clause_terms = clauses.map_or(mixer_terms, |m| m as u64);
    Ok(CircuitCost {
        n,
        k,
        mixer_terms,
        clause_terms,
        gates_per_term: k as u64,
        gates_per_iteration: (mixer_terms + clause_terms) * k as u64,
    })
}

pub fn circuit_cost_for(inst: &Instance) -> Result<CircuitCost> {
    circuit_cost_report(inst.n(), inst.k(), Some(inst.m()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::clause_stats;
    use crate::instances::{generate_f, generate_ff, generate_fs, surviving_assignments};

    #[test]
    fn hc_matches_brute_force() {
        let inst = generate_f(8, 60, 3, 4).unwrap();
        let h = build_hc(&inst).unwrap();
        for x in 0..256u64 {
            let brute =
                inst.clauses().iter().filter(|c| c.literals().any(|(v, pos)| ((x >> (v - 1)) & 1 == 1) == pos)).count();
            assert_eq!(h.get(x), brute as f64);
        }
        let empty = Instance::new(5, 3, vec![], None).unwrap();
        assert!(build_hc(&empty).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_is_one_on_interpretations() {
        for seed in 0..5 {
            let inst = generate_fs(10, 60, 3, seed).unwrap();
            let hb = build_hc_normalized(&inst).unwrap();
            for x in surviving_assignments(&inst).unwrap().iter() {
                assert_eq!(hb.get(x), 1.0);
            }
            assert!(hb.values().iter().all(|&v| (-6.0..=1.0).contains(&v)));
        }
        let ff = generate_ff(9, 77, 3, 1, None).unwrap();
        assert_eq!(build_hc_normalized(&ff).unwrap().get(ff.planted().unwrap().bits()), 1.0);
        assert!(normalize_hc(&build_hc(&ff).unwrap(), 0, 3).is_err());
    }

    #[test]
    fn normalized_mean_tracks_objective() {
        let (n, k, m) = (10, 3, 500);
        let inst = generate_ff(n, m, k, 8, None).unwrap();
        let t = *inst.planted().unwrap();
        let hb = build_hc_normalized(&inst).unwrap();
        let hk = build_hk(n, k, &t).unwrap();
        let report = deviation(&hb, &hk, Some(&t)).unwrap();
        let big = 7.0;
        for d in 0..=n {
            let count = c(n, d) as f64;
            let sigma = clause_stats(n, k, d).unwrap().sigma2.sqrt();
            let tol = 3.0 * big * sigma / (m as f64 * count).sqrt();
            assert!(report.per_d_mean[d].abs() <= tol + 1e-12, "d = {d}: {} > {tol}", report.per_d_mean[d]);
        }
    }

    #[test]
    fn hk_examples() {
        let t: Assignment = "0000".parse().unwrap();
        let h = build_hk(4, 2, &t).unwrap();
        // 0011 as text sets x3 = x4 = 1, i.e. bits 2 and 3.
        let x: Assignment = "0011".parse().unwrap();
        assert!((h.get(x.bits()) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(h.get(0), 1.0);
        let t: Assignment = "10110".parse().unwrap();
        let g = build_hk(5, 5, &t).unwrap();
        for x in 0..32u64 {
            assert_eq!(g.get(x), if x == t.bits() { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn deviation_self_is_zero() {
        let h = build_hk0(6, 2).unwrap();
        let r = deviation(&h, &h, Some(&Assignment::zeros(6).unwrap())).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(r.rms, 0.0);
        assert!(r.per_d_mean.iter().all(|&v| v == 0.0));
        assert!(deviation(&h, &build_hk0(5, 2).unwrap(), None).is_err());
    }

    #[test]
    fn more_clauses_shrink_deviation() {
        let n = 8;
        let mut wins = 0;
        for seed in 0..50 {
            let small = generate_ff(n, n * n, 3, seed, None).unwrap();
            let t = *small.planted().unwrap();
            let large = generate_ff(n, n.pow(4), 3, seed + 1000, Some(t)).unwrap();
            let hk = build_hk(n, 3, &t).unwrap();
            let ds = deviation(&build_hc_normalized(&small).unwrap(), &hk, None).unwrap();
            let dl = deviation(&build_hc_normalized(&large).unwrap(), &hk, None).unwrap();
            if dl.max_abs < ds.max_abs {
                wins += 1;
            }
        }
        assert!(wins >= 45, "wins = {wins}");
    }

    #[test]
    fn exchange_paths_agree() {
        for n in 1..=6 {
            for k in 1..=n.min(3) {
                let (a, b) = build_dense_hbk(n, k).unwrap();
                assert!((a - b).amax() < 1e-12, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn one_local_mixer_is_transverse_field() {
        let n = 4;
        let (a, _) = build_dense_hbk(n, 1).unwrap();
        // (1/n) Σ_j |+><+|_j = 1/2 + (1/2n) Σ_j X_j.
        let dim = 1 << n;
        let mut expect = DMatrix::from_diagonal_element(dim, dim, 0.5);
        for x in 0..dim {
            for j in 0..n {
                expect[(x, x ^ (1 << j))] += 0.5 / n as f64;
            }
        }
        assert!((a - expect).amax() < 1e-12);
    }

    #[test]
    fn full_width_mixer_is_single_projector() {
        let (a, _) = build_dense_hbk(3, 3).unwrap();
        assert!(a.iter().all(|&v| (v - 0.125).abs() < 1e-14));
    }

    #[test]
    fn dense_size_bound() {
        assert!(matches!(build_dense_hbk(11, 2), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn cost_report() {
        assert_eq!(circuit_cost_report(20, 3, None).unwrap().mixer_terms, 1140);
        assert_eq!(circuit_cost_report(20, 3, Some(400)).unwrap().clause_terms, 400);
        assert_eq!(circuit_cost_report(7, 7, None).unwrap().mixer_terms, 1);
    }

    #[test]
    fn levels_and_dump_round_trip() {
        let h = build_hk0(7, 3).unwrap();
        let (levels, index) = h.levels();
        assert_eq!(levels.len(), 6); // d = 0..2 collapse to 0
        for (x, &i) in index.iter().enumerate() {
            assert_eq!(levels[i as usize], h.values()[x]);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        h.write_binary(&path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 8 * 128);
        assert_eq!(DiagonalHamiltonian::read_binary(&path).unwrap(), h);
    }

    #[test]
    fn subsets_enumerate_binomially() {
        assert_eq!(k_subsets(6, 3).len(), 20);
        assert_eq!(k_subsets(4, 4), vec![vec![0, 1, 2, 3]]);
        assert!(k_subsets(2, 3).is_empty());
    }
}
