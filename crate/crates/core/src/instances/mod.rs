//! Clauses, instances, the three random models and the exact satisfiability oracle.
//!
//! Three models are provided:
//!
//! - [`generate_f`]: clauses drawn uniformly with replacement from all `2^k C(n, k)`
//!   clauses over k distinct variables.
//! - [`generate_ff`]: clauses drawn uniformly from those satisfied by a planted
//!   assignment `t0`.
//! - [`generate_fs`]: clauses appended one at a time; a candidate that would leave
//!   no satisfying assignment is rejected and redrawn.

mod dimacs;
mod survivors;

pub use dimacs::{dimacs_read, dimacs_write, parse_dimacs, to_dimacs};
pub use survivors::{surviving_assignments, SurvivorSet, MAX_ORACLE_VARS};

use rand::seq::index;
use rand::RngExt;

use crate::combinatorics::{Assignment, MAX_VARS};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRng};

/// A disjunction of exactly k literals over distinct variables, sorted by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    vars: Vec<u32>,
    signs: Vec<bool>,
}

impl Clause {
    /// Builds a canonical clause; literals are sorted by variable.
    pub fn new(literals: &[(u32, bool)]) -> Result<Self> {
        if literals.is_empty() {
            return Err(invalid("empty clause"));
        }
        let mut lits = literals.to_vec();
        lits.sort_by_key(|&(v, _)| v);
        for w in lits.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid(format!("variable {} repeated in clause", w[0].0)));
            }
        }
        if lits[0].0 == 0 {
            return Err(invalid("variable indices are 1-based"));
        }
        Ok(Self { vars: lits.iter().map(|l| l.0).collect(), signs: lits.iter().map(|l| l.1).collect() })
    }

    /// From signed DIMACS literals such as `[1, -3]`.
    pub fn from_dimacs(lits: &[i64]) -> Result<Self> {
        let pairs: Vec<(u32, bool)> = lits
            .iter()
            .map(|&l| {
                if l == 0 || l.unsigned_abs() > u32::MAX as u64 {
                    Err(invalid(format!("bad literal {l}")))
                } else {
                    Ok((l.unsigned_abs() as u32, l > 0))
                }
            })
            .collect::<Result<_>>()?;
        Self::new(&pairs)
    }

    pub fn width(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    /// `true` marks a positive literal.
    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    pub fn literals(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.vars.iter().copied().zip(self.signs.iter().copied())
    }

    pub fn max_var(&self) -> u32 {
        *self.vars.last().expect("clause is nonempty")
    }

    /// `(support, falsifier)`: the clause is false exactly when
    /// `x & support == falsifier`.
    pub fn masks(&self) -> (u64, u64) {
        let mut support = 0u64;
        let mut falsifier = 0u64;
        for (v, pos) in self.literals() {
            let bit = 1u64 << (v - 1);
            support |= bit;
            if !pos {
                falsifier |= bit;
            }
        }
        (support, falsifier)
    }

    #[inline]
    pub fn satisfied_by_bits(&self, x: u64) -> bool {
        let (support, falsifier) = self.masks();
        x & support != falsifier
    }
}

pub fn clause_satisfied(clause: &Clause, x: &Assignment) -> bool {
    clause.satisfied_by_bits(x.bits())
}

/// An ordered multiset of width-k clauses over variables `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    k: usize,
    clauses: Vec<Clause>,
    planted: Option<Assignment>,
}

impl Instance {
    pub fn new(n: usize, k: usize, clauses: Vec<Clause>, planted: Option<Assignment>) -> Result<Self> {
        check_nk(n, k)?;
        for c in &clauses {
            if c.width() != k {
                return Err(invalid(format!("clause width {} != k = {k}", c.width())));
            }
            if c.max_var() as usize > n {
                return Err(invalid(format!("variable {} out of range 1..={n}", c.max_var())));
            }
        }
        if let Some(t) = &planted {
            if t.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.n() });
            }
        }
        Ok(Self { n, k, clauses, planted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn planted(&self) -> Option<&Assignment> {
        self.planted.as_ref()
    }

    /// `(support, falsifier)` per clause; see [`Clause::masks`].
    pub fn clause_masks(&self) -> Vec<(u64, u64)> {
        self.clauses.iter().map(Clause::masks).collect()
    }

    #[inline]
    pub fn count_satisfied_bits(&self, x: u64) -> usize {
        self.clauses.iter().filter(|c| c.satisfied_by_bits(x)).count()
    }

    pub fn is_interpretation(&self, x: &Assignment) -> bool {
        x.n() == self.n && self.count_satisfied_bits(x.bits()) == self.m()
    }
}

pub fn count_satisfied(inst: &Instance, x: &Assignment) -> Result<usize> {
    if x.n() != inst.n {
        return Err(Error::DimensionMismatch { expected: inst.n, got: x.n() });
    }
    Ok(inst.count_satisfied_bits(x.bits()))
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > MAX_VARS {
        return Err(invalid(format!("n = {n} outside 1..={MAX_VARS}")));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    Ok(())
}

/// A clause over k distinct variables chosen uniformly, with uniform signs.
fn random_clause(rng: &mut StreamRng, n: usize, k: usize) -> Clause {
    let mut vars: Vec<u32> = index::sample(rng, n, k).into_iter().map(|v| v as u32 + 1).collect();
    vars.sort_unstable();
    let signs = (0..k).map(|_| rng.random::<bool>()).collect();
    Clause { vars, signs }
}

/// A clause drawn uniformly among those satisfied by `t`.
fn random_clause_satisfied_by(rng: &mut StreamRng, n: usize, k: usize, t: u64) -> Clause {
    let mut vars: Vec<u32> = index::sample(rng, n, k).into_iter().map(|v| v as u32 + 1).collect();
    vars.sort_unstable();
    // Rejection over the 2^k sign patterns leaves the other 2^k - 1 uniform.
    loop {
        let signs: Vec<bool> = (0..k).map(|_| rng.random::<bool>()).collect();
        let clause = Clause { vars: vars.clone(), signs };
        if clause.satisfied_by_bits(t) {
            return clause;
        }
    }
}

pub fn generate_f(n: usize, m: usize, k: usize, seed: u64) -> Result<Instance> {
    check_nk(n, k)?;
    let mut rng = rng::stream(seed, 0);
    let clauses = (0..m).map(|_| random_clause(&mut rng, n, k)).collect();
    Instance::new(n, k, clauses, None)
}

/// Planted model. When `t0` is `None` it is drawn uniformly from the seed.
pub fn generate_ff(n: usize, m: usize, k: usize, seed: u64, t0: Option<Assignment>) -> Result<Instance> {
    check_nk(n, k)?;
    let mut rng = rng::stream(seed, 0);
    let t0 = match t0 {
        Some(t) if t.n() != n => return Err(Error::DimensionMismatch { expected: n, got: t.n() }),
        Some(t) => t,
        None => {
            let bits = rng.random::<u64>() & crate::combinatorics::full_mask(n);
            Assignment::new(n, bits)?
        }
    };
    let clauses = (0..m).map(|_| random_clause_satisfied_by(&mut rng, n, k, t0.bits())).collect();
    Instance::new(n, k, clauses, Some(t0))
}

/// Satisfiable model built by per-clause rejection against the survivor set.
pub fn generate_fs(n: usize, m: usize, k: usize, seed: u64) -> Result<Instance> {
    Ok(generate_fs_with_stats(n, m, k, seed)?.0)
}

/// As [`generate_fs`], also returning the number of rejected candidates.
pub fn generate_fs_with_stats(n: usize, m: usize, k: usize, seed: u64) -> Result<(Instance, usize)> {
    check_nk(n, k)?;
    if n > MAX_ORACLE_VARS {
        return Err(Error::TooLarge { n, limit: MAX_ORACLE_VARS, what: "the survivor-set oracle" });
    }
    let mut rng = rng::stream(seed, 0);
    let mut survivors = SurvivorSet::full(n)?;
    let mut clauses = Vec::with_capacity(m);
    let mut rejected = 0usize;
    while clauses.len() < m {
        let clause = random_clause(&mut rng, n, k);
        if survivors.would_remain(&clause) == 0 {
            rejected += 1;
            continue;
        }
        survivors.restrict(&clause);
        clauses.push(clause);
    }
    Ok((Instance::new(n, k, clauses, None)?, rejected))
}
