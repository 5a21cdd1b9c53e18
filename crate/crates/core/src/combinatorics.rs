//! Exact binomials, the k-local objective and per-clause satisfaction statistics.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

/// Largest `a` for which the cached Pascal table is built.
pub const MAX_BINOM_N: usize = 64;

/// Largest supported variable count; assignments are packed into a `u64`.
pub const MAX_VARS: usize = 64;

fn pascal() -> &'static [Vec<u64>] {
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(MAX_BINOM_N + 1);
        for a in 0..=MAX_BINOM_N {
            let mut row = vec![0u64; a + 1];
            row[0] = 1;
            row[a] = 1;
            for b in 1..a {
                row[b] = rows[a - 1][b - 1] + rows[a - 1][b];
            }
            rows.push(row);
        }
        rows
    })
}

/// `C(a, b)`, with `C(a, b) = 0` for `b > a`.
pub fn binom(a: u64, b: u64) -> Result<u64> {
    if b > a {
        return Ok(0);
    }
    if a as usize > MAX_BINOM_N {
        // Rows past the table: multiplicative formula with overflow checks.
        let b = b.min(a - b);
        let mut acc: u128 = 1;
        for i in 0..b {
            acc = acc * (a - i) as u128 / (i + 1) as u128;
            if acc > u64::MAX as u128 {
                return Err(Error::Overflow(a, b));
            }
        }
        return Ok(acc as u64);
    }
    Ok(pascal()[a as usize][b as usize])
}

/// Table-backed binomial for arguments already known to be in range.
#[inline]
pub(crate) fn c(a: usize, b: usize) -> u64 {
    if b > a {
        0
    } else {
        pascal()[a][b]
    }
}

/// An n-bit assignment. Variable `j` (1-based) lives in bit `j - 1`.
///
/// Text form lists variables left to right, so `"10"` sets x1 = 1, x2 = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    n: usize,
    bits: u64,
}

impl Assignment {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("assignment width {n} outside 1..={MAX_VARS}")));
        }
        if n < 64 && bits >> n != 0 {
            return Err(invalid(format!("bits {bits:#x} exceed width {n}")));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Value of variable `var` (1-based).
    pub fn get(&self, var: usize) -> bool {
        (self.bits >> (var - 1)) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: !self.bits & full_mask(self.n) }
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for var in 1..=self.n {
            f.write_str(if self.get(var) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(invalid(format!("bad assignment character {ch:?} in {s:?}"))),
            }
        }
        Self::new(s.len(), bits)
    }
}

/// Number of positions where an assignment agrees with the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchCount {
    pub n: usize,
    pub d: usize,
}

impl MatchCount {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d > n {
            return Err(invalid(format!("match count d = {d} exceeds n = {n}")));
        }
        Ok(Self { n, d })
    }

    pub fn hamming_distance(&self) -> usize {
        self.n - self.d
    }
}

pub fn matches(x: &Assignment, t: &Assignment) -> Result<MatchCount> {
    if x.n != t.n {
        return Err(Error::DimensionMismatch { expected: t.n, got: x.n });
    }
    let dist = (x.bits ^ t.bits).count_ones() as usize;
    Ok(MatchCount { n: x.n, d: x.n - dist })
}

/// Raw match count for packed words; caller guarantees the width.
#[inline]
pub(crate) fn match_count_bits(n: usize, x: u64, t: u64) -> usize {
    n - ((x ^ t) & full_mask(n)).count_ones() as usize
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > MAX_BINOM_N {
        return Err(invalid(format!("n = {n} outside 1..={MAX_BINOM_N}")));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    Ok(())
}

/// `f_k` as the exact pair `(C(d, k), C(n, k))`.
pub fn objective_fk_ratio(n: usize, k: usize, d: MatchCount) -> Result<(u64, u64)> {
    check_nk(n, k)?;
    if d.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.n });
    }
    Ok((c(d.d, k), c(n, k)))
}

/// Fraction of k-subsets of positions on which `x` fully agrees with the target.
pub fn objective_fk(n: usize, k: usize, d: MatchCount) -> Result<f64> {
    let (num, den) = objective_fk_ratio(n, k, d)?;
    Ok(num as f64 / den as f64)
}

/// `f_k` indexed by `d = 0..=n`.
pub fn objective_table(n: usize, k: usize) -> Result<Vec<f64>> {
    check_nk(n, k)?;
    let den = c(n, k) as f64;
    Ok((0..=n).map(|d| c(d, k) as f64 / den).collect())
}

/// Mean and variance of a single clause's satisfaction indicator at `x`, for a
/// clause drawn uniformly from those satisfied by the target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClauseStats {
    pub mu: f64,
    pub sigma2: f64,
}

fn check_nkd(n: usize, k: usize, d: usize) -> Result<()> {
    check_nk(n, k)?;
    if k >= 64 {
        return Err(invalid("k must be below 64"));
    }
    if d > n {
        return Err(invalid(format!("d = {d} exceeds n = {n}")));
    }
    Ok(())
}

/// Size of the clause family satisfied by a fixed target: `(2^k - 1) C(n, k)`.
pub fn target_clause_count(n: usize, k: usize) -> Result<u64> {
    check_nk(n, k)?;
    ((1u64 << k) - 1).checked_mul(c(n, k)).ok_or(Error::Overflow(n as u64, k as u64))
}

/// Of the clauses satisfied by the target, how many an assignment with `d`
/// matches also satisfies: `(2^k - 2) C(n, k) + C(d, k)`.
pub fn satisfied_clause_count(n: usize, k: usize, d: usize) -> Result<u64> {
    check_nkd(n, k, d)?;
    ((1u64 << k) - 2)
        .checked_mul(c(n, k))
        .and_then(|v| v.checked_add(c(d, k)))
        .ok_or(Error::Overflow(n as u64, k as u64))
}

pub fn clause_stats(n: usize, k: usize, d: usize) -> Result<ClauseStats> {
    check_nkd(n, k, d)?;
    let big = ((1u64 << k) - 1) as f64;
    let cnk = c(n, k) as f64;
    let cdk = c(d, k) as f64;
    let mu = (big - 1.0) / big + cdk / (big * cnk);
    let sigma2 = (1.0 - mu).powi(2) * mu + mu * mu * (cnk - cdk) / (big * cnk);
    Ok(ClauseStats { mu, sigma2 })
}
