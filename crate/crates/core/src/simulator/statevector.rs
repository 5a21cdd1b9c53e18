use num_complex::Complex64;

use crate::combinatorics::Assignment;
use crate::error::{invalid, Error, Result};

/// Tolerance on `|‖ψ‖² - 1|`. States are checked, never renormalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest supported qubit count for statevectors.
pub const MAX_QUBITS: usize = 26;

/// Unit-norm amplitudes over the `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amp: Vec<Complex64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooLarge { n, limit: MAX_QUBITS, what: "a statevector" });
    }
    Ok(())
}

impl Statevector {
    /// `|+⟩^{⊗n}`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_n(n)?;
        let a = Complex64::new((-(n as f64) / 2.0).exp2(), 0.0);
        Ok(Self { n, amp: vec![a; 1 << n] })
    }

    /// Computational basis state `|x⟩`.
    pub fn basis(n: usize, x: u64) -> Result<Self> {
        check_n(n)?;
        if x >> n != 0 {
            return Err(invalid(format!("basis index {x} out of range for n = {n}")));
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[x as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amp })
    }

    /// Wraps explicit amplitudes, rejecting states off the unit sphere.
    pub fn from_amplitudes(n: usize, amp: Vec<Complex64>) -> Result<Self> {
        check_n(n)?;
        if amp.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amp.len() });
        }
        let psi = Self { n, amp };
        psi.check_norm()?;
        Ok(psi)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    /// Mutable access for kernels; callers must preserve the norm.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_norm(&self) -> Result<()> {
        let drift = self.norm_sqr() - 1.0;
        if drift.abs() > NORM_TOLERANCE {
            return Err(Error::NormDrift(drift));
        }
        Ok(())
    }

    #[inline]
    pub fn probability(&self, x: u64) -> f64 {
        self.amp[x as usize].norm_sqr()
    }

    pub fn probability_of(&self, t: &Assignment) -> Result<f64> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: t.n() });
        }
        Ok(self.probability(t.bits()))
    }

    /// Total probability on a set of basis states.
    pub fn probability_on(&self, xs: impl IntoIterator<Item = u64>) -> f64 {
        xs.into_iter().map(|x| self.probability(x)).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }
}
