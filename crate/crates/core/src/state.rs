use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fock::FockBasis;

/// Complex amplitudes over a fixed-N Fock basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The Fock state with the given occupations.
    pub fn fock(basis: Arc<FockBasis>, occupations: &[u32]) -> Result<Self> {
        let idx = basis.index_of(occupations)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(StateVector { basis, amplitudes })
    }

    pub fn from_amplitudes(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(domain(format!("{} amplitudes for a basis of dimension {}", amplitudes.len(), basis.dim())));
        }
        Ok(StateVector { basis, amplitudes })
    }

    pub fn from_real(basis: Arc<FockBasis>, amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(basis, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude_of(&self, occupations: &[u32]) -> Result<Complex64> {
        Ok(self.amplitudes[self.basis.index_of(occupations)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        let inv = 1.0 / n;
        for a in &mut self.amplitudes {
            *a *= inv;
        }
        Ok(())
    }

    /// Born-rule probabilities `|amplitude|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_basis(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn same_basis(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    pub(crate) fn check_same_basis(&self, other: &StateVector) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(domain("states live on different bases"))
        }
    }

    /// Multiplies by `e^{i alpha}`.
    pub fn with_global_phase(mut self, alpha: f64) -> Self {
        let phase = Complex64::from_polar(1.0, alpha);
        for a in &mut self.amplitudes {
            *a *= phase;
        }
        self
    }
}
