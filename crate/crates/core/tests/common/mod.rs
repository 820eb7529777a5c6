//! Dense operator-algebra oracles shared by the integration tests.
//!
//! Everything here works on the truncated product space of `n_modes` modes
//! with at most `cutoff` photons each, indexed by
//! `sum_p n_p (cutoff + 1)^p`, and is deliberately independent of the
//! library's fixed-N machinery.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use photonic_bh::{FockBasis, StateVector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub struct ProductSpace {
    pub n_modes: usize,
    pub cutoff: usize,
}

impl ProductSpace {
    pub fn new(n_modes: usize, cutoff: usize) -> Self {
        ProductSpace { n_modes, cutoff }
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.n_modes as u32)
    }

    pub fn index(&self, occ: &[u32]) -> usize {
        occ.iter().rev().fold(0, |acc, &n| acc * (self.cutoff + 1) + n as usize)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<u32> {
        (0..self.n_modes)
            .map(|_| {
                let n = index % (self.cutoff + 1);
                index /= self.cutoff + 1;
                n as u32
            })
            .collect()
    }

    /// Annihilation operator of mode `p`.
    pub fn annihilate(&self, p: usize) -> CMat {
        let d = self.dim();
        let mut a = CMat::zeros(d, d);
        for col in 0..d {
            let mut occ = self.occupations(col);
            if occ[p] > 0 {
                let amp = (occ[p] as f64).sqrt();
                occ[p] -= 1;
                a[(self.index(&occ), col)] = c(amp);
            }
        }
        a
    }

    pub fn number(&self, p: usize) -> CMat {
        let a = self.annihilate(p);
        a.adjoint() * a
    }

    /// Isometry from a fixed-N basis into the product space.
    pub fn embedding(&self, basis: &FockBasis) -> CMat {
        let mut e = CMat::zeros(self.dim(), basis.dim());
        for (i, occ) in basis.iter().enumerate() {
            e[(self.index(occ), i)] = c(1.0);
        }
        e
    }
}

/// `exp(G)` for anti-Hermitian `G`, through the eigendecomposition of `-iG`.
pub fn expm_anti_hermitian(g: &CMat) -> CMat {
    let h: CMat = g.map(|z| z * Complex64::new(0.0, -1.0));
    let h = (&h + h.adjoint()) * c(0.5);
    let eig = nalgebra::SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l)));
    v * d * v.adjoint()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn to_column(state: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(state.amplitudes())
}

/// Deterministic pseudo-random normalized state.
pub fn random_state(basis: std::sync::Arc<FockBasis>, seed: u64) -> StateVector {
    use rand::Rng;
    let mut rng = photonic_bh::rng::stream(seed, 0);
    let amps: Vec<Complex64> =
        (0..basis.dim()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_amplitudes(basis, amps).unwrap();
    s.normalize().unwrap();
    s
}
