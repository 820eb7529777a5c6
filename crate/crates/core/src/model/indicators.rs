//! Structure indicators of a many-boson state in the Fock basis.

use crate::error::{domain, Result};
use crate::state::StateVector;

/// Inverse participation ratio `(sum_c |<c|psi>|^4)^-1`.
pub fn ipr(state: &StateVector) -> Result<f64> {
    let norm_sqr = state.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(domain("IPR of the zero vector"));
    }
    let quartic: f64 = state.amplitudes().iter().map(|a| a.norm_sqr().powi(2)).sum();
    // normalizing here keeps the result meaningful for slightly off-norm inputs
    Ok(norm_sqr * norm_sqr / quartic)
}

/// Eigenvalues `lambda_k`, `k = 0..=N_B`, of the reduced density matrix of
/// mode `p`. In a fixed-N pure state that matrix is diagonal in the number
/// basis, so `lambda_k` is the total probability of `n_p = k`.
pub fn mode_occupation_spectrum(state: &StateVector, p: usize) -> Result<Vec<f64>> {
    let basis = state.basis();
    if p >= basis.n_sites() {
        return Err(domain(format!("mode {p} out of range for {} modes", basis.n_sites())));
    }
    let mut lambda = vec![0.0; basis.n_bosons() + 1];
    for (occ, a) in basis.iter().zip(state.amplitudes()) {
        lambda[occ[p] as usize] += a.norm_sqr();
    }
    Ok(lambda)
}

/// Single-site von Neumann entropy `-sum_k lambda_k ln lambda_k`.
pub fn entropy(state: &StateVector, p: usize) -> Result<f64> {
    Ok(mode_occupation_spectrum(state, p)?.into_iter().filter(|&l| l > 0.0).map(|l| -l * l.ln()).sum())
}
