//! Two-mode beam-splitter restricted to a conserved pair total `n = n_p + n_q`.
//!
//! The block basis is ordered by `n_p = n, n-1, ..., 0` (so position `j`
//! holds `n_q = j`). In that basis the generator
//! `K = a_q^+ a_p - a_p^+ a_q` is real, antisymmetric and tridiagonal with
//! `K[j+1][j] = sqrt((n-j)(j+1))`. Conjugating by `diag(i^j)` turns it into
//! `i T` with `T` real symmetric, so `exp(theta K)` follows from one cached
//! real eigendecomposition of `T` per pair total. The phase angle enters as
//! `B(theta, phi) = P exp(theta K) P^+` with `P = diag(e^{i phi n_q})`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Cached spectral data for one pair total.
#[derive(Clone, Debug)]
pub struct BlockGenerator {
    n_total: usize,
    /// eigenvalues of `T`
    eigenvalues: Vec<f64>,
    /// `outer[(j * size + k) * size + m] = W[j][m] * W[k][m]`
    outer: Vec<f64>,
}

impl BlockGenerator {
    pub fn new(n_total: usize) -> Self {
        let size = n_total + 1;
        let mut t = DMatrix::<f64>::zeros(size, size);
        for j in 0..n_total {
            let c = (((n_total - j) * (j + 1)) as f64).sqrt();
            t[(j + 1, j)] = c;
            t[(j, j + 1)] = c;
        }
        let eig = SymmetricEigen::new(t);
        let w = &eig.eigenvectors;
        let mut outer = vec![0.0; size * size * size];
        for j in 0..size {
            for k in 0..size {
                for m in 0..size {
                    outer[(j * size + k) * size + m] = w[(j, m)] * w[(k, m)];
                }
            }
        }
        BlockGenerator { n_total, eigenvalues: eig.eigenvalues.iter().copied().collect(), outer }
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn size(&self) -> usize {
        self.n_total + 1
    }

    /// Real matrix `exp(theta K)`, row-major.
    pub fn rotation(&self, theta: f64, out: &mut Vec<f64>) {
        let size = self.size();
        let (sin, cos): (Vec<f64>, Vec<f64>) = self.eigenvalues.iter().map(|&l| (theta * l).sin_cos()).unzip();
        out.clear();
        out.resize(size * size, 0.0);
        for j in 0..size {
            for k in 0..size {
                let w = &self.outer[(j * size + k) * size..(j * size + k + 1) * size];
                // exp(theta K)[j][k] = Re(i^(k-j) sum_m W_jm W_km e^{i theta l_m})
                let v = match (k as isize - j as isize).rem_euclid(4) {
                    0 => dot(w, &cos),
                    1 => -dot(w, &sin),
                    2 => -dot(w, &cos),
                    _ => dot(w, &sin),
                };
                out[j * size + k] = v;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Beam-splitter `B(theta, phi)` on the `n_total` block as a dense complex
/// matrix, computed from the generator's eigendecomposition.
pub fn bs_block(n_total: usize, theta: f64, phi: f64) -> DMatrix<Complex64> {
    let gen = BlockGenerator::new(n_total);
    let size = gen.size();
    let mut d = Vec::new();
    gen.rotation(theta, &mut d);
    DMatrix::from_fn(size, size, |j, k| Complex64::from_polar(1.0, phi * (j as f64 - k as f64)) * d[j * size + k])
}

/// Anti-Hermitian generator `theta (e^{i phi} a_q^+ a_p - e^{-i phi} a_p^+ a_q)`
/// on the `n_total` block.
pub fn bs_generator(n_total: usize, theta: f64, phi: f64) -> DMatrix<Complex64> {
    let size = n_total + 1;
    let mut g = DMatrix::<Complex64>::zeros(size, size);
    for j in 0..n_total {
        // a_q^+ a_p |n-j, j> = sqrt((n-j)(j+1)) |n-j-1, j+1>
        let c = (((n_total - j) * (j + 1)) as f64).sqrt() * theta;
        g[(j + 1, j)] = Complex64::from_polar(c, phi);
        g[(j, j + 1)] = -Complex64::from_polar(c, -phi);
    }
    g
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm_taylor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as u32;
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Same block via the Taylor route, for cross-checking.
pub fn bs_block_taylor(n_total: usize, theta: f64, phi: f64) -> DMatrix<Complex64> {
    expm_taylor(&bs_generator(n_total, theta, phi))
}
