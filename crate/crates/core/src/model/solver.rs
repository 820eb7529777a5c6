use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Dimension below which the full dense eigensolver is used.
pub const DENSE_LIMIT: usize = 512;

/// Relative splitting under which the two lowest levels count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Target for `||H v - E v||`.
    pub tolerance: f64,
    pub dense_limit: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-10, dense_limit: DENSE_LIMIT, krylov_dim: 80, max_restarts: 500 }
    }
}

/// Lowest eigenpair of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Unit-norm, with its largest-magnitude amplitude real and positive.
    pub vector: StateVector,
    /// First excited energy, when the space has more than one state.
    pub first_excited: Option<f64>,
    /// Second vector of a degenerate ground doublet.
    pub partner: Option<StateVector>,
    pub residual: f64,
}

impl GroundState {
    pub fn gap(&self) -> Option<f64> {
        self.first_excited.map(|e1| e1 - self.energy)
    }

    pub fn is_degenerate(&self) -> bool {
        self.partner.is_some()
    }

    /// Orthonormal vectors spanning the ground space (one or two).
    pub fn subspace(&self) -> Vec<&StateVector> {
        std::iter::once(&self.vector).chain(self.partner.as_ref()).collect()
    }
}

pub fn ground_state(h: &SparseHamiltonian) -> Result<GroundState> {
    ground_state_with(h, &SolverOptions::default())
}

pub fn ground_state_with(h: &SparseHamiltonian, opts: &SolverOptions) -> Result<GroundState> {
    let dim = h.dim();
    let (e0, mut v0, e1, v1) = if dim < opts.dense_limit {
        dense_lowest_two(h)
    } else {
        let (e0, v0) = lanczos_lowest(h, None, opts)?;
        let (e1, v1) = lanczos_lowest(h, Some(&v0), opts)?;
        (e0, v0, Some(e1), Some(v1))
    };
    fix_sign(&mut v0);
    let residual = h.residual(&v0, e0);
    if dim >= opts.dense_limit && residual > opts.tolerance {
        return Err(Error::Solver { residual, iterations: opts.max_restarts });
    }
    let degenerate = matches!(e1, Some(e1) if e1 - e0 < DEGENERACY_TOLERANCE * e0.abs());
    let partner = match (degenerate, v1) {
        (true, Some(mut v1)) => {
            fix_sign(&mut v1);
            Some(StateVector::from_real(h.basis().clone(), &v1)?)
        }
        _ => None,
    };
    Ok(GroundState {
        energy: e0,
        vector: StateVector::from_real(h.basis().clone(), &v0)?,
        first_excited: e1,
        partner,
        residual,
    })
}

fn dense_lowest_two(h: &SparseHamiltonian) -> (f64, Vec<f64>, Option<f64>, Option<Vec<f64>>) {
    let d = h.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for &(r, c, v) in h.entries() {
        m[(r, c)] += v;
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let column = |k: usize| -> Vec<f64> { eig.eigenvectors.column(k).iter().copied().collect() };
    let e0 = eig.eigenvalues[order[0]];
    let v0 = normalized(column(order[0]));
    if d == 1 {
        return (e0, v0, None, None);
    }
    let e1 = eig.eigenvalues[order[1]];
    (e0, v0, Some(e1), Some(normalized(column(order[1]))))
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    for x in &mut v {
        *x /= n;
    }
    v
}

/// Makes the largest-magnitude component positive. Near-ties resolve to the
/// lowest index so that symmetric states get a platform-independent sign.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(pivot) = v.iter().position(|x| x.abs() >= max - 1e-9 * max) {
        if v[pivot] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Restarted Lanczos with full reorthogonalization. With `deflate`, the
/// search runs in the orthogonal complement of that (unit) vector.
fn lanczos_lowest(h: &SparseHamiltonian, deflate: Option<&[f64]>, opts: &SolverOptions) -> Result<(f64, Vec<f64>)> {
    let dim = h.dim();
    let project = |v: &mut [f64]| {
        if let Some(d) = deflate {
            let c = dot(d, v);
            axpy(-c, d, v);
        }
    };
    let apply = |x: &[f64], y: &mut [f64]| {
        h.matvec(x, y);
        project(y);
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 0.5).collect();
    project(&mut start);
    let mut x = normalized(start);

    let m = opts.krylov_dim.min(dim).max(2);
    let mut last_residual = f64::INFINITY;
    let mut w = vec![0.0; dim];
    let mut hx = vec![0.0; dim];
    for _ in 0..opts.max_restarts {
        let mut q: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            apply(&q[j], &mut w);
            let a = dot(&q[j], &w);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for qi in &q {
                    let c = dot(qi, &w);
                    axpy(-c, qi, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == m || b < 1e-13 {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let lowest =
            (0..k).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).expect("non-empty tridiagonal");
        let theta = eig.eigenvalues[lowest];
        let mut ritz = vec![0.0; dim];
        for (i, qi) in q.iter().enumerate().take(k) {
            axpy(eig.eigenvectors[(i, lowest)], qi, &mut ritz);
        }
        project(&mut ritz);
        x = normalized(ritz);
        apply(&x, &mut hx);
        let residual = hx.iter().zip(&x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
        last_residual = residual;
        if residual <= opts.tolerance || k == dim {
            let energy = dot(&x, &hx);
            return Ok((energy, x));
        }
    }
    Err(Error::Solver { residual: last_residual, iterations: opts.max_restarts })
}
