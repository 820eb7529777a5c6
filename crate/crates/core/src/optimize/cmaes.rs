//! `(mu/mu_w, lambda)` CMA-ES with cumulative step-size adaptation and
//! combined rank-one and rank-mu covariance updates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Objective, OptimizerConfig, Recorder, Termination};
use crate::error::{Error, Result};

const SIGMA_FLOOR: f64 = 1e-12;

/// `4 + floor(3 ln dim)`.
pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

struct Strategy {
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Strategy { lambda, weights, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n }
    }
}

pub(super) fn run<O: Objective + ?Sized, R: Rng>(
    rec: &mut Recorder<'_, O>,
    x0: Vec<f64>,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, u64, Termination)> {
    let n = x0.len();
    let st = Strategy::new(n, config.population.unwrap_or_else(|| default_population(n)));
    let mut mean = DVector::from_vec(x0);
    let mut sigma = config.sigma0;
    let mut cov = DMatrix::<f64>::identity(n, n);
    let mut p_sigma = DVector::<f64>::zeros(n);
    let mut p_c = DVector::<f64>::zeros(n);
    let mut generation: u64 = 0;

    loop {
        if config.max_iterations.is_some_and(|m| generation >= m) {
            return Ok((mean.as_slice().to_vec(), generation, Termination::IterationLimit));
        }
        if rec.remaining() < st.lambda as u64 {
            // spend what is left on a partial generation, then stop
            let (bd, _) = cov_factor(&cov)?;
            let rest: Vec<Vec<f64>> = (0..rec.remaining()).map(|_| sample(&mean, sigma, &bd, rng).0).collect();
            rec.eval_batch(&rest)?;
            return Ok((mean.as_slice().to_vec(), generation, Termination::BudgetExhausted));
        }

        let (bd, inv_sqrt) = cov_factor(&cov)?;
        let mut points = Vec::with_capacity(st.lambda);
        let mut steps = Vec::with_capacity(st.lambda);
        for _ in 0..st.lambda {
            let (x, y) = sample(&mean, sigma, &bd, rng);
            points.push(x);
            steps.push(y);
        }
        let costs = rec.eval_batch(&points)?;
        let mut order: Vec<usize> = (0..st.lambda).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        generation += 1;

        let mut y_w = DVector::<f64>::zeros(n);
        for (w, &k) in st.weights.iter().zip(&order) {
            y_w.axpy(*w, &steps[k], 1.0);
        }
        mean.axpy(sigma, &y_w, 1.0);

        p_sigma =
            p_sigma * (1.0 - st.c_sigma) + (&inv_sqrt * &y_w) * (st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff).sqrt();
        let ps_norm = p_sigma.norm();
        let decay = 1.0 - (1.0 - st.c_sigma).powi(2 * generation as i32);
        let h_sigma = ps_norm / decay.sqrt() < (1.4 + 2.0 / (n as f64 + 1.0)) * st.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        p_c = p_c * (1.0 - st.c_c) + &y_w * (h * (st.c_c * (2.0 - st.c_c) * st.mu_eff).sqrt());

        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (w, &k) in st.weights.iter().zip(&order) {
            rank_mu.ger(*w, &steps[k], &steps[k], 1.0);
        }
        let keep = 1.0 - st.c_1 - st.c_mu + (1.0 - h) * st.c_1 * st.c_c * (2.0 - st.c_c);
        cov = cov * keep + (&p_c * p_c.transpose()) * st.c_1 + rank_mu * st.c_mu;
        cov = (&cov + cov.transpose()) * 0.5;

        sigma *= ((st.c_sigma / st.d_sigma) * (ps_norm / st.chi_n - 1.0)).exp();
        if sigma < SIGMA_FLOOR {
            return Ok((mean.as_slice().to_vec(), generation, Termination::SigmaCollapse));
        }
        if rec.remaining() == 0 {
            return Ok((mean.as_slice().to_vec(), generation, Termination::BudgetExhausted));
        }
    }
}

/// `B D` and `C^{-1/2} = B D^{-1} B^T` from `C = B D^2 B^T`; fails unless
/// `C` is positive definite.
fn cov_factor(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.min();
    if min.is_nan() || min <= 0.0 || !eig.eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(Error::Optimize(format!("CMA-ES covariance lost positive definiteness (min eigenvalue {min})")));
    }
    let d = eig.eigenvalues.map(f64::sqrt);
    let b = &eig.eigenvectors;
    let bd = b * DMatrix::from_diagonal(&d);
    let inv_sqrt = b * DMatrix::from_diagonal(&d.map(|v| 1.0 / v)) * b.transpose();
    Ok((bd, inv_sqrt))
}

fn sample<R: Rng>(mean: &DVector<f64>, sigma: f64, bd: &DMatrix<f64>, rng: &mut R) -> (Vec<f64>, DVector<f64>) {
    let z = DVector::<f64>::from_fn(mean.len(), |_, _| rng.sample(StandardNormal));
    let y = bd * z;
    let x = mean + &y * sigma;
    (x.as_slice().to_vec(), y)
}
