//! Limited-memory BFGS with central finite-difference gradients and a
//! backtracking Armijo line search.

use std::collections::VecDeque;

use super::{Objective, OptimizerConfig, Recorder, Termination};
use crate::error::Result;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central-difference gradient; `None` if the budget ran out.
fn gradient<O: Objective + ?Sized>(rec: &mut Recorder<'_, O>, x: &[f64], h: f64) -> Result<Option<Vec<f64>>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let Some(fp) = rec.eval(&probe)? else { return Ok(None) };
        probe[i] = x[i] - h;
        let Some(fm) = rec.eval(&probe)? else { return Ok(None) };
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(Some(g))
}

/// Two-loop recursion: returns `-H g`.
fn direction(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

pub(super) fn run<O: Objective + ?Sized>(
    rec: &mut Recorder<'_, O>,
    mut x: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<(Vec<f64>, u64, Termination)> {
    let h = config.fd_step;
    let Some(mut f) = rec.eval(&x)? else { return Ok((x, 0, Termination::BudgetExhausted)) };
    let Some(mut g) = gradient(rec, &x, h)? else { return Ok((x, 0, Termination::BudgetExhausted)) };
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;

    loop {
        if config.max_iterations.is_some_and(|m| iterations >= m) {
            return Ok((x, iterations, Termination::IterationLimit));
        }
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            return Ok((x, iterations, Termination::Converged));
        }
        let mut d = direction(&g, &history);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut alpha = if history.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut accepted = None;
        let mut trial = vec![0.0; x.len()];
        for _ in 0..MAX_BACKTRACKS {
            trial.iter_mut().zip(x.iter().zip(&d)).for_each(|(t, (xi, di))| *t = xi + alpha * di);
            let Some(ft) = rec.eval(&trial)? else {
                return Ok((x, iterations, Termination::BudgetExhausted));
            };
            if ft <= f + ARMIJO * alpha * slope {
                accepted = Some(ft);
                break;
            }
            // minimizer of the quadratic through f, slope and ft, safeguarded
            let quad = -slope * alpha * alpha / (2.0 * (ft - f - slope * alpha));
            alpha = if quad.is_finite() { quad.clamp(0.1 * alpha, 0.5 * alpha) } else { 0.5 * alpha };
        }
        let Some(f_new) = accepted else {
            return Ok((x, iterations, Termination::LineSearchFailed));
        };
        iterations += 1;

        let Some(g_new) = gradient(rec, &trial, h)? else {
            return Ok((trial, iterations, Termination::BudgetExhausted));
        };
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let change = (f - f_new).abs();
        x = trial;
        f = f_new;
        g = g_new;
        if change < config.tolerance {
            return Ok((x, iterations, Termination::Converged));
        }
    }
}
