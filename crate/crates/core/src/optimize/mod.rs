//! Classical outer-loop optimizers.
//!
//! Both optimizers treat the cost as a black box and count every call
//! against `max_evaluations`, which is never exceeded.

mod cmaes;
mod lbfgs;

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng;

pub use cmaes::default_population;

/// Stream of a seed reserved for parameter initialization.
const INIT_STREAM: u64 = 1;
/// Stream of a seed reserved for the optimizer's own draws.
const OPTIMIZER_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    QuasiNewton,
    CmaEs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_evaluations: u64,
    /// quasi-Newton iterations or CMA-ES generations
    pub max_iterations: Option<u64>,
    /// initial parameters are uniform in `[-init_range, init_range]`
    pub init_range: f64,
    pub fd_step: f64,
    pub sigma0: f64,
    pub tolerance: f64,
    /// CMA-ES population; the default is `4 + floor(3 ln dim)`
    pub population: Option<usize>,
    /// L-BFGS history length
    pub memory: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::QuasiNewton,
            max_evaluations: 20_000,
            max_iterations: None,
            init_range: 0.05,
            fd_step: 1e-6,
            sigma0: 0.05,
            tolerance: 1e-12,
            population: None,
            memory: 10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn quasi_newton(max_evaluations: u64) -> Self {
        OptimizerConfig { max_evaluations, ..Self::default() }
    }

    pub fn cma_es(max_evaluations: u64, sigma0: f64) -> Self {
        OptimizerConfig { kind: OptimizerKind::CmaEs, max_evaluations, sigma0, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init_range(mut self, range: f64) -> Self {
        self.init_range = range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("optimizer: {what}")));
        if self.max_evaluations == 0 {
            return bad("max_evaluations must be positive");
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations must be positive");
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return bad("init_range must be positive");
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad("fd_step must be positive");
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0 must be positive");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be non-negative");
        }
        if self.population.is_some_and(|p| p < 2) {
            return bad("population must be at least 2");
        }
        if self.memory == 0 {
            return bad("memory must be positive");
        }
        Ok(())
    }
}

/// A cost function to be minimized.
///
/// `index` is the zero-based evaluation counter, which stochastic costs use
/// to address their random stream so that results do not depend on
/// evaluation order.
pub trait Objective: Sync {
    fn evaluate(&self, params: &[f64], index: u64) -> f64;

    /// Whether population members may be evaluated concurrently.
    fn concurrent(&self) -> bool {
        false
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for F {
    fn evaluate(&self, params: &[f64], _index: u64) -> f64 {
        self(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BudgetExhausted,
    IterationLimit,
    /// cost change below tolerance
    Converged,
    SigmaCollapse,
    LineSearchFailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params_hash: u64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub evaluations: Vec<Evaluation>,
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    /// the optimizer's own final estimate: the last iterate for
    /// quasi-Newton, the distribution mean for CMA-ES
    pub final_params: Vec<f64>,
    pub iterations: u64,
    pub terminated: Termination,
}

impl OptimizationTrace {
    pub fn n_evaluations(&self) -> u64 {
        self.evaluations.len() as u64
    }

    pub fn costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.evaluations.iter().map(|e| e.cost)
    }

    /// Running minimum of the recorded costs.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.costs()
            .scan(f64::INFINITY, |best, c| {
                *best = best.min(c);
                Some(*best)
            })
            .collect()
    }

    /// CSV rows `evaluation,cost,params_hash`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "evaluation,cost,params_hash")?;
        for (i, e) in self.evaluations.iter().enumerate() {
            writeln!(out, "{i},{:e},{:016x}", e.cost, e.params_hash)?;
        }
        Ok(())
    }
}

/// FNV-1a over the bit patterns of a parameter vector.
pub fn params_hash(params: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in params {
        for b in x.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Uniform i.i.d. parameters in `[-range, range]`.
pub fn init_params(dim: usize, range: f64, seed: u64) -> Result<Vec<f64>> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(domain("initialization range must be positive"));
    }
    let mut rng = rng::stream(seed, INIT_STREAM);
    Ok((0..dim).map(|_| rng.random_range(-range..=range)).collect())
}

/// Minimizes `objective` from parameters drawn by [`init_params`].
pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    dim: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    let x0 = init_params(dim, config.init_range, config.seed)?;
    minimize_from(objective, x0, config)
}

/// Minimizes `objective` starting at `x0`.
pub fn minimize_from<O: Objective + ?Sized>(
    objective: &O,
    x0: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    config.validate()?;
    if x0.is_empty() {
        return Err(domain("cannot optimize over zero parameters"));
    }
    let mut rec = Recorder::new(objective, config.max_evaluations, x0.len());
    let (final_params, iterations, terminated) = match config.kind {
        OptimizerKind::QuasiNewton => lbfgs::run(&mut rec, x0, config)?,
        OptimizerKind::CmaEs => cmaes::run(&mut rec, x0, config, &mut rng::stream(config.seed, OPTIMIZER_STREAM))?,
    };
    let Recorder { evaluations, best_params, best_cost, .. } = rec;
    Ok(OptimizationTrace { evaluations, best_params, best_cost, final_params, iterations, terminated })
}

/// Budget-enforcing evaluation log shared by the optimizers.
pub(crate) struct Recorder<'a, O: Objective + ?Sized> {
    objective: &'a O,
    max_evaluations: u64,
    evaluations: Vec<Evaluation>,
    best_params: Vec<f64>,
    best_cost: f64,
}

impl<'a, O: Objective + ?Sized> Recorder<'a, O> {
    fn new(objective: &'a O, max_evaluations: u64, dim: usize) -> Self {
        Recorder {
            objective,
            max_evaluations,
            evaluations: Vec::new(),
            best_params: vec![0.0; dim],
            best_cost: f64::INFINITY,
        }
    }

    pub(crate) fn remaining(&self) -> u64 {
        self.max_evaluations - self.evaluations.len() as u64
    }

    fn record(&mut self, x: &[f64], cost: f64) -> Result<f64> {
        let index = self.evaluations.len();
        if !cost.is_finite() {
            return Err(Error::Optimize(format!("cost returned {cost} at evaluation {index} for parameters {x:?}")));
        }
        self.evaluations.push(Evaluation { params_hash: params_hash(x), cost });
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_params.copy_from_slice(x);
        }
        Ok(cost)
    }

    /// `None` once the budget is spent.
    pub(crate) fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.remaining() == 0 {
            return Ok(None);
        }
        let cost = self.objective.evaluate(x, self.evaluations.len() as u64);
        self.record(x, cost).map(Some)
    }

    /// Evaluates as many points as the budget allows, in order.
    pub(crate) fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = xs.len().min(self.remaining() as usize);
        let start = self.evaluations.len() as u64;
        let objective = self.objective;
        let costs: Vec<f64> = if objective.concurrent() {
            xs[..n].par_iter().enumerate().map(|(i, x)| objective.evaluate(x, start + i as u64)).collect()
        } else {
            xs[..n].iter().enumerate().map(|(i, x)| objective.evaluate(x, start + i as u64)).collect()
        };
        xs[..n].iter().zip(costs).map(|(x, c)| self.record(x, c)).collect()
    }
}
