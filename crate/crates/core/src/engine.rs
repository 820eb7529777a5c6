//! Experiment drivers: infidelity-VQA, ideal VQE, sampled VQE and layer
//! scans, plus the ED sweeps behind the ground-state figures.

use std::io::{self, Write};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, CircuitTemplate};
use crate::error::{domain, Error, Result};
use crate::fock::{Configuration, FockBasis};
use crate::gates::Simulator;
use crate::measure::{EnergyEstimator, Grouping, Sampling, ShotPlan};
use crate::model::{build_hamiltonian, entropy, ground_state, ipr, BHModel, GroundState, SparseHamiltonian, Topology};
use crate::optimize::{minimize, Objective, OptimizationTrace, OptimizerConfig};
use crate::rng;
use crate::state::StateVector;

/// Offset separating sampling seeds from optimizer seeds of the same run.
const SAMPLING_SEED_INDEX: u64 = 1 << 32;

/// Model parameters as they appear in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n_sites: usize,
    pub n_bosons: usize,
    #[serde(default = "unit_hopping")]
    pub hopping: f64,
    /// `U`; exclusive with `lambda`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<f64>,
    /// `N_B U / J`; exclusive with `interaction`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chemical_potential: Option<Vec<f64>>,
    /// symmetric `V` with zero diagonal
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_matrix: Option<Vec<Vec<f64>>>,
}

fn unit_hopping() -> f64 {
    1.0
}

fn default_topology() -> Topology {
    Topology::Ring
}

impl ModelSpec {
    pub fn new(n_sites: usize, n_bosons: usize, lambda: f64) -> Self {
        ModelSpec {
            n_sites,
            n_bosons,
            hopping: 1.0,
            interaction: None,
            lambda: Some(lambda),
            topology: if n_sites == 2 { Topology::Dimer } else { Topology::Ring },
            chemical_potential: None,
            coupling_matrix: None,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ModelSpec { lambda: Some(lambda), interaction: None, ..self.clone() }
    }

    pub fn with_bosons(&self, n_bosons: usize) -> Self {
        ModelSpec { n_bosons, ..self.clone() }
    }

    /// `U` resolved from either form.
    pub fn resolved_interaction(&self) -> Result<f64> {
        match (self.interaction, self.lambda) {
            (Some(u), None) => Ok(u),
            (None, Some(l)) if self.n_bosons == 0 => {
                if l == 0.0 {
                    Ok(0.0)
                } else {
                    Err(domain("lambda is undefined without bosons"))
                }
            }
            (None, Some(l)) => Ok(l * self.hopping / self.n_bosons as f64),
            (Some(_), Some(_)) => Err(Error::Config("model: give either interaction or lambda, not both".into())),
            (None, None) => Err(Error::Config("model: one of interaction or lambda is required".into())),
        }
    }

    pub fn resolved_lambda(&self) -> Result<f64> {
        Ok(self.n_bosons as f64 * self.resolved_interaction()? / self.hopping)
    }

    pub fn build(&self) -> Result<BHModel> {
        let u = self.resolved_interaction()?;
        let edges = self.topology.edges(self.n_sites)?;
        let mut model = BHModel::new(self.n_sites, self.n_bosons, self.hopping, u, edges)?;
        if let Some(mu) = &self.chemical_potential {
            model = model.with_chemical_potential(mu.clone())?;
        }
        if let Some(v) = &self.coupling_matrix {
            model = model.with_coupling_matrix(v)?;
        }
        Ok(model)
    }
}

/// Photon layout fed into the circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStatePrep {
    /// all photons in mode 0
    Monomodal,
    /// photons split over modes (0, 1) for a dimer, (0, 2) otherwise; for
    /// odd totals mode 0 takes the larger half
    Bimodal,
    Explicit(Configuration),
}

impl InitialStatePrep {
    pub fn configuration(&self, n_sites: usize, n_bosons: usize) -> Result<Configuration> {
        let mut occ = vec![0u32; n_sites];
        match self {
            InitialStatePrep::Monomodal => occ[0] = n_bosons as u32,
            InitialStatePrep::Bimodal => {
                let second = match n_sites {
                    0 | 1 => return Err(domain("bimodal preparation needs at least 2 modes")),
                    2 => 1,
                    _ => 2,
                };
                occ[0] = n_bosons.div_ceil(2) as u32;
                occ[second] = (n_bosons / 2) as u32;
            }
            InitialStatePrep::Explicit(c) => {
                if c.n_modes() != n_sites || c.total() as usize != n_bosons {
                    return Err(domain(format!(
                        "initial configuration {c} does not hold {n_bosons} bosons on {n_sites} modes"
                    )));
                }
                return Ok(c.clone());
            }
        }
        Ok(Configuration(occ))
    }
}

/// Sampled energy cost; `shots: None` is the infinite-shot limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledCost {
    pub shots: Option<u64>,
    #[serde(default = "default_grouping")]
    pub grouping: Grouping,
}

fn default_grouping() -> Grouping {
    Grouping::PerEdge
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Infidelity,
    EnergyExact,
    EnergySampled(SampledCost),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub ansatz: AnsatzSpec,
    pub initial_state: InitialStatePrep,
    pub cost: CostKind,
    /// `optimizer.seed` is replaced by a per-restart seed derived from `seed`
    pub optimizer: OptimizerConfig,
    pub restarts: usize,
    pub success_threshold: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec, ansatz: AnsatzSpec, initial_state: InitialStatePrep, cost: CostKind) -> Self {
        ExperimentSpec {
            model,
            ansatz,
            initial_state,
            cost,
            optimizer: OptimizerConfig::default(),
            restarts: 5,
            success_threshold: 0.99,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ansatz.n_sites != self.model.n_sites {
            return Err(Error::Config(format!(
                "ansatz acts on {} modes but the model has {} sites",
                self.ansatz.n_sites, self.model.n_sites
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold <= 1.0) {
            return Err(Error::Config("success_threshold must lie in (0, 1]".into()));
        }
        if let CostKind::EnergySampled(SampledCost { shots: Some(0), .. }) = self.cost {
            return Err(Error::Config("shots must be positive".into()));
        }
        self.initial_state.configuration(self.model.n_sites, self.model.n_bosons)?;
        self.ansatz.validate()?;
        self.optimizer.validate()
    }

    /// Seed of restart `index`.
    pub fn restart_seed(&self, index: usize) -> u64 {
        rng::child_seed(self.seed, index as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// graded parameters
    pub params: Vec<f64>,
    pub fidelity: f64,
    pub infidelity: f64,
    pub energy: f64,
    pub ground_energy: f64,
    pub delta_e: f64,
    pub n_layers: usize,
    pub shots_per_evaluation: Option<u64>,
    pub restart: usize,
    pub seed: u64,
    pub trace: OptimizationTrace,
    pub wall_time_s: f64,
}

/// Best run over restarts, with the fidelity of every restart attempted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub best: RunResult,
    pub restart_fidelities: Vec<f64>,
}

/// `|<a|b>|^2`, clamped into `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Fidelity against the ground subspace: the squared projection norm onto
/// both states of a degenerate pair, the plain fidelity otherwise.
pub fn ground_fidelity(ground: &GroundState, state: &StateVector) -> Result<f64> {
    let mut f = 0.0;
    for g in ground.subspace() {
        f += g.inner(state)?.norm_sqr();
    }
    Ok(f.min(1.0))
}

/// Everything about a spec that does not depend on the circuit depth.
#[derive(Debug)]
pub struct Prepared {
    model: BHModel,
    hamiltonian: SparseHamiltonian,
    ground: GroundState,
    simulator: Arc<Simulator>,
    initial: StateVector,
}

impl Prepared {
    pub fn new(model: &ModelSpec, initial_state: &InitialStatePrep) -> Result<Self> {
        let model = model.build()?;
        let basis = Arc::new(model.basis()?);
        let hamiltonian = build_hamiltonian(&model, basis.clone())?;
        let ground = ground_state(&hamiltonian)?;
        let config = initial_state.configuration(model.n_sites(), model.n_bosons())?;
        let initial = StateVector::fock(basis.clone(), config.occupations())?;
        let simulator = Arc::new(Simulator::new(basis));
        Ok(Prepared { model, hamiltonian, ground, simulator, initial })
    }

    pub fn model(&self) -> &BHModel {
        &self.model
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.simulator.basis()
    }

    pub fn hamiltonian(&self) -> &SparseHamiltonian {
        &self.hamiltonian
    }

    pub fn ground(&self) -> &GroundState {
        &self.ground
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn simulator(&self) -> &Arc<Simulator> {
        &self.simulator
    }

    /// `U(theta) |initial>`.
    pub fn trial_state(&self, template: &CircuitTemplate, params: &[f64]) -> Result<StateVector> {
        let circuit = template.bind(params)?;
        self.simulator.run(&self.initial, &circuit)
    }

    pub fn energy(&self, state: &StateVector) -> f64 {
        self.hamiltonian.expectation(state.amplitudes())
    }
}

struct CircuitCost<'a> {
    prep: &'a Prepared,
    template: &'a CircuitTemplate,
    eval: CostEval,
}

enum CostEval {
    Infidelity,
    Energy,
    Sampled { estimator: EnergyEstimator, seed: u64 },
}

impl CircuitCost<'_> {
    fn try_evaluate(&self, params: &[f64], index: u64) -> Result<f64> {
        let state = self.prep.trial_state(self.template, params)?;
        match &self.eval {
            CostEval::Infidelity => Ok(1.0 - ground_fidelity(&self.prep.ground, &state)?),
            CostEval::Energy => Ok(self.prep.energy(&state)),
            CostEval::Sampled { estimator, seed } => {
                Ok(estimator.estimate(&state, &mut rng::stream(*seed, index))?.value)
            }
        }
    }
}

impl Objective for CircuitCost<'_> {
    fn evaluate(&self, params: &[f64], index: u64) -> f64 {
        // a failed evaluation surfaces as a non-finite cost, which aborts the run
        self.try_evaluate(params, index).unwrap_or(f64::NAN)
    }

    fn concurrent(&self) -> bool {
        true
    }
}

/// One optimization from one seed.
pub fn run_single(
    prep: &Prepared,
    template: &CircuitTemplate,
    spec: &ExperimentSpec,
    restart: usize,
) -> Result<RunResult> {
    let start = Instant::now();
    let seed = spec.restart_seed(restart);
    let mut shots_per_evaluation = None;
    let eval = match &spec.cost {
        CostKind::Infidelity => CostEval::Infidelity,
        CostKind::EnergyExact | CostKind::EnergySampled(SampledCost { shots: None, .. }) => CostEval::Energy,
        CostKind::EnergySampled(SampledCost { shots: Some(shots), grouping }) => {
            shots_per_evaluation = Some(*shots);
            let plan = ShotPlan::new(&prep.model, *shots, *grouping)?;
            let estimator = EnergyEstimator::new(prep.model.clone(), Sampling::Shots(plan), prep.simulator.clone())?;
            CostEval::Sampled { estimator, seed: rng::child_seed(seed, SAMPLING_SEED_INDEX) }
        }
    };
    let noisy = matches!(eval, CostEval::Sampled { .. });
    let cost = CircuitCost { prep, template, eval };
    let optimizer = OptimizerConfig { seed, ..spec.optimizer.clone() };
    let trace = minimize(&cost, template.n_params(), &optimizer)?;

    // noisy runs are graded at the optimizer's own estimate, not at the
    // luckiest sample
    let params = if noisy { trace.final_params.clone() } else { trace.best_params.clone() };
    let state = prep.trial_state(template, &params)?;
    let fidelity = ground_fidelity(&prep.ground, &state)?;
    let energy = prep.energy(&state);
    Ok(RunResult {
        params,
        fidelity,
        infidelity: 1.0 - fidelity,
        energy,
        ground_energy: prep.ground.energy,
        delta_e: energy - prep.ground.energy,
        n_layers: template.spec().n_layers,
        shots_per_evaluation,
        restart,
        seed,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn better(a: &RunResult, b: &RunResult, cost: &CostKind) -> bool {
    match cost {
        CostKind::Infidelity => a.infidelity < b.infidelity,
        _ => a.energy < b.energy,
    }
}

/// Runs the spec's restarts and keeps the best. With `stop_at_threshold`,
/// the first restart in index order whose fidelity reaches the threshold
/// is returned instead; either way the answer does not depend on the
/// number of worker threads.
pub fn run_restarts(
    prep: &Prepared,
    template: &CircuitTemplate,
    spec: &ExperimentSpec,
    stop_at_threshold: bool,
) -> Result<ExperimentResult> {
    let chunk = if stop_at_threshold { rayon::current_num_threads().max(1) } else { spec.restarts };
    let mut done: Vec<RunResult> = Vec::with_capacity(spec.restarts);
    let mut next = 0;
    while next < spec.restarts {
        let end = (next + chunk).min(spec.restarts);
        let batch: Vec<RunResult> =
            (next..end).into_par_iter().map(|r| run_single(prep, template, spec, r)).collect::<Result<_>>()?;
        done.extend(batch);
        next = end;
        if stop_at_threshold {
            if let Some(i) = done.iter().position(|r| r.fidelity >= spec.success_threshold) {
                done.truncate(i + 1);
                let restart_fidelities = done.iter().map(|r| r.fidelity).collect();
                return Ok(ExperimentResult { best: done.swap_remove(i), restart_fidelities });
            }
        }
    }
    let restart_fidelities = done.iter().map(|r| r.fidelity).collect();
    let mut best = done.swap_remove(0);
    for r in done {
        if better(&r, &best, &spec.cost) {
            best = r;
        }
    }
    Ok(ExperimentResult { best, restart_fidelities })
}

fn run_kind(spec: &ExperimentSpec, check: impl Fn(&CostKind) -> bool, name: &str) -> Result<ExperimentResult> {
    spec.validate()?;
    if !check(&spec.cost) {
        return Err(Error::Config(format!("{name} needs a matching cost kind, got {:?}", spec.cost)));
    }
    let prep = Prepared::new(&spec.model, &spec.initial_state)?;
    let template = spec.ansatz.build()?;
    run_restarts(&prep, &template, spec, false)
}

/// Minimizes the infidelity against the ED ground state.
pub fn run_vqa_infidelity(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_kind(spec, |c| matches!(c, CostKind::Infidelity), "run_vqa_infidelity")
}

/// Minimizes the exact energy of the simulated state.
pub fn run_vqe_exact(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_kind(spec, |c| matches!(c, CostKind::EnergyExact), "run_vqe_exact")
}

/// Minimizes photon-counting energy estimates; graded post hoc exactly.
pub fn run_vqe_sampled(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_kind(spec, |c| matches!(c, CostKind::EnergySampled(_)), "run_vqe_sampled")
}

/// Dispatches on the spec's cost kind.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    match spec.cost {
        CostKind::Infidelity => run_vqa_infidelity(spec),
        CostKind::EnergyExact => run_vqe_exact(spec),
        CostKind::EnergySampled(_) => run_vqe_sampled(spec),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerScan {
    /// smallest depth meeting the threshold; `None` if no depth did
    pub minimal_layers: Option<usize>,
    /// best fidelity reached at each depth tried, in order
    pub fidelities: Vec<(usize, f64)>,
    pub best: Option<RunResult>,
}

/// Smallest `N_L` in `1..=max_layers` whose restarts reach the success
/// threshold.
pub fn scan_layers(spec: &ExperimentSpec, max_layers: usize) -> Result<LayerScan> {
    spec.validate()?;
    let prep = Prepared::new(&spec.model, &spec.initial_state)?;
    let mut fidelities = Vec::new();
    for n_layers in 1..=max_layers {
        let template = spec.ansatz.with_layers(n_layers).build()?;
        let result = run_restarts(&prep, &template, spec, true)?;
        fidelities.push((n_layers, result.best.fidelity));
        if result.best.fidelity >= spec.success_threshold {
            return Ok(LayerScan { minimal_layers: Some(n_layers), fidelities, best: Some(result.best) });
        }
    }
    Ok(LayerScan { minimal_layers: None, fidelities, best: None })
}

/// One row of a ground-state sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdRow {
    pub n_bosons: usize,
    pub lambda: f64,
    pub energy: f64,
    pub ipr: f64,
    /// single-site entropy of mode 0
    pub entropy: f64,
    pub gap: Option<f64>,
}

/// Ground-state energy, IPR and entropy across correlation strengths.
pub fn ed_sweep(model: &ModelSpec, lambdas: &[f64]) -> Result<Vec<EdRow>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let m = model.with_lambda(lambda).build()?;
            let h = build_hamiltonian(&m, Arc::new(m.basis()?))?;
            let g = ground_state(&h)?;
            Ok(EdRow {
                n_bosons: model.n_bosons,
                lambda,
                energy: g.energy,
                ipr: ipr(&g.vector)?,
                entropy: entropy(&g.vector, 0)?,
                gap: g.gap(),
            })
        })
        .collect()
}

pub const NOT_FOUND: &str = "NOT_FOUND";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub n_sites: usize,
    pub n_bosons: usize,
    pub n_layers: usize,
    pub lambda: f64,
    pub variant: String,
    pub fidelity: f64,
    pub delta_e: f64,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl GridRow {
    pub fn from_run(spec: &ExperimentSpec, run: &RunResult) -> Result<Self> {
        Ok(GridRow {
            n_sites: spec.model.n_sites,
            n_bosons: spec.model.n_bosons,
            n_layers: run.n_layers,
            lambda: spec.model.resolved_lambda()?,
            variant: spec.ansatz.variant_label(),
            fidelity: run.fidelity,
            delta_e: run.delta_e,
            shots: run.shots_per_evaluation,
            seed: run.seed,
        })
    }
}

/// Run grid as CSV; infinite-shot cells show `inf` in the shots column.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n_sites,n_bosons,n_layers,lambda,variant,fidelity,delta_e,shots,seed")?;
    for r in rows {
        let shots = r.shots.map_or_else(|| "inf".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{:.12},{:.6e},{shots},{}",
            r.n_sites, r.n_bosons, r.n_layers, r.lambda, r.variant, r.fidelity, r.delta_e, r.seed
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n_sites: usize,
    pub n_bosons: usize,
    pub lambda: f64,
    pub variant: String,
    pub minimal_layers: Option<usize>,
    /// gates in the minimal circuit
    pub gate_count: Option<usize>,
    pub fidelity: Option<f64>,
}

impl ScanRow {
    pub fn from_scan(spec: &ExperimentSpec, scan: &LayerScan) -> Result<Self> {
        Ok(ScanRow {
            n_sites: spec.model.n_sites,
            n_bosons: spec.model.n_bosons,
            lambda: spec.model.resolved_lambda()?,
            variant: spec.ansatz.variant_label(),
            minimal_layers: scan.minimal_layers,
            gate_count: scan.minimal_layers.map(|l| spec.ansatz.with_layers(l).gate_count()),
            fidelity: scan.best.as_ref().map(|b| b.fidelity),
        })
    }
}

/// Layer-scan CSV; depths that were never reached read `NOT_FOUND`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n_sites,n_bosons,lambda,variant,minimal_layers,gate_count,fidelity")?;
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_else(|| NOT_FOUND.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n_sites,
            r.n_bosons,
            r.lambda,
            r.variant,
            opt(r.minimal_layers.map(|v| v.to_string())),
            opt(r.gate_count.map(|v| v.to_string())),
            opt(r.fidelity.map(|v| format!("{v:.12}"))),
        )?;
    }
    Ok(())
}

/// Ground-state sweep CSV.
pub fn write_ed_csv<W: Write>(rows: &[EdRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n_bosons,lambda,energy,ipr,entropy")?;
    for r in rows {
        writeln!(out, "{},{},{:.15e},{:.15e},{:.15e}", r.n_bosons, r.lambda, r.energy, r.ipr, r.entropy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bimodal_layouts() {
        let c = |n_s, n_b| InitialStatePrep::Bimodal.configuration(n_s, n_b).unwrap().0;
        assert_eq!(c(2, 8), vec![4, 4]);
        assert_eq!(c(2, 5), vec![3, 2]);
        assert_eq!(c(3, 4), vec![2, 0, 2]);
        assert_eq!(c(3, 7), vec![4, 0, 3]);
        assert_eq!(c(4, 3), vec![2, 0, 1, 0]);
        assert_eq!(c(4, 6), vec![3, 0, 3, 0]);
        let m = InitialStatePrep::Monomodal.configuration(3, 5).unwrap();
        assert_eq!(m.0, vec![5, 0, 0]);
        assert!(InitialStatePrep::Explicit(Configuration(vec![1, 1])).configuration(2, 3).is_err());
    }

    #[test]
    fn model_spec_resolution() {
        let m = ModelSpec::new(2, 4, 3.0);
        assert_eq!(m.resolved_interaction().unwrap(), 0.75);
        let mut both = m.clone();
        both.interaction = Some(1.0);
        assert!(matches!(both.build(), Err(Error::Config(_))));
    }

    #[test]
    fn fidelity_basics() {
        let b = Arc::new(FockBasis::new(2, 2).unwrap());
        let a = StateVector::fock(b.clone(), &[2, 0]).unwrap();
        let c = StateVector::fock(b, &[0, 2]).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &c).unwrap(), 0.0);
        assert!((fidelity(&a, &a.clone().with_global_phase(0.7)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scan_csv_sentinel() {
        let rows = [ScanRow {
            n_sites: 2,
            n_bosons: 4,
            lambda: 10.0,
            variant: "bs_kerr".into(),
            minimal_layers: None,
            gate_count: None,
            fidelity: None,
        }];
        let mut out = Vec::new();
        write_scan_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.ends_with("2,4,10,bs_kerr,NOT_FOUND,NOT_FOUND,NOT_FOUND\n"));
    }

    #[test]
    fn dimer_single_boson_vqe() {
        let mut spec = ExperimentSpec::new(
            ModelSpec::new(2, 1, 1.0),
            AnsatzSpec::bs_kerr(2, 1),
            InitialStatePrep::Monomodal,
            CostKind::EnergyExact,
        );
        spec.restarts = 1;
        spec.optimizer = OptimizerConfig::quasi_newton(500);
        let r = run_vqe_exact(&spec).unwrap().best;
        assert!(r.delta_e < 1e-8 && r.delta_e > -1e-9, "{}", r.delta_e);
        assert!((r.fidelity + r.infidelity - 1.0).abs() == 0.0);
    }
}
