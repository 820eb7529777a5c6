//! Experiment configuration files.
//!
//! TOML is the primary format; a `.json` file with the same structure is
//! accepted too. Unknown keys are rejected in every section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzFamily, AnsatzSpec};
use crate::engine::{CostKind, ExperimentSpec, InitialStatePrep, ModelSpec, SampledCost};
use crate::error::{Error, Result};
use crate::fock::Configuration;
use crate::measure::Grouping;
use crate::optimize::OptimizerConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzConfig>,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub family: AnsatzFamily,
    #[serde(default = "one")]
    pub n_layers: usize,
    /// interferometer-Kerr only; defaults to free phases
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_bs_phases: Option<bool>,
    /// interferometer-Kerr only; defaults to including rotations
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_rotations: Option<bool>,
}

fn one() -> usize {
    1
}

impl AnsatzConfig {
    pub fn spec(&self, n_sites: usize) -> AnsatzSpec {
        let base = match self.family {
            AnsatzFamily::BsKerr => AnsatzSpec::bs_kerr(n_sites, self.n_layers),
            AnsatzFamily::InterferometerKerr => AnsatzSpec::interferometer_kerr(n_sites, self.n_layers),
        };
        AnsatzSpec {
            zero_bs_phases: self.zero_bs_phases.unwrap_or(base.zero_bs_phases),
            include_rotations: self.include_rotations.unwrap_or(base.include_rotations),
            ..base
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateKind {
    #[default]
    Monomodal,
    Bimodal,
    Explicit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    #[serde(default)]
    pub kind: InitialStateKind,
    /// required for `explicit`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupations: Option<Vec<u32>>,
}

impl InitialStateConfig {
    pub fn prep(&self) -> Result<InitialStatePrep> {
        match (self.kind, &self.occupations) {
            (InitialStateKind::Monomodal, None) => Ok(InitialStatePrep::Monomodal),
            (InitialStateKind::Bimodal, None) => Ok(InitialStatePrep::Bimodal),
            (InitialStateKind::Explicit, Some(occ)) => Ok(InitialStatePrep::Explicit(Configuration(occ.clone()))),
            (InitialStateKind::Explicit, None) => {
                Err(Error::Config("initial_state: explicit kind needs occupations".into()))
            }
            (_, Some(_)) => Err(Error::Config("initial_state: occupations only apply to the explicit kind".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostConfigKind {
    #[default]
    Infidelity,
    EnergyExact,
    EnergySampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default)]
    pub kind: CostConfigKind,
    /// shots per energy estimate; omitted means the infinite-shot limit
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default = "per_edge")]
    pub grouping: Grouping,
}

fn per_edge() -> Grouping {
    Grouping::PerEdge
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig { kind: CostConfigKind::default(), shots: None, grouping: Grouping::PerEdge }
    }
}

impl CostConfig {
    pub fn kind(&self) -> Result<CostKind> {
        match self.kind {
            CostConfigKind::Infidelity | CostConfigKind::EnergyExact if self.shots.is_some() => {
                Err(Error::Config("cost: shots only apply to energy_sampled".into()))
            }
            CostConfigKind::Infidelity => Ok(CostKind::Infidelity),
            CostConfigKind::EnergyExact => Ok(CostKind::EnergyExact),
            CostConfigKind::EnergySampled => {
                Ok(CostKind::EnergySampled(SampledCost { shots: self.shots, grouping: self.grouping }))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "five")]
    pub restarts: usize,
    #[serde(default = "threshold")]
    pub success_threshold: f64,
    /// deepest circuit tried by a layer scan
    #[serde(default = "twelve")]
    pub max_layers: usize,
}

fn five() -> usize {
    5
}

fn twelve() -> usize {
    12
}

fn threshold() -> f64 {
    0.99
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { restarts: 5, success_threshold: 0.99, max_layers: 12 }
    }
}

/// Grid axes; an empty axis keeps the single value from `model`/`ansatz`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_bosons: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_layers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out() }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        parsed.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Semantic checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        self.model.resolved_interaction()?;
        self.model.build().map_err(|e| Error::Config(format!("model: {e}")))?;
        self.initial_state.prep()?;
        self.cost.kind()?;
        self.optimizer.validate()?;
        if self.run.max_layers == 0 {
            return Err(Error::Config("run: max_layers must be positive".into()));
        }
        if self.sweep.n_layers.contains(&0) {
            return Err(Error::Config("sweep: n_layers entries must be positive".into()));
        }
        for spec in self.experiment_specs_unchecked()? {
            spec.validate().map_err(|e| match e {
                Error::Config(msg) => Error::Config(msg),
                other => Error::Config(other.to_string()),
            })?;
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        if self.sweep.lambdas.is_empty() {
            Ok(vec![self.model.resolved_lambda()?])
        } else {
            Ok(self.sweep.lambdas.clone())
        }
    }

    pub fn boson_numbers(&self) -> Vec<usize> {
        if self.sweep.n_bosons.is_empty() {
            vec![self.model.n_bosons]
        } else {
            self.sweep.n_bosons.clone()
        }
    }

    /// Model specs over the `n_bosons` x `lambdas` grid.
    pub fn model_grid(&self) -> Result<Vec<ModelSpec>> {
        let lambdas = self.lambdas()?;
        let sweep_lambda = !self.sweep.lambdas.is_empty();
        let mut out = Vec::new();
        for n_b in self.boson_numbers() {
            for &lambda in &lambdas {
                let m = self.model.with_bosons(n_b);
                out.push(if sweep_lambda || self.model.lambda.is_some() { m.with_lambda(lambda) } else { m });
            }
        }
        Ok(out)
    }

    /// One spec per grid cell (`n_bosons` x `lambdas` x `n_layers`).
    pub fn experiment_specs(&self) -> Result<Vec<ExperimentSpec>> {
        self.validate()?;
        self.experiment_specs_unchecked()
    }

    fn experiment_specs_unchecked(&self) -> Result<Vec<ExperimentSpec>> {
        let Some(ansatz) = &self.ansatz else { return Ok(Vec::new()) };
        let layers = if self.sweep.n_layers.is_empty() { vec![ansatz.n_layers] } else { self.sweep.n_layers.clone() };
        let mut specs = Vec::new();
        for model in self.model_grid()? {
            for &n_layers in &layers {
                specs.push(self.spec_for(&model, n_layers)?);
            }
        }
        Ok(specs)
    }

    /// Spec for one model at one depth.
    pub fn spec_for(&self, model: &ModelSpec, n_layers: usize) -> Result<ExperimentSpec> {
        let ansatz = self.ansatz.as_ref().ok_or_else(|| Error::Config("missing [ansatz] section".into()))?;
        Ok(ExperimentSpec {
            ansatz: ansatz.spec(model.n_sites).with_layers(n_layers),
            model: model.clone(),
            initial_state: self.initial_state.prep()?,
            cost: self.cost.kind()?,
            optimizer: self.optimizer.clone(),
            restarts: self.run.restarts,
            success_threshold: self.run.success_threshold,
            seed: self.seed,
        })
    }
}
