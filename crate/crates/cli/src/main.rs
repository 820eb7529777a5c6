use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use photonic_bh::config::{CostConfigKind, ExperimentConfig};
use photonic_bh::engine::{self, GridRow, ScanRow};
use photonic_bh::model::{build_hamiltonian, ground_state};
use photonic_bh::Error;
use serde::Serialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "photonic-bh", version, about = "Attractive Bose-Hubbard ground states on photonic circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML, or JSON with a .json extension)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for independent runs
    #[arg(long, global = true, env = "PHOTONIC_BH_THREADS")]
    threads: Option<usize>,

    /// Override shots per energy estimate (sampled costs only)
    #[arg(long, global = true)]
    shots: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Exact ground states and a lambda sweep of energy, IPR and entropy
    Ed,
    /// Minimal circuit depth reaching the success threshold
    Scan,
    /// Noiseless variational runs (infidelity or exact energy cost)
    Vqe,
    /// Variational runs on photon-counting energy estimates
    VqeSampled,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = resolve_config(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    fs::create_dir_all(&config.output.dir)?;
    let out = Output::new(&config)?;
    match cli.command {
        Command::Ed => cmd_ed(&config, &out),
        Command::Scan => cmd_scan(&config, &out),
        Command::Vqe => cmd_vqe(&config, &out, false),
        Command::VqeSampled => cmd_vqe(&config, &out, true),
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(shots) = cli.shots {
        if config.cost.kind != CostConfigKind::EnergySampled {
            return Err(Failure::Config("--shots applies only to an energy_sampled cost".into()));
        }
        config.cost.shots = Some(shots);
    }
    config.validate()?;
    Ok(config)
}

/// Writes outputs that carry the resolved config and seed.
struct Output {
    dir: PathBuf,
    config: ExperimentConfig,
    header: String,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    seed: u64,
    result: T,
}

impl Output {
    fn new(config: &ExperimentConfig) -> Result<Self, Failure> {
        let mut header = String::new();
        for line in config.to_toml_string()?.lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        header.push_str(&format!("# resolved seed: {}\n", config.seed));
        Ok(Output { dir: config.output.dir.clone(), config: config.clone(), header })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        w.write_all(self.header.as_bytes())?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, result: T) -> Result<(), Failure> {
        let doc = Document { config: &self.config, seed: self.config.seed, result };
        let w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(w, &doc).map_err(|e| Failure::Runtime(e.to_string()))
    }
}

#[derive(Serialize)]
struct GroundStateRecord {
    n_sites: usize,
    n_bosons: usize,
    lambda: f64,
    energy: f64,
    first_excited: Option<f64>,
    degenerate: bool,
    residual: f64,
    /// `[occupations, re, im]`
    amplitudes: Vec<(Vec<u32>, f64, f64)>,
}

fn cmd_ed(config: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    let mut states = Vec::new();
    for n_b in config.boson_numbers() {
        let spec = config.model.with_bosons(n_b);
        let model = spec.build()?;
        let basis = Arc::new(model.basis()?);
        let g = ground_state(&build_hamiltonian(&model, basis.clone())?)?;
        let amplitudes = basis.iter().zip(g.vector.amplitudes()).map(|(c, a)| (c.to_vec(), a.re, a.im)).collect();
        states.push(GroundStateRecord {
            n_sites: model.n_sites(),
            n_bosons: n_b,
            lambda: spec.resolved_lambda()?,
            energy: g.energy,
            first_excited: g.first_excited,
            degenerate: g.is_degenerate(),
            residual: g.residual,
            amplitudes,
        });
    }
    out.json("ground_states.json", &states)?;

    let lambdas = config.lambdas()?;
    let mut rows = Vec::new();
    for n_b in config.boson_numbers() {
        rows.extend(engine::ed_sweep(&config.model.with_bosons(n_b), &lambdas)?);
    }
    out.csv("ed_sweep.csv", |w| engine::write_ed_csv(&rows, w))?;
    report(&out.path("ed_sweep.csv"));
    Ok(())
}

fn cmd_scan(config: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    if config.ansatz.is_none() {
        return Err(Failure::Config("scan needs an [ansatz] section".into()));
    }
    let mut rows = Vec::new();
    let mut scans = Vec::new();
    for model in config.model_grid()? {
        let spec = config.spec_for(&model, 1)?;
        let scan = engine::scan_layers(&spec, config.run.max_layers)?;
        rows.push(ScanRow::from_scan(&spec, &scan)?);
        scans.push(scan);
    }
    out.csv("scan.csv", |w| engine::write_scan_csv(&rows, w))?;
    out.json("scan.json", &scans)?;
    report(&out.path("scan.csv"));
    Ok(())
}

fn cmd_vqe(config: &ExperimentConfig, out: &Output, sampled: bool) -> Result<(), Failure> {
    let is_sampled = config.cost.kind == CostConfigKind::EnergySampled;
    if sampled != is_sampled {
        let want = if sampled { "energy_sampled" } else { "infidelity or energy_exact" };
        return Err(Failure::Config(format!("this command needs cost.kind = {want}")));
    }
    let specs = config.experiment_specs()?;
    if specs.is_empty() {
        return Err(Failure::Config("variational runs need an [ansatz] section".into()));
    }
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for spec in &specs {
        let result = engine::run_experiment(spec)?;
        rows.push(GridRow::from_run(spec, &result.best)?);
        results.push(result);
    }
    let stem = if sampled { "vqe_sampled" } else { "vqe" };
    out.csv(&format!("{stem}_grid.csv"), |w| engine::write_grid_csv(&rows, w))?;
    out.json(&format!("{stem}_runs.json"), &results)?;
    report(&out.path(&format!("{stem}_grid.csv")));
    Ok(())
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}
