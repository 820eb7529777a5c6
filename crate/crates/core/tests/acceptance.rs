//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every check prints exactly one pass/fail line, even when all pass.

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use photonic_bh::ansatz::{uniform_spread_params, AnsatzSpec};
use photonic_bh::engine::{
    fidelity, ground_fidelity, run_restarts, run_vqa_infidelity, run_vqe_exact, run_vqe_sampled, CostKind,
    ExperimentSpec, InitialStatePrep, ModelSpec, Prepared, SampledCost,
};
use photonic_bh::gates::{Gate, Simulator};
use photonic_bh::measure::{estimate_energy, Grouping, Sampling, ShotPlan};
use photonic_bh::model::{build_hamiltonian, entropy, ground_state, ipr, BHModel};
use photonic_bh::optimize::{init_params, OptimizerConfig};
use photonic_bh::{dimension, rng, Configuration, FockBasis, StateVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Quasi-Newton bounded by iteration count rather than evaluations.
fn iterations(max_iterations: u64) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::quasi_newton(u64::MAX / 2);
    cfg.max_iterations = Some(max_iterations);
    cfg
}

fn ground(model: &BHModel) -> photonic_bh::model::GroundState {
    ground_state(&build_hamiltonian(model, Arc::new(model.basis().unwrap())).unwrap()).unwrap()
}

fn table_dimensions() -> Outcome {
    let bosons = [2, 3, 4, 5, 8, 16];
    let table: [(usize, [usize; 6]); 4] = [
        (2, [3, 4, 5, 6, 9, 17]),
        (3, [6, 10, 15, 21, 45, 153]),
        (4, [10, 20, 35, 56, 165, 969]),
        (8, [36, 120, 330, 792, 6435, 245157]),
    ];
    let mut wrong = Vec::new();
    for (n_s, row) in table {
        for (&n_b, &want) in bosons.iter().zip(&row) {
            let got = dimension(n_s, n_b).unwrap();
            if got != want {
                wrong.push(format!("({n_s},{n_b}) = {got}, expected {want}"));
            }
        }
    }
    let enumerated = FockBasis::new(8, 16).unwrap().dim();
    check(wrong.is_empty() && enumerated == 245157, format!("24 cells, enumerated (8,16) -> {enumerated} {wrong:?}"))
}

fn stair_exactness() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut cells = 0;
    for (n_s, max_b) in [(2, 8), (3, 8), (4, 5)] {
        let template = AnsatzSpec::bs_kerr(n_s, 1).build().unwrap();
        let params = uniform_spread_params(n_s).unwrap();
        for n_b in 1..=max_b {
            let model = ModelSpec::new(n_s, n_b, 0.0).build().unwrap();
            let g = ground(&model);
            let basis = g.vector.basis().clone();
            let mut occ = vec![0u32; n_s];
            occ[0] = n_b as u32;
            let init = StateVector::fock(basis.clone(), &occ).unwrap();
            let out = Simulator::new(basis).run(&init, &template.bind(&params).unwrap()).unwrap();
            worst = worst.min(ground_fidelity(&g, &out).unwrap());
            cells += 1;
        }
    }
    check(1.0 - worst <= 1e-9, format!("{cells} networks, worst infidelity {:.2e}", 1.0 - worst))
}

fn cat_regime() -> Outcome {
    let g = ground(&BHModel::dimer(8, 10.0).unwrap());
    let ipr = ipr(&g.vector).unwrap();
    let p = g.vector.amplitude_of(&[8, 0]).unwrap().norm_sqr() + g.vector.amplitude_of(&[0, 8]).unwrap().norm_sqr();
    check((1.9..=2.1).contains(&ipr) && p >= 0.95, format!("IPR {ipr:.4}, P(|8,0>,|0,8>) {p:.4}"))
}

fn entropy_ipr_shape() -> Outcome {
    let at = |lambda: f64| {
        let g = ground(&BHModel::dimer(8, lambda).unwrap());
        (entropy(&g.vector, 0).unwrap(), ipr(&g.vector).unwrap())
    };
    let (s0, i0) = at(0.01);
    let (s3, i3) = at(3.0);
    let (s10, i10) = at(10.0);
    check(
        s3 > s0.max(s10) && i3 > i0.max(i10),
        format!("S = {s0:.3}/{s3:.3}/{s10:.3}, IPR = {i0:.3}/{i3:.3}/{i10:.3} at lambda 0.01/3/10"),
    )
}

fn fidelity_spec(model: ModelSpec, ansatz: AnsatzSpec, init: InitialStatePrep) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(model, ansatz, init, CostKind::Infidelity);
    spec.optimizer = iterations(20_000);
    spec.seed = 2024;
    spec
}

fn dimer_expressibility() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.01, 3.0, 5.0, 10.0] {
        let spec = fidelity_spec(ModelSpec::new(2, 8, lambda), AnsatzSpec::bs_kerr(2, 6), InitialStatePrep::Bimodal);
        let f = run_vqa_infidelity(&spec).unwrap().best.fidelity;
        ok &= f >= 0.99;
        parts.push(format!("{lambda}: {f:.6}"));
    }
    check(ok, format!("best F per lambda {}", parts.join(", ")))
}

fn single_layer_superfluid() -> Outcome {
    let mut worst = (1.0, String::new());
    for n_s in [2, 3] {
        for n_b in 1..=8 {
            let spec =
                fidelity_spec(ModelSpec::new(n_s, n_b, 0.01), AnsatzSpec::bs_kerr(n_s, 1), InitialStatePrep::Monomodal);
            let f = run_vqa_infidelity(&spec).unwrap().best.fidelity;
            if f < worst.0 {
                worst = (f, format!("N_S={n_s} N_B={n_b}"));
            }
        }
    }
    check(worst.0 >= 0.99, format!("16 cells, worst F {:.7} at {}", worst.0, worst.1))
}

fn ideal_vqe() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n_s, n_b, init) in [(3, 4, vec![2, 0, 2]), (4, 3, vec![2, 0, 1, 0])] {
        for lambda in [0.01, 5.0, 10.0] {
            let mut spec = ExperimentSpec::new(
                ModelSpec::new(n_s, n_b, lambda),
                AnsatzSpec::bs_kerr(n_s, 6),
                InitialStatePrep::Explicit(Configuration::new(init.clone())),
                CostKind::EnergyExact,
            );
            spec.optimizer = iterations(2_000);
            spec.seed = 7;
            let best = run_vqe_exact(&spec).unwrap().best;
            ok &= best.fidelity >= 0.99 && best.delta_e <= 1e-5;
            parts.push(format!("{n_s}-site {lambda}: F {:.6} dE {:.1e}", best.fidelity, best.delta_e));
        }
    }
    check(ok, parts.join(", "))
}

fn estimator_statistics() -> Outcome {
    let model = BHModel::dimer(4, 3.0).unwrap();
    let basis = Arc::new(model.basis().unwrap());
    let template = AnsatzSpec::bs_kerr(2, 2).build().unwrap();
    let params = init_params(template.n_params(), 1.0, 11).unwrap();
    let init = StateVector::fock(basis.clone(), &[4, 0]).unwrap();
    let state = Simulator::new(basis.clone()).run(&init, &template.bind(&params).unwrap()).unwrap();
    let exact = build_hamiltonian(&model, basis).unwrap().expectation(state.amplitudes());

    let spread = |shots: u64, runs: u64| {
        let sampling = Sampling::Shots(ShotPlan::new(&model, shots, Grouping::PerEdge).unwrap());
        let v: Vec<f64> = (0..runs)
            .map(|i| estimate_energy(&state, &model, &sampling, &mut rng::stream(shots, i)).unwrap().value)
            .collect();
        let mean = v.iter().sum::<f64>() / runs as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
        (mean, sd)
    };
    let (mean, sd) = spread(10_000, 200);
    let sem = sd / 200f64.sqrt();
    let unbiased = (mean - exact).abs() < 5.0 * sem;

    let pts: Vec<(f64, f64)> =
        [1_000u64, 3_000, 10_000, 30_000, 100_000].iter().map(|&s| ((s as f64).ln(), spread(s, 200).1.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check(
        unbiased && (slope + 0.5).abs() <= 0.1,
        format!("mean {mean:.5} vs exact {exact:.5} ({:.1} SE), log-log slope {slope:.3}", (mean - exact).abs() / sem),
    )
}

fn scaled_sampled_vqe() -> Outcome {
    let mut spec = ExperimentSpec::new(
        ModelSpec::new(2, 2, 1.0),
        AnsatzSpec::bs_kerr(2, 2),
        InitialStatePrep::Bimodal,
        CostKind::EnergySampled(SampledCost { shots: Some(100_000), grouping: Grouping::PerEdge }),
    );
    spec.optimizer = OptimizerConfig::cma_es(3_000, 0.05).with_init_range(0.1);
    spec.seed = 12;
    let result = run_vqe_sampled(&spec).unwrap();
    let hits = result.restart_fidelities.iter().filter(|&&f| f >= 0.95).count();
    let fs: Vec<String> = result.restart_fidelities.iter().map(|f| format!("{f:.4}")).collect();
    check(hits >= 4, format!("{hits}/5 runs at F >= 0.95 [{}]", fs.join(", ")))
}

fn interferometer_kerr() -> Outcome {
    let mut count_errors = 0;
    for n_s in 2..=6 {
        for n_l in 1..=12 {
            let spec = AnsatzSpec::interferometer_kerr(n_s, n_l);
            let t = spec.build().unwrap();
            let gates_ok = t.gates().len() == n_l * n_s * (n_s + 3) / 2 && spec.gate_count() == t.gates().len();
            let params_ok = t.n_params() == n_l * n_s * (n_s + 1) && spec.parameter_count() == t.n_params();
            count_errors += usize::from(!(gates_ok && params_ok));
        }
    }
    // a six-layer success bounds the minimal depth by six
    let mut spec =
        fidelity_spec(ModelSpec::new(3, 8, 5.0), AnsatzSpec::interferometer_kerr(3, 6), InitialStatePrep::Bimodal);
    spec.seed = 3;
    let prep = Prepared::new(&spec.model, &spec.initial_state).unwrap();
    let template = spec.ansatz.build().unwrap();
    let result = run_restarts(&prep, &template, &spec, true).unwrap();
    let f = result.best.fidelity;
    check(
        count_errors == 0 && f >= 0.99,
        format!(
            "60 count cells, {count_errors} wrong; lambda 5, N_L 6: F {f:.6} after {} restart(s)",
            result.restart_fidelities.len()
        ),
    )
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    let mut record = |ok: bool, what: &str| {
        if !ok && !failures.iter().any(|f| f == what) {
            failures.push(what.to_string());
        }
    };
    for seed in 0..40u64 {
        let mut r = rng::stream(seed, 0);
        let n_s = 2 + (seed % 3) as usize;
        let n_b = (seed % 6) as usize;
        let basis = Arc::new(FockBasis::new(n_s, n_b).unwrap());
        let sim = Simulator::new(basis.clone());
        let psi = random_state(&basis, &mut r);

        let theta = rand::Rng::random_range(&mut r, -PI..PI);
        let gates = [
            Gate::BeamSplitter { p: 0, q: n_s - 1, theta, phi: theta / 3.0 },
            Gate::Rotation { p: 0, theta },
            Gate::Kerr { p: n_s - 1, theta },
        ];
        for g in &gates {
            let out = sim.run(&psi, std::slice::from_ref(g)).unwrap();
            record((out.norm() - 1.0).abs() <= 1e-12, "norm");
            let total: f64 =
                basis.iter().zip(out.amplitudes()).map(|(o, a)| o.iter().sum::<u32>() as f64 * a.norm_sqr()).sum();
            record((total - n_b as f64).abs() < 1e-10, "photon number");
        }

        let lambda = (seed as f64) * 0.4;
        let model = ModelSpec::new(n_s, n_b.max(1), lambda).build().unwrap();
        let mb = Arc::new(model.basis().unwrap());
        let h = build_hamiltonian(&model, mb.clone()).unwrap();
        record(h.is_symmetric(), "hermiticity");
        let e0 = ground_state(&h).unwrap().energy;
        let trial = random_state(&mb, &mut r);
        record(h.expectation(trial.amplitudes()) >= e0 - 1e-10 * e0.abs().max(1.0), "variational floor");

        let other = random_state(&basis, &mut r);
        let f = fidelity(&psi, &other).unwrap();
        record((f - fidelity(&psi, &other.clone().with_global_phase(theta)).unwrap()).abs() < 1e-14, "phase");

        let hop = BHModel::new(n_s, n_b, 1.0, 0.0, vec![(0, 1)]).unwrap();
        let exact = -build_hamiltonian(&hop, basis.clone()).unwrap().expectation(psi.amplitudes());
        let rotated = sim.run(&psi, &[Gate::BeamSplitter { p: 0, q: 1, theta: FRAC_PI_4, phi: 0.0 }]).unwrap();
        let diff: f64 =
            basis.iter().zip(rotated.amplitudes()).map(|(o, a)| (o[1] as f64 - o[0] as f64) * a.norm_sqr()).sum();
        record((diff - exact).abs() <= 1e-12, "rotated hopping");

        let probs = psi.probabilities();
        for p in 0..n_s {
            let m = |f: &dyn Fn(f64) -> f64| -> f64 { basis.iter().zip(&probs).map(|(o, w)| w * f(o[p] as f64)).sum() };
            let mean = m(&|n| n);
            let var = m(&|n| (n - mean).powi(2));
            record((m(&|n| n * (n - 1.0)) - (var + mean * mean - mean)).abs() < 1e-10, "cov/locint");
        }
    }
    check(failures.is_empty(), format!("7 properties over 40 seeds; failing: {failures:?}"))
}

fn random_state(basis: &Arc<FockBasis>, r: &mut impl rand::Rng) -> StateVector {
    let amps = (0..basis.dim())
        .map(|_| num_complex::Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(basis.clone(), amps).unwrap();
    s.normalize().unwrap();
    s
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Hilbert-space dimension table", table_dimensions),
        ("closed-form stair angles", stair_exactness),
        ("cat regime", cat_regime),
        ("entropy and IPR shape", entropy_ipr_shape),
        ("dimer expressibility", dimer_expressibility),
        ("single-layer superfluid", single_layer_superfluid),
        ("ideal VQE", ideal_vqe),
        ("estimator unbiasedness", estimator_statistics),
        ("scaled sampled VQE", scaled_sampled_vqe),
        ("interferometer-Kerr variants", interferometer_kerr),
        ("property suites", property_suites),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| *f == id.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
