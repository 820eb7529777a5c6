//! Number-preserving photonic gates acting on fixed-N state vectors.
//!
//! * `R_p(theta) = exp(i theta n_p)`
//! * `K_p(theta) = exp(i theta n_p^2)`
//! * `B_pq(theta, phi) = exp(theta (e^{i phi} a_q^+ a_p - e^{-i phi} a_p^+ a_q))`,
//!   under which `a_p -> a_p cos(theta) - a_q sin(theta) e^{-i phi}`.
//!
//! A [`Simulator`] owns per-pair fiber plans and per-total generator caches
//! for one basis; beam-splitters then reduce to small dense mat-vecs along
//! each `(n_p, n_q)` fiber.

mod block;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fock::FockBasis;
use crate::state::StateVector;

pub use block::{bs_block, bs_block_taylor, bs_generator, expm_taylor, BlockGenerator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    BeamSplitter { p: usize, q: usize, theta: f64, phi: f64 },
    Rotation { p: usize, theta: f64 },
    Kerr { p: usize, theta: f64 },
}

impl Gate {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        match *self {
            Gate::BeamSplitter { p, q, .. } => {
                if p == q {
                    return Err(domain(format!("beam-splitter on a single mode {p}")));
                }
                if p >= n_sites || q >= n_sites {
                    return Err(domain(format!("beam-splitter ({p}, {q}) outside 0..{n_sites}")));
                }
            }
            Gate::Rotation { p, .. } | Gate::Kerr { p, .. } => {
                if p >= n_sites {
                    return Err(domain(format!("mode {p} outside 0..{n_sites}")));
                }
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::BeamSplitter { p, q, theta, phi } => Gate::BeamSplitter { p, q, theta: -theta, phi },
            Gate::Rotation { p, theta } => Gate::Rotation { p, theta: -theta },
            Gate::Kerr { p, theta } => Gate::Kerr { p, theta: -theta },
        }
    }
}

/// Wire form: `{"gate": "bs"|"rot"|"kerr", "modes": [...], "theta": .., "phi": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    gate: String,
    modes: Vec<usize>,
    theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rec = match *self {
            Gate::BeamSplitter { p, q, theta, phi } => {
                GateRecord { gate: "bs".into(), modes: vec![p, q], theta, phi: Some(phi) }
            }
            Gate::Rotation { p, theta } => GateRecord { gate: "rot".into(), modes: vec![p], theta, phi: None },
            Gate::Kerr { p, theta } => GateRecord { gate: "kerr".into(), modes: vec![p], theta, phi: None },
        };
        rec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = GateRecord::deserialize(d)?;
        match (rec.gate.as_str(), rec.modes.as_slice()) {
            ("bs", &[p, q]) => Ok(Gate::BeamSplitter { p, q, theta: rec.theta, phi: rec.phi.unwrap_or(0.0) }),
            ("rot", &[p]) if rec.phi.is_none() => Ok(Gate::Rotation { p, theta: rec.theta }),
            ("kerr", &[p]) if rec.phi.is_none() => Ok(Gate::Kerr { p, theta: rec.theta }),
            (g, m) => Err(D::Error::custom(format!("invalid gate record {g:?} on modes {m:?}"))),
        }
    }
}

/// Fibers of one ordered mode pair, grouped by pair total.
#[derive(Debug)]
struct PairPlan {
    groups: Vec<FiberGroup>,
}

#[derive(Debug)]
struct FiberGroup {
    n_total: usize,
    /// Concatenated fibers of length `n_total + 1`; within a fiber,
    /// position `j` holds the configuration with `n_q = j`.
    indices: Vec<usize>,
}

impl PairPlan {
    fn build(basis: &FockBasis, p: usize, q: usize) -> Self {
        let mut by_total: Vec<Vec<usize>> = vec![Vec::new(); basis.n_bosons() + 1];
        let mut scratch = vec![0u32; basis.n_sites()];
        for occ in basis.iter() {
            if occ[q] != 0 {
                continue;
            }
            let n = occ[p] as usize;
            scratch.copy_from_slice(occ);
            for j in 0..=n {
                scratch[p] = (n - j) as u32;
                scratch[q] = j as u32;
                by_total[n].push(basis.rank(&scratch));
            }
        }
        let groups = by_total
            .into_iter()
            .enumerate()
            .filter(|(_, idx)| !idx.is_empty())
            .map(|(n_total, indices)| FiberGroup { n_total, indices })
            .collect();
        PairPlan { groups }
    }
}

/// Gate engine bound to one basis. Shareable across threads; plans and
/// generator caches are filled on first use.
#[derive(Debug)]
pub struct Simulator {
    basis: Arc<FockBasis>,
    plans: Vec<OnceLock<PairPlan>>,
    generators: Vec<OnceLock<BlockGenerator>>,
    /// occupation of each mode per basis index, mode-major
    occupations: Vec<Vec<u32>>,
}

impl Simulator {
    pub fn new(basis: Arc<FockBasis>) -> Self {
        let n = basis.n_sites();
        let occupations = (0..n).map(|p| basis.iter().map(|c| c[p]).collect()).collect();
        Simulator {
            plans: (0..n * n).map(|_| OnceLock::new()).collect(),
            generators: (0..=basis.n_bosons()).map(|_| OnceLock::new()).collect(),
            occupations,
            basis,
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    fn plan(&self, p: usize, q: usize) -> &PairPlan {
        let n = self.basis.n_sites();
        self.plans[p * n + q].get_or_init(|| PairPlan::build(&self.basis, p, q))
    }

    fn generator(&self, n_total: usize) -> &BlockGenerator {
        self.generators[n_total].get_or_init(|| BlockGenerator::new(n_total))
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if !Arc::ptr_eq(state.basis(), &self.basis) && **state.basis() != *self.basis {
            return Err(domain("state basis differs from simulator basis"));
        }
        Ok(())
    }

    pub fn apply_rotation(&self, state: &mut StateVector, p: usize, theta: f64) -> Result<()> {
        self.check(state)?;
        Gate::Rotation { p, theta }.validate(self.basis.n_sites())?;
        self.apply_diagonal(state, p, |n| theta * n as f64);
        Ok(())
    }

    pub fn apply_kerr(&self, state: &mut StateVector, p: usize, theta: f64) -> Result<()> {
        self.check(state)?;
        Gate::Kerr { p, theta }.validate(self.basis.n_sites())?;
        self.apply_diagonal(state, p, |n| theta * (n * n) as f64);
        Ok(())
    }

    fn apply_diagonal(&self, state: &mut StateVector, p: usize, angle: impl Fn(u32) -> f64) {
        let phases: Vec<Complex64> =
            (0..=self.basis.n_bosons() as u32).map(|n| Complex64::from_polar(1.0, angle(n))).collect();
        for (a, &n) in state.amplitudes_mut().iter_mut().zip(&self.occupations[p]) {
            *a *= phases[n as usize];
        }
    }

    pub fn apply_beamsplitter(&self, state: &mut StateVector, p: usize, q: usize, theta: f64, phi: f64) -> Result<()> {
        self.check(state)?;
        Gate::BeamSplitter { p, q, theta, phi }.validate(self.basis.n_sites())?;
        if theta == 0.0 {
            return Ok(());
        }
        let plan = self.plan(p, q);
        let amps = state.amplitudes_mut();
        let size_max = self.basis.n_bosons() + 1;
        let mut rot = Vec::with_capacity(size_max * size_max);
        let mut x = vec![Complex64::new(0.0, 0.0); size_max];
        let phase: Vec<Complex64> = (0..size_max).map(|j| Complex64::from_polar(1.0, phi * j as f64)).collect();
        for group in &plan.groups {
            let size = group.n_total + 1;
            self.generator(group.n_total).rotation(theta, &mut rot);
            for fiber in group.indices.chunks_exact(size) {
                // x = P^+ psi restricted to the fiber
                for (k, &idx) in fiber.iter().enumerate() {
                    x[k] = amps[idx] * phase[k].conj();
                }
                for (j, &idx) in fiber.iter().enumerate() {
                    let row = &rot[j * size..(j + 1) * size];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (r, xk) in row.iter().zip(&x[..size]) {
                        acc += xk * *r;
                    }
                    amps[idx] = acc * phase[j];
                }
            }
        }
        Ok(())
    }

    pub fn apply_gate(&self, state: &mut StateVector, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::BeamSplitter { p, q, theta, phi } => self.apply_beamsplitter(state, p, q, theta, phi),
            Gate::Rotation { p, theta } => self.apply_rotation(state, p, theta),
            Gate::Kerr { p, theta } => self.apply_kerr(state, p, theta),
        }
    }

    /// Applies gates left to right.
    pub fn apply_circuit(&self, state: &mut StateVector, circuit: &[Gate]) -> Result<()> {
        for gate in circuit {
            self.apply_gate(state, gate)?;
        }
        Ok(())
    }

    /// Runs `circuit` on a copy of `initial`.
    pub fn run(&self, initial: &StateVector, circuit: &[Gate]) -> Result<StateVector> {
        let mut state = initial.clone();
        self.apply_circuit(&mut state, circuit)?;
        Ok(state)
    }
}

/// The exact inverse circuit: reversed order, negated angles.
pub fn inverse_circuit(circuit: &[Gate]) -> Vec<Gate> {
    circuit.iter().rev().map(Gate::inverse).collect()
}

pub fn apply_rotation(state: &mut StateVector, p: usize, theta: f64) -> Result<()> {
    Simulator::new(state.basis().clone()).apply_rotation(state, p, theta)
}

pub fn apply_kerr(state: &mut StateVector, p: usize, theta: f64) -> Result<()> {
    Simulator::new(state.basis().clone()).apply_kerr(state, p, theta)
}

pub fn apply_beamsplitter(state: &mut StateVector, p: usize, q: usize, theta: f64, phi: f64) -> Result<()> {
    Simulator::new(state.basis().clone()).apply_beamsplitter(state, p, q, theta, phi)
}

pub fn apply_circuit(state: &mut StateVector, circuit: &[Gate]) -> Result<()> {
    Simulator::new(state.basis().clone()).apply_circuit(state, circuit)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::model::mode_occupation_spectrum;

    fn basis(n_sites: usize, n_bosons: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n_sites, n_bosons).unwrap())
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-13
    }

    fn test_state(b: &Arc<FockBasis>) -> StateVector {
        let amps =
            (0..b.dim()).map(|i| Complex64::new((i as f64 * 0.37).sin() + 0.1, (i as f64 * 1.3).cos())).collect();
        let mut s = StateVector::from_amplitudes(b.clone(), amps).unwrap();
        s.normalize().unwrap();
        s
    }

    #[test]
    fn rotation_phases() {
        let b = basis(2, 2);
        let mut s = StateVector::fock(b.clone(), &[2, 0]).unwrap();
        apply_rotation(&mut s, 0, PI).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(1.0, 0.0)));
        let mut t = test_state(&b);
        let before = t.clone();
        apply_rotation(&mut t, 1, 0.0).unwrap();
        assert_eq!(t.amplitudes(), before.amplitudes());
        apply_rotation(&mut t, 1, 0.77).unwrap();
        for (a, b) in t.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn kerr_phases() {
        let b = basis(2, 2);
        let theta = 0.3;
        let mut s = StateVector::fock(b.clone(), &[2, 0]).unwrap();
        apply_kerr(&mut s, 0, theta).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::from_polar(1.0, 4.0 * theta)));

        let mut t = test_state(&basis(3, 4));
        let before = t.clone();
        apply_kerr(&mut t, 2, 2.0 * PI).unwrap();
        for (a, b) in t.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        apply_kerr(&mut t, 1, 0.4).unwrap();
        apply_kerr(&mut t, 1, -0.4).unwrap();
        for (a, b) in t.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dimer_half_beamsplitter() {
        let b = basis(2, 1);
        let mut s = StateVector::fock(b, &[1, 0]).unwrap();
        apply_beamsplitter(&mut s, 0, 1, FRAC_PI_4, 0.0).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn dimer_full_swap() {
        let b = basis(2, 1);
        let mut s = StateVector::fock(b.clone(), &[1, 0]).unwrap();
        apply_beamsplitter(&mut s, 0, 1, FRAC_PI_2, 0.0).unwrap();
        assert!(close(s.amplitude_of(&[0, 1]).unwrap(), Complex64::new(1.0, 0.0)));
        let mut t = StateVector::fock(b, &[0, 1]).unwrap();
        apply_beamsplitter(&mut t, 0, 1, FRAC_PI_2, 0.0).unwrap();
        assert!(close(t.amplitude_of(&[1, 0]).unwrap(), Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn spectator_mode_untouched() {
        let b = basis(3, 4);
        let mut s = test_state(&b);
        let before = mode_occupation_spectrum(&s, 2).unwrap();
        apply_beamsplitter(&mut s, 0, 1, 0.9, 0.4).unwrap();
        let after = mode_occupation_spectrum(&s, 2).unwrap();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn reversed_pair_is_inverse_direction() {
        // B_qp(theta, 0) = B_pq(-theta, 0)
        let b = basis(3, 3);
        let mut s = test_state(&b);
        let mut t = s.clone();
        apply_beamsplitter(&mut s, 2, 0, 0.6, 0.0).unwrap();
        apply_beamsplitter(&mut t, 0, 2, -0.6, 0.0).unwrap();
        for (x, y) in s.amplitudes().iter().zip(t.amplitudes()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn empty_and_inverse_circuits() {
        let b = basis(3, 3);
        let s = test_state(&b);
        let sim = Simulator::new(b);
        let out = sim.run(&s, &[]).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());

        let circuit = vec![
            Gate::BeamSplitter { p: 0, q: 1, theta: 0.4, phi: 0.3 },
            Gate::Kerr { p: 1, theta: 1.2 },
            Gate::Rotation { p: 2, theta: -0.8 },
            Gate::BeamSplitter { p: 1, q: 2, theta: 2.1, phi: -1.1 },
            Gate::Kerr { p: 0, theta: 0.05 },
        ];
        let forward = sim.run(&s, &circuit).unwrap();
        let back = sim.run(&forward, &inverse_circuit(&circuit)).unwrap();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn gate_validation() {
        let sim = Simulator::new(basis(2, 2));
        let mut s = StateVector::fock(sim.basis().clone(), &[2, 0]).unwrap();
        assert!(sim.apply_beamsplitter(&mut s, 0, 0, 0.1, 0.0).is_err());
        assert!(sim.apply_beamsplitter(&mut s, 0, 2, 0.1, 0.0).is_err());
        assert!(sim.apply_kerr(&mut s, 3, 0.1).is_err());
        let other = StateVector::fock(basis(2, 3), &[3, 0]).unwrap();
        let mut other = other;
        assert!(sim.apply_kerr(&mut other, 0, 0.1).is_err());
    }

    #[test]
    fn gate_json_format() {
        let g = Gate::BeamSplitter { p: 0, q: 1, theta: 0.5, phi: 0.0 };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"gate":"bs","modes":[0,1],"theta":0.5,"phi":0.0}"#);
        let k: Gate = serde_json::from_str(r#"{"gate":"kerr","modes":[2],"theta":1.5}"#).unwrap();
        assert_eq!(k, Gate::Kerr { p: 2, theta: 1.5 });
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"bs","modes":[2],"theta":1.5}"#).is_err());
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"rot","modes":[0],"theta":1,"extra":2}"#).is_err());
    }
}
