//! Layered ansatz circuits.
//!
//! Both families end every layer with one Kerr gate per mode:
//!
//! * BS-Kerr: a stair of `N_S - 1` nearest-neighbour beam-splitters with
//!   `phi = 0`, descending `(0,1), (1,2), ...` on odd layers and ascending
//!   `(N_S-2, N_S-1), ..., (0,1)` on even layers.
//! * Interferometer-Kerr: a rectangular mesh of `N_S (N_S - 1) / 2`
//!   beam-splitters in `N_S` alternating columns (even columns start at mode
//!   0, odd columns at mode 1), then one rotation per mode, then the Kerr
//!   gates. Beam-splitter phases and rotations can be switched off.
//!
//! Parameter slots are numbered in gate application order; a beam-splitter
//! with a free phase owns two consecutive slots, `theta` then `phi`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gates::Gate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    BsKerr,
    InterferometerKerr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n_sites: usize,
    pub n_layers: usize,
    /// Fix every beam-splitter phase to zero. Always on for BS-Kerr.
    pub zero_bs_phases: bool,
    /// Interferometer-Kerr only.
    pub include_rotations: bool,
}

impl AnsatzSpec {
    pub fn bs_kerr(n_sites: usize, n_layers: usize) -> Self {
        AnsatzSpec { family: AnsatzFamily::BsKerr, n_sites, n_layers, zero_bs_phases: true, include_rotations: false }
    }

    /// Interferometer-Kerr with free phases and rotations.
    pub fn interferometer_kerr(n_sites: usize, n_layers: usize) -> Self {
        AnsatzSpec {
            family: AnsatzFamily::InterferometerKerr,
            n_sites,
            n_layers,
            zero_bs_phases: false,
            include_rotations: true,
        }
    }

    pub fn with_layers(self, n_layers: usize) -> Self {
        AnsatzSpec { n_layers, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(domain(format!("ansatz needs at least 2 modes, got {}", self.n_sites)));
        }
        if self.family == AnsatzFamily::BsKerr && (!self.zero_bs_phases || self.include_rotations) {
            return Err(domain("BS-Kerr ansatz has zero beam-splitter phases and no rotations"));
        }
        Ok(())
    }

    /// Number of beam-splitters in one layer.
    pub fn bs_per_layer(&self) -> usize {
        match self.family {
            AnsatzFamily::BsKerr => self.n_sites - 1,
            AnsatzFamily::InterferometerKerr => self.n_sites * (self.n_sites - 1) / 2,
        }
    }

    pub fn gate_count(&self) -> usize {
        let n = self.n_sites;
        let rotations = if self.include_rotations { n } else { 0 };
        self.n_layers * (self.bs_per_layer() + rotations + n)
    }

    pub fn parameter_count(&self) -> usize {
        let n = self.n_sites;
        let per_bs = if self.zero_bs_phases { 1 } else { 2 };
        let rotations = if self.include_rotations { n } else { 0 };
        self.n_layers * (per_bs * self.bs_per_layer() + rotations + n)
    }

    pub fn kerr_count(&self) -> usize {
        self.n_layers * self.n_sites
    }

    /// A short label such as `bs_kerr` or `interferometer_kerr[phi=0,no_rot]`.
    pub fn variant_label(&self) -> String {
        match self.family {
            AnsatzFamily::BsKerr => "bs_kerr".to_string(),
            AnsatzFamily::InterferometerKerr => {
                let mut flags = Vec::new();
                if self.zero_bs_phases {
                    flags.push("phi=0");
                }
                if !self.include_rotations {
                    flags.push("no_rot");
                }
                if flags.is_empty() {
                    "interferometer_kerr".to_string()
                } else {
                    format!("interferometer_kerr[{}]", flags.join(","))
                }
            }
        }
    }

    pub fn build(&self) -> Result<CircuitTemplate> {
        self.validate()?;
        match self.family {
            AnsatzFamily::BsKerr => Ok(build_bs_kerr(self)),
            AnsatzFamily::InterferometerKerr => Ok(build_interferometer_kerr(self)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

impl Angle {
    #[inline]
    fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Param(i) => params[i],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateTemplate {
    BeamSplitter { p: usize, q: usize, theta: Angle, phi: Angle },
    Rotation { p: usize, theta: Angle },
    Kerr { p: usize, theta: Angle },
}

impl GateTemplate {
    fn bind(&self, params: &[f64]) -> Gate {
        match *self {
            GateTemplate::BeamSplitter { p, q, theta, phi } => {
                Gate::BeamSplitter { p, q, theta: theta.resolve(params), phi: phi.resolve(params) }
            }
            GateTemplate::Rotation { p, theta } => Gate::Rotation { p, theta: theta.resolve(params) },
            GateTemplate::Kerr { p, theta } => Gate::Kerr { p, theta: theta.resolve(params) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotRole {
    Theta,
    Phi,
}

/// Where a parameter slot lands in the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub layer: usize,
    pub gate: usize,
    pub role: SlotRole,
}

/// Gate sequence with free angles, ready to be bound to a parameter vector.
#[derive(Clone, Debug)]
pub struct CircuitTemplate {
    spec: AnsatzSpec,
    gates: Vec<GateTemplate>,
    slots: Vec<Slot>,
}

impl CircuitTemplate {
    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn gates(&self) -> &[GateTemplate] {
        &self.gates
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn n_params(&self) -> usize {
        self.slots.len()
    }

    pub fn bind(&self, params: &[f64]) -> Result<Vec<Gate>> {
        let mut out = Vec::with_capacity(self.gates.len());
        self.bind_into(params, &mut out)?;
        Ok(out)
    }

    pub fn bind_into(&self, params: &[f64], out: &mut Vec<Gate>) -> Result<()> {
        if params.len() != self.slots.len() {
            return Err(domain(format!("ansatz takes {} parameters, got {}", self.slots.len(), params.len())));
        }
        out.clear();
        out.extend(self.gates.iter().map(|g| g.bind(params)));
        Ok(())
    }

    /// Recovers the parameter vector from a circuit bound by this template.
    pub fn extract(&self, circuit: &[Gate]) -> Result<Vec<f64>> {
        if circuit.len() != self.gates.len() {
            return Err(domain("circuit length differs from template"));
        }
        let mut params = vec![0.0; self.slots.len()];
        for (slot_idx, slot) in self.slots.iter().enumerate() {
            params[slot_idx] = match (circuit[slot.gate], slot.role) {
                (Gate::BeamSplitter { theta, .. }, SlotRole::Theta)
                | (Gate::Rotation { theta, .. }, SlotRole::Theta)
                | (Gate::Kerr { theta, .. }, SlotRole::Theta) => theta,
                (Gate::BeamSplitter { phi, .. }, SlotRole::Phi) => phi,
                _ => return Err(domain("gate kind differs from template")),
            };
        }
        Ok(params)
    }
}

struct Builder {
    gates: Vec<GateTemplate>,
    slots: Vec<Slot>,
    layer: usize,
}

impl Builder {
    fn free(&mut self, role: SlotRole) -> Angle {
        self.slots.push(Slot { layer: self.layer, gate: self.gates.len(), role });
        Angle::Param(self.slots.len() - 1)
    }

    fn beamsplitter(&mut self, p: usize, q: usize, free_phase: bool) {
        let theta = self.free(SlotRole::Theta);
        let phi = if free_phase { self.free(SlotRole::Phi) } else { Angle::Fixed(0.0) };
        self.gates.push(GateTemplate::BeamSplitter { p, q, theta, phi });
    }

    fn rotation(&mut self, p: usize) {
        let theta = self.free(SlotRole::Theta);
        self.gates.push(GateTemplate::Rotation { p, theta });
    }

    fn kerr(&mut self, p: usize) {
        let theta = self.free(SlotRole::Theta);
        self.gates.push(GateTemplate::Kerr { p, theta });
    }

    fn finish(self, spec: &AnsatzSpec) -> CircuitTemplate {
        CircuitTemplate { spec: *spec, gates: self.gates, slots: self.slots }
    }
}

/// Beam-splitter pairs of one BS-Kerr layer (`layer` counts from 1).
pub fn stair_pairs(n_sites: usize, layer: usize) -> Vec<(usize, usize)> {
    let down = (0..n_sites - 1).map(|p| (p, p + 1));
    if layer % 2 == 1 {
        down.collect()
    } else {
        down.rev().collect()
    }
}

/// Beam-splitter pairs of one rectangular mesh, column by column.
pub fn mesh_pairs(n_sites: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_sites * (n_sites - 1) / 2);
    for column in 0..n_sites {
        let mut p = column % 2;
        while p + 1 < n_sites {
            pairs.push((p, p + 1));
            p += 2;
        }
    }
    pairs
}

pub fn build_bs_kerr(spec: &AnsatzSpec) -> CircuitTemplate {
    let mut b = Builder { gates: Vec::new(), slots: Vec::new(), layer: 0 };
    for layer in 1..=spec.n_layers {
        b.layer = layer;
        for (p, q) in stair_pairs(spec.n_sites, layer) {
            b.beamsplitter(p, q, false);
        }
        for p in 0..spec.n_sites {
            b.kerr(p);
        }
    }
    b.finish(spec)
}

pub fn build_interferometer_kerr(spec: &AnsatzSpec) -> CircuitTemplate {
    let mut b = Builder { gates: Vec::new(), slots: Vec::new(), layer: 0 };
    let mesh = mesh_pairs(spec.n_sites);
    for layer in 1..=spec.n_layers {
        b.layer = layer;
        for &(p, q) in &mesh {
            b.beamsplitter(p, q, !spec.zero_bs_phases);
        }
        if spec.include_rotations {
            for p in 0..spec.n_sites {
                b.rotation(p);
            }
        }
        for p in 0..spec.n_sites {
            b.kerr(p);
        }
    }
    b.finish(spec)
}

/// Closed-form single-layer stair angles that map `|N, 0, ..., 0>` onto the
/// non-interacting ground state of the 2-, 3- and 4-site networks.
pub fn uniform_spread_angles(n_sites: usize) -> Result<Vec<f64>> {
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
    let third = (1.0 / 3f64.sqrt()).acos();
    match n_sites {
        2 => Ok(vec![FRAC_PI_4]),
        3 => Ok(vec![third, FRAC_PI_4]),
        4 => Ok(vec![FRAC_PI_3, third, FRAC_PI_4]),
        _ => Err(domain(format!("no closed-form angles for {n_sites} sites"))),
    }
}

/// Single-layer BS-Kerr parameters with the closed-form stair angles and
/// all Kerr angles zero.
pub fn uniform_spread_params(n_sites: usize) -> Result<Vec<f64>> {
    let mut params = uniform_spread_angles(n_sites)?;
    params.extend(std::iter::repeat_n(0.0, n_sites));
    Ok(params)
}
