//! Attractive Bose-Hubbard model, optionally extended with per-site chemical
//! potentials and pairwise density-density couplings:
//!
//! ```text
//! H = -J sum_<p,q> (b_p^+ b_q + b_q^+ b_p) - U/2 sum_p n_p (n_p - 1)
//!     + sum_p mu_p n_p + sum_{p<q} V_pq n_p n_q
//! ```

mod indicators;
mod solver;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fock::FockBasis;

pub use indicators::{entropy, ipr, mode_occupation_spectrum};
pub use solver::{ground_state, ground_state_with, GroundState, SolverOptions, DENSE_LIMIT};

/// Network connectivity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Single edge (0, 1).
    Dimer,
    /// Periodic chain (0,1), (1,2), ..., (N-1, 0).
    Ring,
    Explicit(Vec<(usize, usize)>),
}

impl Topology {
    pub fn edges(&self, n_sites: usize) -> Result<Vec<(usize, usize)>> {
        match self {
            Topology::Dimer => {
                if n_sites != 2 {
                    return Err(domain(format!("dimer topology needs 2 sites, got {n_sites}")));
                }
                Ok(vec![(0, 1)])
            }
            Topology::Ring => match n_sites {
                0 | 1 => Err(domain("a ring needs at least 2 sites")),
                2 => Ok(vec![(0, 1)]),
                n => Ok((0..n).map(|p| (p, (p + 1) % n)).collect()),
            },
            Topology::Explicit(edges) => Ok(edges.clone()),
        }
    }
}

/// Pairwise density-density coupling `V_pq n_p n_q` between distinct sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub p: usize,
    pub q: usize,
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BHModel {
    n_sites: usize,
    n_bosons: usize,
    hopping: f64,
    interaction: f64,
    edges: Vec<(usize, usize)>,
    chemical_potential: Option<Vec<f64>>,
    pair_couplings: Vec<PairCoupling>,
}

impl BHModel {
    pub fn new(
        n_sites: usize,
        n_bosons: usize,
        hopping: f64,
        interaction: f64,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(domain("model needs at least one site"));
        }
        if !(hopping > 0.0 && hopping.is_finite()) {
            return Err(domain(format!("hopping J must be positive, got {hopping}")));
        }
        if !(interaction >= 0.0 && interaction.is_finite()) {
            return Err(domain(format!("attraction magnitude U must be non-negative, got {interaction}")));
        }
        let mut seen = Vec::with_capacity(edges.len());
        for &(p, q) in &edges {
            if p >= n_sites || q >= n_sites {
                return Err(domain(format!("edge ({p}, {q}) references a mode outside 0..{n_sites}")));
            }
            if p == q {
                return Err(domain(format!("self edge ({p}, {p})")));
            }
            let key = (p.min(q), p.max(q));
            if seen.contains(&key) {
                return Err(domain(format!("duplicate edge ({p}, {q})")));
            }
            seen.push(key);
        }
        Ok(BHModel {
            n_sites,
            n_bosons,
            hopping,
            interaction,
            edges,
            chemical_potential: None,
            pair_couplings: Vec::new(),
        })
    }

    /// Model at correlation strength `lambda = N_B U / J` with `J = 1`.
    pub fn with_lambda(n_sites: usize, n_bosons: usize, lambda: f64, topology: &Topology) -> Result<Self> {
        if n_bosons == 0 && lambda != 0.0 {
            return Err(domain("lambda is undefined without bosons"));
        }
        let u = if n_bosons == 0 { 0.0 } else { lambda / n_bosons as f64 };
        Self::new(n_sites, n_bosons, 1.0, u, topology.edges(n_sites)?)
    }

    pub fn dimer(n_bosons: usize, lambda: f64) -> Result<Self> {
        Self::with_lambda(2, n_bosons, lambda, &Topology::Dimer)
    }

    pub fn ring(n_sites: usize, n_bosons: usize, lambda: f64) -> Result<Self> {
        Self::with_lambda(n_sites, n_bosons, lambda, &Topology::Ring)
    }

    pub fn with_chemical_potential(mut self, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != self.n_sites {
            return Err(domain(format!("{} chemical potentials for {} sites", mu.len(), self.n_sites)));
        }
        self.chemical_potential = Some(mu);
        Ok(self)
    }

    /// Adds `V_pq n_p n_q` for each distinct pair; each unordered pair may be
    /// given at most once.
    pub fn with_pair_couplings(mut self, couplings: Vec<PairCoupling>) -> Result<Self> {
        let mut normalized: Vec<PairCoupling> = Vec::with_capacity(couplings.len());
        for c in couplings {
            if c.p >= self.n_sites || c.q >= self.n_sites {
                return Err(domain(format!("coupling ({}, {}) out of range", c.p, c.q)));
            }
            if c.p == c.q {
                return Err(domain(format!("coupling ({}, {}) is on-site", c.p, c.q)));
            }
            let (p, q) = (c.p.min(c.q), c.p.max(c.q));
            if normalized.iter().any(|o| o.p == p && o.q == q) {
                return Err(domain(format!("duplicate coupling ({p}, {q})")));
            }
            normalized.push(PairCoupling { p, q, strength: c.strength });
        }
        self.pair_couplings = normalized;
        Ok(self)
    }

    /// Reads the strictly upper triangle of a symmetric coupling matrix with a
    /// zero diagonal.
    pub fn with_coupling_matrix(self, v: &[Vec<f64>]) -> Result<Self> {
        let n = self.n_sites;
        if v.len() != n || v.iter().any(|row| row.len() != n) {
            return Err(domain(format!("coupling matrix must be {n}x{n}")));
        }
        let mut couplings = Vec::new();
        for (p, row) in v.iter().enumerate() {
            if row[p] != 0.0 {
                return Err(domain(format!("coupling matrix has non-zero diagonal at {p}")));
            }
            for (q, &strength) in row.iter().enumerate().skip(p + 1) {
                if strength != v[q][p] {
                    return Err(domain(format!("coupling matrix not symmetric at ({p}, {q})")));
                }
                if strength != 0.0 {
                    couplings.push(PairCoupling { p, q, strength });
                }
            }
        }
        self.with_pair_couplings(couplings)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn interaction(&self) -> f64 {
        self.interaction
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn chemical_potential(&self) -> Option<&[f64]> {
        self.chemical_potential.as_deref()
    }

    pub fn pair_couplings(&self) -> &[PairCoupling] {
        &self.pair_couplings
    }

    pub fn lambda(&self) -> f64 {
        self.n_bosons as f64 * self.interaction / self.hopping
    }

    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.n_sites, self.n_bosons)
    }

    /// Diagonal matrix element for a configuration.
    pub fn diagonal_energy(&self, occ: &[u32]) -> f64 {
        let mut e = 0.0;
        for &n in occ {
            let n = n as f64;
            e -= 0.5 * self.interaction * n * (n - 1.0);
        }
        if let Some(mu) = &self.chemical_potential {
            for (m, &n) in mu.iter().zip(occ) {
                e += m * n as f64;
            }
        }
        for c in &self.pair_couplings {
            e += c.strength * occ[c.p] as f64 * occ[c.q] as f64;
        }
        e
    }
}

/// Symmetric sparse matrix in coordinate form, with a row-compressed copy for
/// matrix-vector products.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    basis: Arc<FockBasis>,
    entries: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

pub fn build_hamiltonian(model: &BHModel, basis: Arc<FockBasis>) -> Result<SparseHamiltonian> {
    if basis.n_sites() != model.n_sites || basis.n_bosons() != model.n_bosons {
        return Err(domain(format!(
            "basis ({} sites, {} bosons) does not match model ({} sites, {} bosons)",
            basis.n_sites(),
            basis.n_bosons(),
            model.n_sites,
            model.n_bosons
        )));
    }
    let mut entries = Vec::new();
    let mut scratch = vec![0u32; model.n_sites];
    for (idx, occ) in basis.iter().enumerate() {
        let diag = model.diagonal_energy(occ);
        if diag != 0.0 {
            entries.push((idx, idx, diag));
        }
        for &(p, q) in &model.edges {
            // b_p^+ b_q moves one boson q -> p; the transpose entry is b_q^+ b_p
            if occ[q] == 0 {
                continue;
            }
            scratch.copy_from_slice(occ);
            scratch[q] -= 1;
            scratch[p] += 1;
            let target = basis.rank(&scratch);
            let amp = -model.hopping * (((occ[p] + 1) as f64) * occ[q] as f64).sqrt();
            entries.push((target, idx, amp));
            entries.push((idx, target, amp));
        }
    }
    Ok(SparseHamiltonian::from_entries(basis, entries))
}

impl SparseHamiltonian {
    fn from_entries(basis: Arc<FockBasis>, entries: Vec<(usize, usize, f64)>) -> Self {
        let dim = basis.dim();
        let mut sorted = entries.clone();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry present") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseHamiltonian { basis, entries, row_ptr, cols, vals }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Coordinate entries as assembled, symmetric partners included.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim())
            .all(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).all(|k| self.get(self.cols[k], r) == self.vals[k]))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for (r, row) in m.iter_mut().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row[self.cols[k]] = self.vals[k];
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            *out = acc;
        }
    }

    /// `<v|H|v>` for a (not necessarily normalized) amplitude vector.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (r, vr) in v.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += v[self.cols[k]] * self.vals[k];
            }
            acc += (vr.conj() * row).re;
        }
        acc
    }

    /// `||H v - e v||` for a real vector.
    pub fn residual(&self, v: &[f64], e: f64) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.matvec(v, &mut hv);
        hv.iter().zip(v).map(|(h, x)| (h - e * x).powi(2)).sum::<f64>().sqrt()
    }
}
