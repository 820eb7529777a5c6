//! Energy estimation from photon-number-resolved counts.
//!
//! Diagonal terms (interaction, chemical potential, pair couplings) are read
//! from counts in the computational basis. The hopping term of an edge
//! `(p, q)` is read after a 50/50 beam-splitter `B_pq(pi/4, 0)`, which maps
//! `b_p^+ b_q + b_q^+ b_p` onto `n_q - n_p`.
//!
//! Detection is lossless: every sampled configuration carries all `N_B`
//! photons.

use std::f64::consts::FRAC_PI_4;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fock::{Configuration, FockBasis};
use crate::gates::Simulator;
use crate::model::BHModel;
use crate::state::StateVector;

/// Observed counts per basis configuration.
#[derive(Clone, Debug)]
pub struct CountsHistogram {
    basis: Arc<FockBasis>,
    counts: Vec<u64>,
    shots: u64,
}

impl CountsHistogram {
    pub fn from_counts(basis: Arc<FockBasis>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != basis.dim() {
            return Err(domain("counts length differs from basis dimension"));
        }
        let shots = counts.iter().sum();
        Ok(CountsHistogram { basis, counts, shots })
    }

    /// Every shot lands on `occupations`.
    pub fn deterministic(basis: Arc<FockBasis>, occupations: &[u32], shots: u64) -> Result<Self> {
        let mut counts = vec![0; basis.dim()];
        counts[basis.index_of(occupations)?] = shots;
        Self::from_counts(basis, counts)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Counts indexed like the basis.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_of(&self, occupations: &[u32]) -> Result<u64> {
        Ok(self.counts[self.basis.index_of(occupations)?])
    }

    /// Observed configurations with non-zero counts, in basis order.
    pub fn observed(&self) -> impl Iterator<Item = (Configuration, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (self.basis.configuration(i), c))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let s = self.shots as f64;
        self.counts.iter().map(|&c| c as f64 / s).collect()
    }

    /// CSV rows `occupations,count` with space-separated occupations.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "occupations,count")?;
        for (config, count) in self.observed() {
            let occ: Vec<String> = config.occupations().iter().map(|n| n.to_string()).collect();
            writeln!(out, "{},{count}", occ.join(" "))?;
        }
        Ok(())
    }

    /// Mean and standard error of the mean of a per-shot observable.
    pub fn mean_and_error(&self, observable: impl Fn(&[u32]) -> f64) -> (f64, f64) {
        let dist = Outcomes::Counts(&self.counts, self.shots);
        moments(&self.basis, dist, observable)
    }
}

enum Outcomes<'a> {
    Counts(&'a [u64], u64),
    Exact(&'a [f64]),
}

enum Outcome {
    Counts(CountsHistogram),
    Exact(Vec<f64>),
}

impl Outcome {
    fn view(&self) -> Outcomes<'_> {
        match self {
            Outcome::Counts(h) => Outcomes::Counts(&h.counts, h.shots),
            Outcome::Exact(p) => Outcomes::Exact(p),
        }
    }
}

/// `(mean, standard error of the mean)`; zero error for exact distributions.
fn moments(basis: &FockBasis, dist: Outcomes<'_>, observable: impl Fn(&[u32]) -> f64) -> (f64, f64) {
    match dist {
        Outcomes::Exact(probs) => {
            let mean = basis.iter().zip(probs).map(|(c, p)| p * observable(c)).sum();
            (mean, 0.0)
        }
        Outcomes::Counts(counts, shots) => {
            let n = shots as f64;
            let mut values = Vec::new();
            let mut sum = 0.0;
            for (c, &k) in basis.iter().zip(counts) {
                if k > 0 {
                    let v = observable(c);
                    sum += k as f64 * v;
                    values.push((v, k as f64));
                }
            }
            let mean = sum / n;
            if shots < 2 {
                return (mean, 0.0);
            }
            let ss: f64 = values.iter().map(|(v, k)| k * (v - mean).powi(2)).sum();
            let var = ss / (n - 1.0);
            (mean, (var / n).sqrt())
        }
    }
}

/// Draws `shots` i.i.d. Born-rule outcomes and returns their histogram.
///
/// The histogram is drawn directly as a multinomial vector through
/// conditional binomials, which has the same law as tallying individual
/// shots at a cost linear in the basis size.
pub fn sample_counts<R: Rng + ?Sized>(state: &StateVector, shots: u64, rng: &mut R) -> Result<CountsHistogram> {
    if shots == 0 {
        return Err(domain("cannot sample zero shots"));
    }
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(domain("cannot sample from a zero or non-finite state"));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass = total;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining_shots;
            break;
        }
        let conditional = if remaining_mass > 0.0 { (p / remaining_mass).clamp(0.0, 1.0) } else { 1.0 };
        let k = if conditional >= 1.0 {
            remaining_shots
        } else if conditional <= 0.0 {
            0
        } else {
            Binomial::new(remaining_shots, conditional).map_err(|e| domain(format!("binomial draw: {e}")))?.sample(rng)
        };
        counts[i] = k;
        remaining_shots -= k;
        remaining_mass -= p;
    }
    CountsHistogram::from_counts(state.basis().clone(), counts)
}

/// `-U/2 <n_p (n_p - 1)>` per site, as direct per-shot sample means.
///
/// In expectation this equals `-U/2 (Var(n_p) + <n_p>^2 - <n_p>)`.
pub fn estimate_interaction(hist: &CountsHistogram, u: f64) -> Vec<TermEstimate> {
    (0..hist.basis.n_sites())
        .map(|p| {
            let (m, e) = hist.mean_and_error(|c| {
                let n = c[p] as f64;
                n * (n - 1.0)
            });
            TermEstimate::new(-0.5 * u * m, 0.5 * u * e)
        })
        .collect()
}

/// Chemical-potential and pair-coupling contributions from one histogram.
pub fn estimate_extended_terms(
    hist: &CountsHistogram,
    mu: Option<&[f64]>,
    couplings: &[crate::model::PairCoupling],
) -> ExtendedEstimate {
    let chemical = mu
        .map(|mu| {
            mu.iter()
                .enumerate()
                .map(|(p, &m)| {
                    let (mean, err) = hist.mean_and_error(|c| c[p] as f64);
                    TermEstimate::new(m * mean, m.abs() * err)
                })
                .collect()
        })
        .unwrap_or_default();
    let pair = couplings
        .iter()
        .map(|v| {
            let (mean, err) = hist.mean_and_error(|c| c[v.p] as f64 * c[v.q] as f64);
            TermEstimate::new(v.strength * mean, v.strength.abs() * err)
        })
        .collect();
    ExtendedEstimate { chemical, pair }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtendedEstimate {
    pub chemical: Vec<TermEstimate>,
    pub pair: Vec<TermEstimate>,
}

impl ExtendedEstimate {
    pub fn chemical_total(&self) -> f64 {
        self.chemical.iter().map(|t| t.value).sum()
    }

    pub fn pair_total(&self) -> f64 {
        self.pair.iter().map(|t| t.value).sum()
    }
}

/// `-J <b_p^+ b_q + b_q^+ b_p>` estimated as `-J <n_q - n_p>` after a
/// 50/50 beam-splitter on a copy of the state.
pub fn estimate_hopping<R: Rng + ?Sized>(
    state: &StateVector,
    edge: (usize, usize),
    hopping: f64,
    shots: u64,
    rng: &mut R,
) -> Result<TermEstimate> {
    let sim = Simulator::new(state.basis().clone());
    let mut rotated = state.clone();
    sim.apply_beamsplitter(&mut rotated, edge.0, edge.1, FRAC_PI_4, 0.0)?;
    let hist = sample_counts(&rotated, shots, rng)?;
    let (p, q) = edge;
    let (mean, err) = hist.mean_and_error(|c| c[q] as f64 - c[p] as f64);
    Ok(TermEstimate::new(-hopping * mean, hopping * err))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl TermEstimate {
    pub fn new(value: f64, std_error: f64) -> Self {
        TermEstimate { value, std_error }
    }
}

/// A Hamiltonian term that a measurement setting is responsible for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "term", content = "index")]
pub enum Term {
    /// on-site interaction of a site
    Interaction(usize),
    ChemicalPotential(usize),
    /// index into the model's pair couplings
    PairCoupling(usize),
    /// index into the model's edge list
    Hopping(usize),
}

/// One measurement configuration: an optional 50/50 beam-splitter on each
/// listed edge (edges must be mode-disjoint), then photon counting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    /// edge indices rotated before counting
    pub rotated_edges: Vec<usize>,
    pub terms: Vec<Term>,
    pub shots: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// one rotated setting per edge
    PerEdge,
    /// mode-disjoint edges share a rotated setting
    EdgeColoring,
}

/// Allocation of a shot budget over measurement settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub total_shots: u64,
    pub settings: Vec<MeasurementSetting>,
}

impl ShotPlan {
    /// One unrotated setting for every diagonal term plus rotated settings
    /// for the hopping terms, with the budget split as evenly as possible.
    pub fn new(model: &BHModel, total_shots: u64, grouping: Grouping) -> Result<Self> {
        let mut diagonal: Vec<Term> = (0..model.n_sites()).map(Term::Interaction).collect();
        if model.chemical_potential().is_some() {
            diagonal.extend((0..model.n_sites()).map(Term::ChemicalPotential));
        }
        diagonal.extend((0..model.pair_couplings().len()).map(Term::PairCoupling));

        let edge_groups: Vec<Vec<usize>> = match grouping {
            Grouping::PerEdge => (0..model.edges().len()).map(|e| vec![e]).collect(),
            Grouping::EdgeColoring => color_edges(model.edges()),
        };
        let n_settings = 1 + edge_groups.len() as u64;
        if total_shots < n_settings {
            return Err(Error::Plan(format!("{total_shots} shots cannot cover {n_settings} measurement settings")));
        }
        let base = total_shots / n_settings;
        let extra = total_shots % n_settings;
        let share = |i: u64| base + u64::from(i < extra);

        let mut settings = vec![MeasurementSetting { rotated_edges: Vec::new(), terms: diagonal, shots: share(0) }];
        for (i, group) in edge_groups.into_iter().enumerate() {
            settings.push(MeasurementSetting {
                terms: group.iter().map(|&e| Term::Hopping(e)).collect(),
                rotated_edges: group,
                shots: share(i as u64 + 1),
            });
        }
        let plan = ShotPlan { total_shots, settings };
        plan.validate(model)?;
        Ok(plan)
    }

    /// Checks shot accounting and that every term is covered exactly once,
    /// by a setting able to measure it.
    pub fn validate(&self, model: &BHModel) -> Result<()> {
        let sum: u64 = self.settings.iter().map(|s| s.shots).sum();
        if sum != self.total_shots {
            return Err(Error::Plan(format!("setting shots sum to {sum}, plan declares {}", self.total_shots)));
        }
        let mut required: Vec<Term> = (0..model.n_sites()).map(Term::Interaction).collect();
        if model.chemical_potential().is_some() {
            required.extend((0..model.n_sites()).map(Term::ChemicalPotential));
        }
        required.extend((0..model.pair_couplings().len()).map(Term::PairCoupling));
        required.extend((0..model.edges().len()).map(Term::Hopping));

        let mut covered: Vec<Term> = Vec::new();
        for s in &self.settings {
            if s.shots == 0 {
                return Err(Error::Plan("a measurement setting has no shots".into()));
            }
            let mut used_modes = Vec::new();
            for &e in &s.rotated_edges {
                let &(p, q) =
                    model.edges().get(e).ok_or_else(|| Error::Plan(format!("rotated edge {e} does not exist")))?;
                if used_modes.contains(&p) || used_modes.contains(&q) {
                    return Err(Error::Plan(format!("rotated edges in one setting share a mode ({p}, {q})")));
                }
                used_modes.extend([p, q]);
            }
            for &t in &s.terms {
                let measurable = match t {
                    Term::Hopping(e) => s.rotated_edges.contains(&e),
                    Term::Interaction(p) | Term::ChemicalPotential(p) => !used_modes.contains(&p),
                    Term::PairCoupling(i) => match model.pair_couplings().get(i) {
                        Some(c) => !used_modes.contains(&c.p) && !used_modes.contains(&c.q),
                        None => false,
                    },
                };
                if !measurable {
                    return Err(Error::Plan(format!("term {t:?} cannot be read from its setting")));
                }
                if covered.contains(&t) {
                    return Err(Error::Plan(format!("term {t:?} is measured twice")));
                }
                covered.push(t);
            }
        }
        if let Some(missing) = required.iter().find(|t| !covered.contains(t)) {
            return Err(Error::Plan(format!("term {missing:?} is not measured")));
        }
        if let Some(extra) = covered.iter().find(|t| !required.contains(t)) {
            return Err(Error::Plan(format!("term {extra:?} is not in the model")));
        }
        Ok(())
    }
}

/// Greedy partition of edges into mode-disjoint groups.
fn color_edges(edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (e, &(p, q)) in edges.iter().enumerate() {
        match groups.iter_mut().find(|(_, modes)| !modes.contains(&p) && !modes.contains(&q)) {
            Some((members, modes)) => {
                members.push(e);
                modes.extend([p, q]);
            }
            None => groups.push((vec![e], vec![p, q])),
        }
    }
    groups.into_iter().map(|(m, _)| m).collect()
}

/// Finite shot budget or the infinite-shot limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// analytic expectations, zero statistical error
    Exact,
    Shots(ShotPlan),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    /// per edge, in model edge order
    pub hopping: Vec<TermEstimate>,
    /// per site
    pub interaction: Vec<TermEstimate>,
    /// per site, empty without chemical potentials
    pub chemical: Vec<TermEstimate>,
    /// per pair coupling
    pub pair: Vec<TermEstimate>,
    pub shots: u64,
}

impl EnergyEstimate {
    pub fn breakdown_total(&self) -> f64 {
        self.hopping.iter().chain(&self.interaction).chain(&self.chemical).chain(&self.pair).map(|t| t.value).sum()
    }
}

/// Estimator bound to one model; reusable across states and threads.
#[derive(Debug)]
pub struct EnergyEstimator {
    model: BHModel,
    sampling: Sampling,
    simulator: Arc<Simulator>,
}

impl EnergyEstimator {
    pub fn new(model: BHModel, sampling: Sampling, simulator: Arc<Simulator>) -> Result<Self> {
        let b = simulator.basis();
        if b.n_sites() != model.n_sites() || b.n_bosons() != model.n_bosons() {
            return Err(domain("simulator basis does not match the model"));
        }
        if let Sampling::Shots(plan) = &sampling {
            plan.validate(&model)?;
        }
        Ok(EnergyEstimator { model, sampling, simulator })
    }

    pub fn model(&self) -> &BHModel {
        &self.model
    }

    pub fn sampling(&self) -> &Sampling {
        &self.sampling
    }

    pub fn estimate<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<EnergyEstimate> {
        let model = &self.model;
        let mut est = EnergyEstimate {
            hopping: vec![TermEstimate::default(); model.edges().len()],
            interaction: vec![TermEstimate::default(); model.n_sites()],
            chemical: if model.chemical_potential().is_some() {
                vec![TermEstimate::default(); model.n_sites()]
            } else {
                Vec::new()
            },
            pair: vec![TermEstimate::default(); model.pair_couplings().len()],
            ..EnergyEstimate::default()
        };
        let settings: Vec<MeasurementSetting> = match &self.sampling {
            Sampling::Exact => {
                // the infinite-shot limit reads every term from its own ideal setting
                let mut s = vec![MeasurementSetting {
                    rotated_edges: Vec::new(),
                    terms: (0..model.n_sites()).map(Term::Interaction).collect(),
                    shots: 0,
                }];
                if model.chemical_potential().is_some() {
                    s[0].terms.extend((0..model.n_sites()).map(Term::ChemicalPotential));
                }
                s[0].terms.extend((0..model.pair_couplings().len()).map(Term::PairCoupling));
                s.extend((0..model.edges().len()).map(|e| MeasurementSetting {
                    rotated_edges: vec![e],
                    terms: vec![Term::Hopping(e)],
                    shots: 0,
                }));
                s
            }
            Sampling::Shots(plan) => plan.settings.clone(),
        };

        let mut variance = 0.0;
        for setting in &settings {
            let mut measured = state.clone();
            for &e in &setting.rotated_edges {
                let (p, q) = model.edges()[e];
                self.simulator.apply_beamsplitter(&mut measured, p, q, FRAC_PI_4, 0.0)?;
            }
            let outcome = if matches!(self.sampling, Sampling::Exact) {
                Outcome::Exact(measured.probabilities())
            } else {
                est.shots += setting.shots;
                Outcome::Counts(sample_counts(&measured, setting.shots, rng)?)
            };
            let basis = measured.basis();
            for &term in &setting.terms {
                let obs = self.term_observable(term);
                let (m, e) = moments(basis, outcome.view(), &obs);
                let t = TermEstimate::new(m, e);
                match term {
                    Term::Interaction(p) => est.interaction[p] = t,
                    Term::ChemicalPotential(p) => est.chemical[p] = t,
                    Term::PairCoupling(i) => est.pair[i] = t,
                    Term::Hopping(e) => est.hopping[e] = t,
                }
            }
            // correlated terms of one setting: error of their per-shot sum
            let combined = |c: &[u32]| setting.terms.iter().map(|&t| self.term_observable(t)(c)).sum::<f64>();
            let (_, e) = moments(basis, outcome.view(), combined);
            variance += e * e;
        }
        est.value = est.breakdown_total();
        est.std_error = variance.sqrt();
        Ok(est)
    }

    /// Per-shot energy contribution of a term in its measurement basis.
    fn term_observable(&self, term: Term) -> impl Fn(&[u32]) -> f64 + '_ {
        let model = &self.model;
        move |c: &[u32]| match term {
            Term::Interaction(p) => {
                let n = c[p] as f64;
                -0.5 * model.interaction() * n * (n - 1.0)
            }
            Term::ChemicalPotential(p) => model.chemical_potential().map(|mu| mu[p]).unwrap_or(0.0) * c[p] as f64,
            Term::PairCoupling(i) => {
                let v = model.pair_couplings()[i];
                v.strength * c[v.p] as f64 * c[v.q] as f64
            }
            Term::Hopping(e) => {
                let (p, q) = model.edges()[e];
                -model.hopping() * (c[q] as f64 - c[p] as f64)
            }
        }
    }
}

/// One-shot convenience wrapper around [`EnergyEstimator`].
pub fn estimate_energy<R: Rng + ?Sized>(
    state: &StateVector,
    model: &BHModel,
    sampling: &Sampling,
    rng: &mut R,
) -> Result<EnergyEstimate> {
    let sim = Arc::new(Simulator::new(state.basis().clone()));
    EnergyEstimator::new(model.clone(), sampling.clone(), sim)?.estimate(state, rng)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::model::PairCoupling;
    use crate::rng;

    fn basis(n_sites: usize, n_bosons: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n_sites, n_bosons).unwrap())
    }

    #[test]
    fn deterministic_state_samples() {
        let b = basis(2, 2);
        let s = StateVector::fock(b, &[2, 0]).unwrap();
        let h = sample_counts(&s, 1000, &mut rng::stream(1, 0)).unwrap();
        assert_eq!(h.count_of(&[2, 0]).unwrap(), 1000);
        assert_eq!(h.shots(), 1000);
    }

    #[test]
    fn zero_shots_rejected() {
        let b = basis(2, 1);
        let s = StateVector::fock(b, &[1, 0]).unwrap();
        assert!(sample_counts(&s, 0, &mut rng::stream(1, 0)).is_err());
    }

    #[test]
    fn balanced_superposition_frequencies() {
        let b = basis(2, 1);
        let s = StateVector::from_real(b, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let shots = 1_000_000u64;
        let h = sample_counts(&s, shots, &mut rng::stream(3, 0)).unwrap();
        let std = (0.25 / shots as f64).sqrt();
        for f in h.frequencies() {
            assert!((f - 0.5).abs() < 5.0 * std);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let b = basis(3, 3);
        let amps: Vec<f64> = (0..b.dim()).map(|i| 1.0 + i as f64).collect();
        let mut s = StateVector::from_real(b, &amps).unwrap();
        s.normalize().unwrap();
        let a = sample_counts(&s, 5000, &mut rng::stream(9, 4)).unwrap();
        let c = sample_counts(&s, 5000, &mut rng::stream(9, 4)).unwrap();
        assert_eq!(a.counts(), c.counts());
        for (config, _) in a.observed() {
            assert_eq!(config.total(), 3);
        }
    }

    #[test]
    fn interaction_from_fixed_counts() {
        let b = basis(2, 2);
        let h = CountsHistogram::deterministic(b.clone(), &[2, 0], 10).unwrap();
        let u = 0.7;
        let est = estimate_interaction(&h, u);
        assert!((est[0].value + u).abs() < 1e-15);
        assert_eq!(est[1].value, 0.0);
        let h = CountsHistogram::deterministic(b, &[1, 1], 10).unwrap();
        assert!(estimate_interaction(&h, u).iter().all(|t| t.value == 0.0));
    }

    #[test]
    fn extended_terms_from_fixed_counts() {
        let b = basis(2, 3);
        let h = CountsHistogram::deterministic(b, &[2, 1], 4).unwrap();
        let e = estimate_extended_terms(&h, Some(&[1.0, 0.0]), &[]);
        assert_eq!(e.chemical_total(), 2.0);
        let e = estimate_extended_terms(&h, None, &[PairCoupling { p: 0, q: 1, strength: 1.0 }]);
        assert_eq!(e.pair_total(), 2.0);
    }

    #[test]
    fn default_plan_accounting() {
        let m = BHModel::ring(4, 2, 1.0).unwrap();
        let plan = ShotPlan::new(&m, 1003, Grouping::PerEdge).unwrap();
        assert_eq!(plan.settings.len(), 5);
        assert_eq!(plan.settings.iter().map(|s| s.shots).sum::<u64>(), 1003);
        let colored = ShotPlan::new(&m, 1003, Grouping::EdgeColoring).unwrap();
        assert_eq!(colored.settings.len(), 3);
        assert!(ShotPlan::new(&m, 3, Grouping::PerEdge).is_err());
    }

    #[test]
    fn plan_validation_catches_gaps() {
        let m = BHModel::ring(3, 2, 1.0).unwrap();
        let mut plan = ShotPlan::new(&m, 400, Grouping::PerEdge).unwrap();
        plan.settings[1].terms.clear();
        assert!(matches!(plan.validate(&m), Err(Error::Plan(_))));

        let mut plan = ShotPlan::new(&m, 400, Grouping::PerEdge).unwrap();
        plan.settings[0].terms.push(Term::Hopping(0));
        assert!(plan.validate(&m).is_err());

        let mut plan = ShotPlan::new(&m, 400, Grouping::PerEdge).unwrap();
        plan.settings[1].rotated_edges.push(1); // edges 0 and 1 share mode 1
        assert!(plan.validate(&m).is_err());

        let mut plan = ShotPlan::new(&m, 400, Grouping::PerEdge).unwrap();
        plan.total_shots += 1;
        assert!(plan.validate(&m).is_err());
    }

    #[test]
    fn breakdown_sums_to_value() {
        let m = BHModel::ring(3, 3, 2.0).unwrap().with_chemical_potential(vec![0.1, -0.2, 0.3]).unwrap();
        let b = Arc::new(m.basis().unwrap());
        let amps: Vec<f64> = (0..b.dim()).map(|i| (i as f64).cos()).collect();
        let mut s = StateVector::from_real(b, &amps).unwrap();
        s.normalize().unwrap();
        let plan = ShotPlan::new(&m, 40_000, Grouping::PerEdge).unwrap();
        let est = estimate_energy(&s, &m, &Sampling::Shots(plan), &mut rng::stream(5, 0)).unwrap();
        assert!((est.value - est.breakdown_total()).abs() < 1e-12);
        assert_eq!(est.shots, 40_000);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn histogram_csv() {
        let b = basis(2, 2);
        let h = CountsHistogram::from_counts(b, vec![3, 0, 5]).unwrap();
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "occupations,count\n2 0,3\n0 2,5\n");
    }
}
