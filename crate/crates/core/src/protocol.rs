//! End-to-end interferometry protocol: fusion, cat generation, branch
//! splitting and the coincidence readout, plus critical-velocity searches.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    branch_config, extract_cat, final_spectrum, localized_doublet, projections, propagate, sudden_switch,
    sweep_and_project, wrap_phase, BranchSet, CatParameters, PropagatorOptions, Ramp, SerialSchedule, SwitchReport,
};
use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::grid::{product_state, Grid, WaveFunction};
use crate::linalg::{cdot, cnorm, to_complex};
use crate::operator::{Discretization, Hamiltonian, SpectrumPoint};
use crate::potential::{Schedule, Stage, TrapConfig};

// ---------------------------------------------------------------------------
// Readout

/// Per-atom beamsplitter. Rows are the outputs A, B; columns the inputs L, R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Splitter {
    /// `[[1, e^{iπ/N}], [1, −e^{iπ/N}]]/√2`: gives `⟨Π s_i⟩ = −V cos(Δ + θ)` for every N.
    Default,
    /// `[[1, 1], [1, −1]]/√2`: gives `+V cos(Δ + θ)` for every N.
    Hadamard,
    /// `[[1, i], [i, 1]]/√2`: the fringe is shifted by `Nπ/2`, so its sign
    /// depends on N.
    Symmetric,
}

impl Splitter {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "default" => Some(Self::Default),
            "hadamard" => Some(Self::Hadamard),
            "symmetric" => Some(Self::Symmetric),
            _ => None,
        }
    }

    pub fn matrix(self, n: usize) -> [[Complex64; 2]; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re * s, im * s);
        match self {
            Splitter::Default => {
                let e = Complex64::from_polar(s, PI / n.max(1) as f64);
                [[c(1.0, 0.0), e], [c(1.0, 0.0), -e]]
            }
            Splitter::Hadamard => [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]],
            Splitter::Symmetric => [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(1.0, 0.0)]],
        }
    }
}

/// Coincidence measurement on the cat `α|L…L⟩ + β e^{i(θ+Δ)}|R…R⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    /// Sum of the applied phases φ_i.
    pub delta: f64,
    pub splitter: Splitter,
}

/// Largest number of atoms for exact enumeration.
pub const MAX_ENUMERATED_ATOMS: usize = 20;

impl MeasurementModel {
    pub fn new(n: usize, alpha: f64, beta: f64, theta: f64, delta: f64) -> Result<Self> {
        let m = Self { n, alpha, beta, theta, delta, splitter: Splitter::Default };
        m.validate()?;
        Ok(m)
    }

    /// Equal-phase model with visibility `v` and `α ≥ β`, `α² + β² = 1`.
    pub fn from_visibility(n: usize, v: f64, theta: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("visibility {v} outside [0, 1]")));
        }
        let r = (1.0 - v * v).sqrt();
        Self::new(n, ((1.0 + r) / 2.0).sqrt(), ((1.0 - r) / 2.0).sqrt(), theta, delta)
    }

    pub fn with_splitter(mut self, splitter: Splitter) -> Self {
        self.splitter = splitter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_ENUMERATED_ATOMS {
            return Err(Error::InvalidParameter(format!("atom number must be 1..={MAX_ENUMERATED_ATOMS}")));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::InvalidParameter("amplitudes must be non-negative".into()));
        }
        let s = self.alpha * self.alpha + self.beta * self.beta;
        if s > 1.0 + 1e-6 || s == 0.0 {
            return Err(Error::InvalidParameter(format!("α² + β² = {s} must lie in (0, 1]")));
        }
        if !(self.theta.is_finite() && self.delta.is_finite()) {
            return Err(Error::InvalidParameter("phases must be finite".into()));
        }
        let u = self.splitter.matrix(self.n);
        let col = |j: usize| [u[0][j], u[1][j]];
        let (a, b) = (col(0), col(1));
        let dot = a[0].conj() * b[0] + a[1].conj() * b[1];
        let na = a[0].norm_sqr() + a[1].norm_sqr();
        let nb = b[0].norm_sqr() + b[1].norm_sqr();
        if dot.norm() > 1e-12 || (na - 1.0).abs() > 1e-12 || (nb - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("splitter is not unitary".into()));
        }
        Ok(())
    }

    pub fn visibility(&self) -> f64 {
        crate::dynamics::visibility(self.alpha, self.beta)
    }

    /// Probability of every outcome string; bit `k` (counting from the most
    /// significant of `n` bits) set means atom `k` left through B. Normalised
    /// over the cat norm `α² + β²`.
    pub fn distribution(&self) -> Vec<f64> {
        let n = self.n;
        let u = self.splitter.matrix(n);
        let rphase = Complex64::from_polar(self.beta, self.theta + self.delta);
        let norm = self.alpha * self.alpha + self.beta * self.beta;
        (0..1usize << n)
            .map(|outcome| {
                let (mut left, mut right) = (Complex64::new(self.alpha, 0.0), rphase);
                for k in 0..n {
                    let out = (outcome >> (n - 1 - k)) & 1;
                    left *= u[out][0];
                    right *= u[out][1];
                }
                (left + right).norm_sqr() / norm
            })
            .collect()
    }
}

/// `+1` for output A, `−1` for B, per atom.
pub fn outcome_values(outcome: usize, n: usize) -> Vec<i8> {
    (0..n).map(|k| if (outcome >> (n - 1 - k)) & 1 == 1 { -1 } else { 1 }).collect()
}

fn product_sign(outcome: usize) -> f64 {
    if outcome.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Probability that the product of all outcomes is +1.
pub fn coincidence_probability(model: &MeasurementModel) -> Result<f64> {
    model.validate()?;
    Ok(model.distribution().iter().enumerate().filter(|(o, _)| product_sign(*o) > 0.0).map(|(_, p)| p).sum())
}

/// `⟨Π s_i⟩ = P(+1) − P(−1)`.
pub fn expectation_product(model: &MeasurementModel) -> Result<f64> {
    Ok(2.0 * coincidence_probability(model)? - 1.0)
}

/// Closed form `(1 − V cos(Δ + θ))/2` for the default splitter.
pub fn coincidence_formula(model: &MeasurementModel) -> f64 {
    0.5 * (1.0 - model.visibility() * (model.delta + model.theta).cos())
}

/// Exact joint distribution of the outcomes of a strict subset of atoms.
pub fn marginal_distribution(model: &MeasurementModel, subset: &[usize]) -> Result<Vec<(Vec<i8>, f64)>> {
    model.validate()?;
    let n = model.n;
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() || sorted.iter().any(|&k| k >= n) {
        return Err(Error::InvalidParameter(format!("subset {subset:?} is not a set of atoms 0..{n}")));
    }
    if subset.len() == n {
        return Err(Error::InvalidParameter("subset contains every atom; use the coincidence probability".into()));
    }
    if subset.is_empty() {
        return Ok(vec![(Vec::new(), 1.0)]);
    }
    let mut out: Vec<(Vec<i8>, f64)> =
        (0..1usize << subset.len()).map(|o| (outcome_values(o, subset.len()), 0.0)).collect();
    for (outcome, p) in model.distribution().iter().enumerate() {
        let key = subset.iter().fold(0usize, |acc, &k| (acc << 1) | ((outcome >> (n - 1 - k)) & 1));
        out[key].1 += p;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Samples {
    /// One ±1 string per shot.
    pub records: Vec<Vec<i8>>,
    pub mean: f64,
    pub stderr: f64,
}

/// Shots drawn per independently seeded stream.
const SHOTS_PER_BATCH: usize = 8192;

/// Seeded Monte Carlo draws from the exact outcome distribution. Batch `b`
/// uses stream `b` of the generator, so results do not depend on threading.
pub fn sample_outcomes(model: &MeasurementModel, shots: usize, seed: u64) -> Result<Samples> {
    model.validate()?;
    if shots == 0 {
        return Err(Error::InvalidParameter("at least one shot required".into()));
    }
    let dist = WeightedIndex::new(model.distribution()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let n = model.n;
    let batches = shots.div_ceil(SHOTS_PER_BATCH);
    let records: Vec<Vec<i8>> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = SHOTS_PER_BATCH.min(shots - b * SHOTS_PER_BATCH);
            (0..count).map(|_| outcome_values(dist.sample(&mut rng), n)).collect::<Vec<_>>()
        })
        .collect();
    let products: Vec<f64> = records.iter().map(|r| r.iter().map(|&s| s as f64).product()).collect();
    let mean = products.iter().sum::<f64>() / shots as f64;
    let var = if shots > 1 {
        products.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (shots - 1) as f64
    } else {
        0.0
    };
    Ok(Samples { records, mean, stderr: (var / shots as f64).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub delta: f64,
    pub p_plus: f64,
    pub expectation: f64,
}

/// `points` equally spaced phase sums over `[0, 2π)`.
pub fn fringe_scan(model: &MeasurementModel, points: usize) -> Result<Vec<FringePoint>> {
    (0..points)
        .map(|i| {
            let delta = 2.0 * PI * i as f64 / points as f64;
            let m = MeasurementModel { delta, ..*model };
            let p = coincidence_probability(&m)?;
            Ok(FringePoint { delta, p_plus: p, expectation: 2.0 * p - 1.0 })
        })
        .collect()
}

/// Half peak-to-peak of the product expectation over a fringe scan.
pub fn fringe_amplitude(points: &[FringePoint]) -> f64 {
    let max = points.iter().map(|p| p.expectation).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.expectation).fold(f64::INFINITY, f64::min);
    0.5 * (max - min)
}

// ---------------------------------------------------------------------------
// Critical velocities

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Probability of ending in the target state(s) at least `threshold`;
    /// satisfied below the critical speed.
    Retention { threshold: f64 },
    /// Accumulated phase at most `phi_max`; satisfied above the critical speed.
    Dephasing { phi_max: f64 },
}

impl Metric {
    pub fn satisfied(&self, value: f64) -> bool {
        match *self {
            Metric::Retention { threshold } => value >= threshold,
            Metric::Dephasing { phi_max } => value.abs() <= phi_max,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalSearch {
    pub speed: f64,
    /// Final bracket; `hi/lo ≤ 1 + rel_width`.
    pub bracket: (f64, f64),
    /// Every evaluated `(v, metric value)`, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Geometric bisection for the speed where `metric` changes verdict.
/// `evaluate(v)` runs a full simulation at speed `v`.
pub fn find_critical_velocity<F>(metric: Metric, lo: f64, hi: f64, rel_width: f64, mut evaluate: F) -> Result<CriticalSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo && rel_width > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid bracket [{lo}, {hi}]")));
    }
    let mut evaluations = Vec::new();
    let mut eval = |v: f64| -> Result<bool> {
        let m = evaluate(v)?;
        evaluations.push((v, m));
        Ok(metric.satisfied(m))
    };
    let ok_lo = eval(lo)?;
    let ok_hi = eval(hi)?;
    if ok_lo == ok_hi {
        return Err(Error::Bracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > 1.0 + rel_width {
        let mid = (a * b).sqrt();
        if eval(mid)? == ok_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(CriticalSearch { speed: (a * b).sqrt(), bracket: (a, b), evaluations })
}

/// A single-stage sweep with cached endpoints, evaluated at varying speed.
#[derive(Debug, Clone)]
pub struct StageSweep {
    pub ham: Hamiltonian,
    pub initial: Vec<Complex64>,
    pub d_start: f64,
    pub d_end: f64,
    pub target: SpectrumPoint,
    pub opts: PropagatorOptions,
}

impl StageSweep {
    /// Starts from the ground state at `d_start` and keeps `k` final states.
    pub fn from_ground(
        disc: &Discretization,
        cfg: &TrapConfig,
        d_start: f64,
        d_end: f64,
        k: usize,
        eigen: &EigenOptions,
        opts: &PropagatorOptions,
    ) -> Result<Self> {
        let ham = Hamiltonian::new(disc, &cfg.with_separation(d_start))?;
        let ground = ham.eigensolve(1, eigen, &[])?;
        let ramp = Ramp::Linear(Schedule::new(d_start, d_end, 1.0)?);
        let target = final_spectrum(&ham, &ramp, k, eigen)?;
        Ok(Self { initial: to_complex(&ground.vectors[0]), ham, d_start, d_end, target, opts: *opts })
    }

    pub fn run(&self, v: f64) -> Result<crate::dynamics::SweepResult> {
        let mut h = self.ham.clone();
        let ramp = Ramp::Linear(Schedule::new(self.d_start, self.d_end, v)?);
        sweep_and_project(&mut h, &self.initial, &ramp, &self.target, &self.opts)
    }

    /// Ground-state probability after the sweep.
    pub fn ground_retention(&self, v: f64) -> Result<f64> {
        Ok(self.run(v)?.ground_probability)
    }

    /// Weight left in the two lowest final states.
    pub fn doublet_retention(&self, v: f64) -> Result<f64> {
        Ok(self.run(v)?.doublet_probability())
    }

    pub fn cat(&self, v: f64) -> Result<CatParameters> {
        let r = self.run(v)?;
        Ok(extract_cat(self.ham.discretization(), &r.state, &self.target.states[0], &self.target.states[1]))
    }
}

/// Stage-III branch pair for dephasing searches: each branch starts in the
/// ground state of its own trap at `d_start`.
#[derive(Debug, Clone)]
pub struct BranchPair {
    pub left: Hamiltonian,
    pub right: Hamiltonian,
    pub initial: (Vec<Complex64>, Vec<Complex64>),
    pub d_start: f64,
    pub d_end: f64,
    pub opts: PropagatorOptions,
}

impl BranchPair {
    pub fn new(
        disc: &Discretization,
        cfg: &TrapConfig,
        branch_asymmetry: f64,
        d_start: f64,
        d_end: f64,
        eigen: &EigenOptions,
        opts: &PropagatorOptions,
    ) -> Result<Self> {
        let cl = cfg.with_separation(d_start);
        let left = Hamiltonian::new(disc, &cl)?;
        let right = Hamiltonian::new(disc, &branch_config(&cl, BranchSet::Right, branch_asymmetry))?;
        let gl = left.eigensolve(1, eigen, &[])?;
        let gr = right.eigensolve(1, eigen, &gl.vectors)?;
        Ok(Self {
            left,
            right,
            initial: (to_complex(&gl.vectors[0]), to_complex(&gr.vectors[0])),
            d_start,
            d_end,
            opts: *opts,
        })
    }

    /// `(phase, |overlap|)` of the right branch relative to the left after the sweep.
    pub fn phase(&self, v: f64) -> Result<(f64, f64)> {
        let ramp = Ramp::Linear(Schedule::new(self.d_start, self.d_end, v)?);
        let run = |h: &Hamiltonian, psi: &[Complex64]| -> Result<Vec<Complex64>> {
            let mut h = h.clone();
            Ok(propagate(&mut h, psi, &ramp, &self.opts)?.state)
        };
        let (l, r) = rayon::join(|| run(&self.left, &self.initial.0), || run(&self.right, &self.initial.1));
        let (l, r) = (l?, r?);
        let o = cdot(&l, &r) / (cnorm(&l) * cnorm(&r));
        Ok((o.arg(), o.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalVelocities {
    /// Lower bound from dephasing.
    pub v_c1: f64,
    /// Upper bound from retention.
    pub v_c2: f64,
    pub window_nonempty: bool,
}

impl CriticalVelocities {
    pub fn new(v_c1: f64, v_c2: f64) -> Self {
        Self { v_c1, v_c2, window_nonempty: v_c1 < v_c2 }
    }
}

// ---------------------------------------------------------------------------
// Pipeline

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// All wells separate (merge) simultaneously.
    Parallel,
    /// Atoms are split off (merged in) one at a time.
    Serial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Handoff {
    /// Parameters swapped instantaneously.
    Sudden,
    /// Potential and interaction interpolated linearly over `duration`.
    Ramp { duration: f64 },
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    /// Stage I trap; its `d` is the initial (Mott) separation.
    pub stage1: TrapConfig,
    /// Stage II trap; its `d` is the final cat separation.
    pub stage2: TrapConfig,
    /// Stage III trap; its `d` is the final branch separation.
    pub stage3: TrapConfig,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    /// Phases φ_i applied to the right-branch atoms.
    pub phases: Vec<f64>,
    pub mode: Mode,
    pub handoff: Handoff,
    /// Extra relative depth of the right branch's stage-III wells.
    pub branch_asymmetry: f64,
    pub retention_floor: f64,
    pub spacing: f64,
    /// Box margin beyond the outermost well, in units of σ.
    pub margin_sigmas: f64,
    pub dt: f64,
    pub splitter: Splitter,
    pub delta_scan: usize,
    pub eigen: EigenOptions,
}

impl ProtocolRun {
    pub fn n_particles(&self) -> usize {
        self.stage1.n_particles
    }

    pub fn validate(&self) -> Result<()> {
        for (cfg, stage) in [(&self.stage1, Stage::I), (&self.stage2, Stage::II), (&self.stage3, Stage::III)] {
            cfg.validate()?;
            if cfg.stage != stage {
                return Err(Error::Config(format!("stage {} slot holds a stage {} trap", stage.name(), cfg.stage.name())));
            }
            if cfg.n_particles != self.n_particles() {
                return Err(Error::Config("all stages must hold the same number of atoms".into()));
            }
        }
        if self.phases.len() != self.n_particles() {
            return Err(Error::Config(format!("{} phases for {} atoms", self.phases.len(), self.n_particles())));
        }
        for (v, name) in [(self.v1, "v1"), (self.v2, "v2"), (self.v3, "v3")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.spacing > 0.0 && self.dt > 0.0 && self.margin_sigmas > 0.0) {
            return Err(Error::Config("spacing, dt and margin must be positive".into()));
        }
        if let Handoff::Ramp { duration } = self.handoff {
            if !(duration > 0.0) {
                return Err(Error::Config("handoff ramp duration must be positive".into()));
            }
        }
        let steps = self.stage2.d / self.spacing;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "cat separation {} must be a whole number of grid spacings ({})",
                self.stage2.d, self.spacing
            )));
        }
        Ok(())
    }

    fn opts(&self) -> PropagatorOptions {
        PropagatorOptions { dt: self.dt, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct StageMetric {
    pub name: String,
    /// Probability of being where the stage should leave the system.
    pub retention: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct MiState {
    pub state: Vec<Complex64>,
    /// Largest |⟨w_i|w_j⟩| between distinct well orbitals.
    pub max_orbital_overlap: f64,
    /// Wells closer than 4σ.
    pub overlapping: bool,
}

/// Symmetrised product of the single-particle ground orbitals of each
/// isolated well of `cfg` (one atom per well).
pub fn mi_state_preparation(disc: &Discretization, cfg: &TrapConfig, eigen: &EigenOptions) -> Result<MiState> {
    cfg.validate()?;
    let n = cfg.n_particles;
    if cfg.stage == Stage::II || cfg.q.len() != n {
        return Err(Error::Config("Mott state needs one well per atom".into()));
    }
    let grid = *disc.grid();
    let single = Discretization::new(grid, 1)?;
    let centers = cfg.well_centers();
    let mut orbitals = Vec::with_capacity(n);
    for (i, &c) in centers.iter().enumerate() {
        let well = TrapConfig { stage: Stage::I, q: vec![cfg.q[i]], d: 0.0, n_particles: 1, ..cfg.clone() };
        let mut h = Hamiltonian::new(&single, &well)?;
        h.set_centers(&[c])?;
        let g = h.eigensolve(1, eigen, &[])?;
        let scale = grid.spacing().sqrt().recip();
        orbitals.push(g.vectors[0].iter().map(|&x| Complex64::new(x * scale, 0.0)).collect::<Vec<_>>());
    }
    let mut max_overlap: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let o: Complex64 = orbitals[i].iter().zip(&orbitals[j]).map(|(a, b)| a.conj() * b).sum();
            max_overlap = max_overlap.max(o.norm() * grid.spacing());
        }
    }
    let dense = product_state(&grid, n, &orbitals)?;
    let mut state = disc.project(&dense.state)?;
    let norm = cnorm(&state);
    state.iter_mut().for_each(|c| *c /= norm);
    Ok(MiState { state, max_orbital_overlap: max_overlap, overlapping: cfg.d < 4.0 * cfg.sigma })
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub stages: Vec<StageMetric>,
    pub switches: Vec<(String, SwitchReport)>,
    pub cat: Option<CatParameters>,
    pub branch_phase: Option<f64>,
    pub branch_overlap: Option<f64>,
    pub theta_total: Option<f64>,
    pub visibility_total: Option<f64>,
    pub model: Option<MeasurementModel>,
    pub fringe: Vec<FringePoint>,
    pub p_plus: Option<f64>,
    pub failed_stage: Option<String>,
}

impl ProtocolReport {
    pub fn success(&self) -> bool {
        self.failed_stage.is_none() && self.model.is_some()
    }

    fn check(&mut self, floor: f64) -> bool {
        if let Some(last) = self.stages.last() {
            if last.retention < floor {
                self.failed_stage = Some(last.name.clone());
                return false;
            }
        }
        true
    }
}

fn ramp_for(cfg: &TrapConfig, d_from: f64, d_to: f64, v: f64, mode: Mode) -> Result<Ramp> {
    match mode {
        Mode::Parallel => Ok(Ramp::Linear(Schedule::new(d_from, d_to, v)?)),
        Mode::Serial => {
            let (far, merge) = if d_to >= d_from { (d_to, false) } else { (d_from, true) };
            if d_from.min(d_to) != 0.0 {
                return Err(Error::Config("serial mode needs one end of the ramp at d = 0".into()));
            }
            Ok(Ramp::Serial(SerialSchedule { final_centers: cfg.with_separation(far).well_centers(), speed: v, merge }))
        }
    }
}

/// Carries `psi` (on `ham`'s trap) to the trap `to` either by a sudden swap or
/// a linear ramp, returning the new state and the weight on the new ground state.
fn hand_over(
    disc: &Discretization,
    psi: Vec<Complex64>,
    from: &TrapConfig,
    to: &TrapConfig,
    handoff: Handoff,
    run: &ProtocolRun,
) -> Result<(Vec<Complex64>, f64, SwitchReport)> {
    let sudden = sudden_switch(disc, &psi, from, to, 4, &run.eigen)?;
    match handoff {
        Handoff::Sudden => {
            let g = sudden.ground_overlap;
            Ok((psi, g, sudden))
        }
        Handoff::Ramp { duration } => {
            let mut h = Hamiltonian::new(disc, from)?;
            let ramp = Ramp::Blend { to: to.clone(), duration };
            let p = propagate(&mut h, &psi, &ramp, &run.opts())?;
            let target = Hamiltonian::new(disc, to)?.eigensolve(1, &run.eigen, &[])?;
            let g = projections(&target.vectors, &p.state)[0];
            Ok((p.state, g, sudden))
        }
    }
}

/// Runs stages I–IV. Stops at the first stage whose retention falls below
/// the floor; the report then names that stage.
pub fn run_protocol(run: &ProtocolRun) -> Result<ProtocolReport> {
    run.validate()?;
    let n = run.n_particles();
    let h = run.spacing;
    let s1 = &run.stage1;
    let s2 = &run.stage2;
    let s3 = &run.stage3;
    let sigma = s1.sigma.max(s2.sigma).max(s3.sigma);
    let half = [s1.extent_at(s1.d), s2.extent_at(s2.d), s3.extent_at(s3.d)].into_iter().fold(0.0, f64::max)
        + run.margin_sigmas * sigma;
    let grid = Grid::symmetric(half, h)?;
    let disc = Discretization::new(grid, n)?;
    let opts = run.opts();
    let mut report = ProtocolReport {
        stages: Vec::new(),
        switches: Vec::new(),
        cat: None,
        branch_phase: None,
        branch_overlap: None,
        theta_total: None,
        visibility_total: None,
        model: None,
        fringe: Vec::new(),
        p_plus: None,
        failed_stage: None,
    };

    // Stage I: Mott state merged into one well.
    let mi = mi_state_preparation(&disc, s1, &run.eigen)?;
    let merged1 = s1.with_separation(0.0);
    let mut ham = Hamiltonian::new(&disc, s1)?;
    let ramp = ramp_for(s1, s1.d, 0.0, run.v1, run.mode)?;
    let target = final_spectrum(&ham, &ramp, 4, &run.eigen)?;
    let r1 = sweep_and_project(&mut ham, &mi.state, &ramp, &target, &opts)?;
    report.stages.push(StageMetric {
        name: "stage I".into(),
        retention: r1.ground_probability,
        detail: format!(
            "fusion at v = {}; orbital overlap {:.3e}{}; excited weights {:?}",
            run.v1,
            mi.max_orbital_overlap,
            if mi.overlapping { " (wells overlap)" } else { "" },
            &r1.projections[1..]
        ),
    });
    if !report.check(run.retention_floor) {
        return Ok(report);
    }

    // Interaction switch to attractive, two-well trap at d = 0.
    let start2 = s2.with_separation(0.0);
    let (psi2, g2, sw) = hand_over(&disc, r1.state, &merged1, &start2, run.handoff, run)?;
    report.switches.push(("I→II".into(), sw));
    report.stages.push(StageMetric {
        name: "handoff I→II".into(),
        retention: g2,
        detail: format!("{:?}", run.handoff),
    });
    if !report.check(run.retention_floor) {
        return Ok(report);
    }

    // Stage II: cat generation.
    let mut ham2 = Hamiltonian::new(&disc, &start2)?;
    let ramp2 = Ramp::Linear(Schedule::new(0.0, s2.d, run.v2)?);
    let target2 = final_spectrum(&ham2, &ramp2, 4, &run.eigen)?;
    let r2 = sweep_and_project(&mut ham2, &psi2, &ramp2, &target2, &opts)?;
    let cat = extract_cat(&disc, &r2.state, &target2.states[0], &target2.states[1]);
    report.cat = Some(cat);
    report.stages.push(StageMetric {
        name: "stage II".into(),
        retention: r2.doublet_probability(),
        detail: format!(
            "split at v = {}: α = {:.6}, β = {:.6}, θ = {:.6}, V = {:.6}{}",
            run.v2,
            cat.alpha,
            cat.beta,
            cat.theta,
            cat.visibility,
            if cat.degenerate { " (doublet not localised)" } else { "" }
        ),
    });
    if !report.check(run.retention_floor) {
        return Ok(report);
    }

    // Stage III: each branch carried to the origin and split.
    let (l, r, _) = localized_doublet(&disc, &target2.states[0], &target2.states[1]);
    let shift = 0.5 * s2.d;
    let offset = shift / h;
    let grid3 = if (offset - offset.round()).abs() < 1e-6 {
        grid
    } else {
        Grid::new(grid.x_min + 0.5 * h, grid.x_max - 0.5 * h, grid.points - 1)?
    };
    let disc3 = if grid3.same_as(&grid) { disc.clone() } else { Discretization::new(grid3, n)? };
    let carry = |v: &[f64], by: f64| -> Result<Vec<Complex64>> {
        let dense = disc.to_wavefunction(&to_complex(v))?;
        let moved: WaveFunction = dense.translated_onto(&grid3, by)?;
        let mut c = disc3.project(&moved)?;
        let norm = cnorm(&c);
        c.iter_mut().for_each(|x| *x /= norm);
        Ok(c)
    };
    let branch_in = [carry(&l, shift)?, carry(&r, -shift)?];
    // the isolated stage-II well each branch sits in, recentred
    let well = |q: f64| TrapConfig {
        stage: Stage::III,
        v0: s2.v0 / n as f64,
        q: vec![q; n],
        d: 0.0,
        n_particles: n,
        sigma: s2.sigma,
        u0: s2.u0,
    };
    let from = [well(s2.q[0]), well(s2.q[1])];
    let to = [s3.with_separation(0.0), branch_config(&s3.with_separation(0.0), BranchSet::Right, run.branch_asymmetry)];
    let ramp3 = ramp_for(s3, 0.0, s3.d, run.v3, run.mode)?;
    let mut finals = Vec::new();
    for (b, name) in [(0usize, "left"), (1usize, "right")] {
        let (psi, g, sw) = hand_over(&disc3, branch_in[b].clone(), &from[b], &to[b], run.handoff, run)?;
        report.switches.push((format!("II→III {name}"), sw));
        report.stages.push(StageMetric {
            name: format!("handoff II→III ({name})"),
            retention: g,
            detail: format!("{:?}", run.handoff),
        });
        if !report.check(run.retention_floor) {
            return Ok(report);
        }
        let mut h3 = Hamiltonian::new(&disc3, &to[b])?;
        let target3 = final_spectrum(&h3, &ramp3, 1, &run.eigen)?;
        let r3 = sweep_and_project(&mut h3, &psi, &ramp3, &target3, &opts)?;
        report.stages.push(StageMetric {
            name: format!("stage III ({name})"),
            retention: r3.ground_probability,
            detail: format!("split at v = {}", run.v3),
        });
        if !report.check(run.retention_floor) {
            return Ok(report);
        }
        finals.push(r3.state);
    }
    let o = cdot(&finals[0], &finals[1]) / (cnorm(&finals[0]) * cnorm(&finals[1]));
    let phase3 = o.arg();
    report.branch_phase = Some(phase3);
    report.branch_overlap = Some(o.norm());

    // Stage IV: readout.
    let theta_total = wrap_phase(cat.theta + phase3);
    let v_total = cat.visibility * o.norm();
    let delta: f64 = run.phases.iter().sum();
    let mut model = MeasurementModel::from_visibility(n, v_total.min(1.0), theta_total, delta)?.with_splitter(run.splitter);
    if cat.alpha < cat.beta {
        std::mem::swap(&mut model.alpha, &mut model.beta);
    }
    report.theta_total = Some(theta_total);
    report.visibility_total = Some(v_total);
    report.p_plus = Some(coincidence_probability(&model)?);
    report.fringe = fringe_scan(&model, run.delta_scan.max(1))?;
    report.model = Some(model);
    Ok(report)
}

impl ProtocolReport {
    /// Human-readable summary of every stage metric.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for s in &self.stages {
            let _ = writeln!(out, "{:<24} retention {:.6}  {}", s.name, s.retention, s.detail);
        }
        for (name, sw) in &self.switches {
            let _ = writeln!(out, "{:<24} sudden-swap ground overlap {:.6}", format!("switch {name}"), sw.ground_overlap);
        }
        if let (Some(p), Some(o)) = (self.branch_phase, self.branch_overlap) {
            let _ = writeln!(out, "branch phase {p:.6e}, branch overlap {o:.6}");
        }
        if let (Some(t), Some(v)) = (self.theta_total, self.visibility_total) {
            let _ = writeln!(out, "theta_total {t:.6e}, visibility {v:.6}");
        }
        if let (Some(m), Some(p)) = (self.model, self.p_plus) {
            let _ = writeln!(out, "Delta {:.6}: P(+1) = {p:.6}, <prod s> = {:.6}", m.delta, 2.0 * p - 1.0);
        }
        match &self.failed_stage {
            Some(s) => {
                let _ = writeln!(out, "FAILED at {s}");
            }
            None => {
                let _ = writeln!(out, "protocol completed");
            }
        }
        out
    }

    pub fn stages_csv(&self) -> String {
        let mut out = String::from("stage,retention\n");
        for s in &self.stages {
            out.push_str(&format!("{},{:.16e}\n", s.name, s.retention));
        }
        out
    }
}

pub fn fringe_csv(points: &[FringePoint]) -> String {
    let mut out = String::from("delta,p_plus,expectation\n");
    for p in points {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.delta, p.p_plus, p.expectation));
    }
    out
}

/// One line per shot: index, the ±1 outcomes, and their product.
pub fn records_csv(samples: &Samples) -> String {
    let n = samples.records.first().map_or(0, |r| r.len());
    let mut out = String::from("shot");
    for k in 1..=n {
        out.push_str(&format!(",s{k}"));
    }
    out.push_str(",product\n");
    for (i, r) in samples.records.iter().enumerate() {
        out.push_str(&i.to_string());
        for s in r {
            out.push_str(&format!(",{s}"));
        }
        let p: i32 = r.iter().map(|&s| s as i32).product();
        out.push_str(&format!(",{p}\n"));
    }
    out
}
