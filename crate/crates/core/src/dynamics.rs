//! Time evolution under moving wells.
//!
//! Crank–Nicolson with the Hamiltonian frozen at the step midpoint. Each
//! step solves the complex-symmetric system `(1 + iτ(H − s)) x = (1 − iτ(H − s)) ψ`,
//! `τ = dt/2`, by Jacobi-preconditioned COCG. The offset `s` is the current
//! Rayleigh quotient, so the dominant component barely rotates (small phase
//! error, good initial guesses); the removed global phase `e^{−i∫s dt}` is
//! restored afterwards.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::linalg::{cdot, cdotu, cnorm, real_overlap, to_complex};
use crate::operator::{Discretization, Hamiltonian, SpectrumPoint, SymmetricOperator};
use crate::potential::{Schedule, Stage, TrapConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOptions {
    pub dt: f64,
    /// Relative residual of each linear solve.
    pub tol: f64,
    pub max_iter: usize,
    /// Record a trajectory point every this many steps (0: endpoints only).
    pub record_every: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { dt: 2e-3, tol: 1e-12, max_iter: 1000, record_every: 0 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub max_residual: f64,
}

/// Preconditioned conjugate orthogonal CG workspace.
struct Cocg {
    b: Vec<Complex64>,
    r: Vec<Complex64>,
    z: Vec<Complex64>,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    hx: Vec<Complex64>,
    inv_diag: Vec<Complex64>,
}

impl Cocg {
    fn new(n: usize) -> Self {
        let v = || vec![ZERO; n];
        Self { b: v(), r: v(), z: v(), p: v(), q: v(), hx: v(), inv_diag: v() }
    }

    /// `out = x + iτ (H x − s x)`
    fn apply_a<O: SymmetricOperator + ?Sized>(op: &O, tau: f64, shift: f64, x: &[Complex64], hx: &mut [Complex64]) {
        op.apply_complex(x, hx);
        hx.par_iter_mut().zip(x.par_iter()).for_each(|(h, &x)| *h = x + I * tau * (*h - x * shift));
    }

    /// One Crank–Nicolson step in place with the energy offset set to the
    /// Rayleigh quotient of `psi`; returns iterations, final relative
    /// residual and the offset used.
    fn step<O: SymmetricOperator + ?Sized>(
        &mut self,
        op: &O,
        tau: f64,
        psi: &mut [Complex64],
        tol: f64,
        max_iter: usize,
    ) -> std::result::Result<(usize, f64, f64), f64> {
        op.apply_complex(psi, &mut self.hx);
        let shift = cdot(psi, &self.hx).re / cdot(psi, psi).re;
        self.b
            .par_iter_mut()
            .zip(psi.par_iter().zip(self.hx.par_iter()))
            .for_each(|(b, (&x, &h))| *b = x - I * tau * (h - x * shift));
        self.inv_diag
            .par_iter_mut()
            .zip(op.diagonal().par_iter())
            .for_each(|(w, &d)| *w = (Complex64::new(1.0, 0.0) + I * tau * (d - shift)).inv());
        // Euler predictor as the initial guess
        psi.par_iter_mut().zip(self.b.par_iter()).for_each(|(x, &b)| *x = b * 2.0 - *x);
        let bnorm = cnorm(&self.b).max(f64::MIN_POSITIVE);

        Self::apply_a(op, tau, shift, psi, &mut self.q);
        self.r.par_iter_mut().zip(self.b.par_iter().zip(self.q.par_iter())).for_each(|(r, (&b, &q))| *r = b - q);
        let mut res = cnorm(&self.r) / bnorm;
        if res <= tol {
            return Ok((0, res, shift));
        }
        self.z.par_iter_mut().zip(self.r.par_iter().zip(self.inv_diag.par_iter())).for_each(|(z, (&r, &w))| *z = r * w);
        self.p.copy_from_slice(&self.z);
        let mut rho = cdotu(&self.r, &self.z);
        for it in 1..=max_iter {
            Self::apply_a(op, tau, shift, &self.p, &mut self.q);
            let pq = cdotu(&self.p, &self.q);
            if pq.norm() == 0.0 {
                return Err(res);
            }
            let alpha = rho / pq;
            psi.par_iter_mut().zip(self.p.par_iter()).for_each(|(x, &p)| *x += alpha * p);
            self.r.par_iter_mut().zip(self.q.par_iter()).for_each(|(r, &q)| *r -= alpha * q);
            res = cnorm(&self.r) / bnorm;
            if res <= tol {
                return Ok((it, res, shift));
            }
            self.z
                .par_iter_mut()
                .zip(self.r.par_iter().zip(self.inv_diag.par_iter()))
                .for_each(|(z, (&r, &w))| *z = r * w);
            let rho_next = cdotu(&self.r, &self.z);
            let beta = rho_next / rho;
            rho = rho_next;
            self.p.par_iter_mut().zip(self.z.par_iter()).for_each(|(p, &z)| *p = z + beta * *p);
        }
        Err(res)
    }
}

/// Crank–Nicolson evolution of `psi0` over `[0, duration]` for any real
/// symmetric operator whose time dependence is set by `update(op, t)`.
/// `observe(t, op, psi)` is called at `t = 0`, every `record_every` steps and
/// at the end (with the global phase of the final state already restored).
pub fn propagate_with<O, F, G>(
    op: &mut O,
    mut update: F,
    psi0: &[Complex64],
    duration: f64,
    opts: &PropagatorOptions,
    mut observe: G,
) -> Result<(Vec<Complex64>, StepStats)>
where
    O: SymmetricOperator,
    F: FnMut(&mut O, f64),
    G: FnMut(f64, &O, &[Complex64]),
{
    if !(opts.dt > 0.0 && duration >= 0.0) {
        return Err(Error::InvalidParameter("time step and duration must be positive".into()));
    }
    if psi0.len() != op.dim() {
        return Err(Error::GridMismatch(format!("state of length {} for operator of dimension {}", psi0.len(), op.dim())));
    }
    let norm0 = cnorm(psi0);
    if norm0 == 0.0 {
        return Err(Error::InvalidParameter("zero initial state".into()));
    }
    update(op, 0.0);
    observe(0.0, op, psi0);

    let steps = (duration / opts.dt).ceil().max(if duration > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps > 0 { duration / steps as f64 } else { 0.0 };
    let tau = 0.5 * dt;
    let mut psi = psi0.to_vec();
    let mut solver = Cocg::new(psi.len());
    let mut stats = StepStats::default();
    // accumulated ∫ s dt of the removed offsets
    let mut removed = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        update(op, t + 0.5 * dt);
        match solver.step(op, tau, &mut psi, opts.tol, opts.max_iter) {
            Ok((it, res, shift)) => {
                removed += shift * dt;
                stats.steps += 1;
                stats.total_iterations += it;
                stats.max_iterations = stats.max_iterations.max(it);
                stats.max_residual = stats.max_residual.max(res);
            }
            Err(residual) => return Err(Error::StepNotConverged { time: t, residual }),
        }
        let recorded = opts.record_every > 0 && (n + 1) % opts.record_every == 0 && n + 1 < steps;
        if recorded {
            update(op, t + dt);
            let phase = Complex64::from_polar(1.0, -removed);
            let shown: Vec<Complex64> = psi.iter().map(|c| c * phase).collect();
            observe(t + dt, op, &shown);
        }
    }
    let phase = Complex64::from_polar(1.0, -removed);
    psi.par_iter_mut().for_each(|c| *c *= phase);
    let drift = (cnorm(&psi) - norm0).abs() / norm0;
    if drift > 1e-6 {
        return Err(Error::Unstable { drift });
    }
    update(op, duration);
    if steps > 0 {
        observe(duration, op, &psi);
    }
    Ok((psi, stats))
}

/// Well layout when atoms are split off one at a time: in step `j` well `j`
/// leaves the merged cluster of wells `j..N` while the rest of the cluster
/// moves to the mean of its final positions. For two wells this coincides
/// with the symmetric parallel split.
#[derive(Debug, Clone, PartialEq)]
pub struct SerialSchedule {
    pub final_centers: Vec<f64>,
    pub speed: f64,
    /// Run backwards (merging in series).
    pub merge: bool,
}

impl SerialSchedule {
    fn cluster(&self, j: usize) -> f64 {
        let c = &self.final_centers[j..];
        c.iter().sum::<f64>() / c.len() as f64
    }

    fn step_length(&self, j: usize) -> f64 {
        (self.cluster(j + 1) - self.final_centers[j]).abs()
    }

    pub fn duration(&self) -> f64 {
        let n = self.final_centers.len();
        (0..n.saturating_sub(1)).map(|j| self.step_length(j)).sum::<f64>() / self.speed
    }

    pub fn centers_at(&self, t: f64) -> Vec<f64> {
        let total = self.duration();
        let mut t = t.clamp(0.0, total);
        if self.merge {
            t = total - t;
        }
        let c = &self.final_centers;
        let n = c.len();
        let mut out = vec![self.cluster(0); n];
        for j in 0..n.saturating_sub(1) {
            let len = self.step_length(j) / self.speed;
            let s = if len > 0.0 { (t / len).clamp(0.0, 1.0) } else { 1.0 };
            let from = self.cluster(j);
            let to = self.cluster(j + 1);
            out[j] = from + s * (c[j] - from);
            for o in &mut out[j + 1..] {
                *o = from + s * (to - from);
            }
            t -= len;
            if t <= 0.0 {
                break;
            }
        }
        out
    }
}

/// How the wells move during an evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Ramp {
    Linear(Schedule),
    Serial(SerialSchedule),
    /// Fixed trap at separation `d`.
    Hold { d: f64, duration: f64 },
    /// Linear interpolation of potential and interaction from the
    /// Hamiltonian's own trap to `to`.
    Blend { to: TrapConfig, duration: f64 },
}

impl Ramp {
    pub fn duration(&self) -> f64 {
        match self {
            Ramp::Linear(s) => s.duration(),
            Ramp::Serial(s) => s.duration(),
            Ramp::Hold { duration, .. } | Ramp::Blend { duration, .. } => *duration,
        }
    }

    /// Nominal separation at `t` (mean neighbour distance for serial ramps).
    pub fn separation_at(&self, t: f64) -> f64 {
        match self {
            Ramp::Linear(s) => s.separation_at(t),
            Ramp::Serial(s) => {
                let c = s.centers_at(t);
                if c.len() < 2 {
                    0.0
                } else {
                    (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64
                }
            }
            Ramp::Hold { d, .. } => *d,
            Ramp::Blend { to, .. } => to.d,
        }
    }

    pub fn apply(&self, h: &mut Hamiltonian, t: f64) {
        match self {
            Ramp::Linear(s) => h.set_separation(s.separation_at(t)),
            Ramp::Serial(s) => {
                // lengths always match: the schedule is built from the same config
                let _ = h.set_centers(&s.centers_at(t));
            }
            Ramp::Hold { d, .. } => h.set_separation(*d),
            Ramp::Blend { to, duration } => {
                let s = if *duration > 0.0 { (t / duration).clamp(0.0, 1.0) } else { 1.0 };
                let _ = h.set_blend(to, s);
            }
        }
    }

    /// Applies the final geometry.
    pub fn apply_end(&self, h: &mut Hamiltonian) {
        self.apply(h, self.duration());
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub d: f64,
    pub norm: f64,
    /// Probability that all atoms are left / right of the origin.
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: Vec<Complex64>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stats: StepStats,
    pub elapsed: f64,
    pub norm_drift: f64,
}

/// Evolves symmetric-sector coefficients under `ham` while `ramp` moves the wells.
pub fn propagate(ham: &mut Hamiltonian, psi0: &[Complex64], ramp: &Ramp, opts: &PropagatorOptions) -> Result<Propagation> {
    let disc = ham.discretization().clone();
    let mut trajectory = Vec::new();
    let norm0 = cnorm(psi0);
    let duration = ramp.duration();
    let (state, stats) = propagate_with(
        ham,
        |h, t| ramp.apply(h, t),
        psi0,
        duration,
        opts,
        |t, _, psi| {
            trajectory.push(TrajectoryPoint {
                t,
                d: ramp.separation_at(t),
                norm: cnorm(psi),
                left: disc.all_in_weight(psi, |x| x < 0.0),
                right: disc.all_in_weight(psi, |x| x > 0.0),
            })
        },
    )?;
    let norm_drift = (cnorm(&state) - norm0).abs();
    Ok(Propagation { state, trajectory, stats, elapsed: duration, norm_drift })
}

/// Probabilities `|⟨φ_i|ψ⟩|²` on real eigenvectors.
pub fn projections(states: &[Vec<f64>], psi: &[Complex64]) -> Vec<f64> {
    states.iter().map(|v| real_overlap(v, psi).norm_sqr()).collect()
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Final symmetric-sector coefficients.
    pub state: Vec<Complex64>,
    pub projections: Vec<f64>,
    pub ground_probability: f64,
    pub elapsed: f64,
    pub norm_drift: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stats: StepStats,
}

impl SweepResult {
    /// Combined weight of the two lowest final states.
    pub fn doublet_probability(&self) -> f64 {
        self.projections.iter().take(2).sum()
    }
}

/// Eigenstates at the end of a ramp.
pub fn final_spectrum(ham: &Hamiltonian, ramp: &Ramp, k: usize, eigen: &EigenOptions) -> Result<SpectrumPoint> {
    let mut h = ham.clone();
    ramp.apply_end(&mut h);
    let pairs = h.eigensolve(k, eigen, &[])?;
    Ok(SpectrumPoint { d: ramp.separation_at(ramp.duration()), energies: pairs.values, states: pairs.vectors, residuals: pairs.residuals })
}

/// Propagates and projects onto the adiabatic states `target` of the final trap.
pub fn sweep_and_project(
    ham: &mut Hamiltonian,
    psi0: &[Complex64],
    ramp: &Ramp,
    target: &SpectrumPoint,
    opts: &PropagatorOptions,
) -> Result<SweepResult> {
    let p = propagate(ham, psi0, ramp, opts)?;
    let projections = projections(&target.states, &p.state);
    Ok(SweepResult {
        ground_probability: projections.first().copied().unwrap_or(0.0),
        projections,
        state: p.state,
        elapsed: p.elapsed,
        norm_drift: p.norm_drift,
        trajectory: p.trajectory,
        stats: p.stats,
    })
}

#[derive(Debug, Clone)]
pub struct SwitchReport {
    /// `|⟨ground_after|ψ⟩|²`.
    pub ground_overlap: f64,
    /// Weights on the lowest states of the new trap.
    pub distribution: Vec<f64>,
    pub energies_after: Vec<f64>,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// Instantaneous change of trap parameters: the state is untouched and
/// decomposed on the spectrum of the new Hamiltonian.
pub fn sudden_switch(
    disc: &Discretization,
    psi: &[Complex64],
    cfg_before: &TrapConfig,
    cfg_after: &TrapConfig,
    k: usize,
    eigen: &EigenOptions,
) -> Result<SwitchReport> {
    let before = Hamiltonian::new(disc, cfg_before)?;
    let after = Hamiltonian::new(disc, cfg_after)?;
    if psi.len() != disc.dim() {
        return Err(Error::GridMismatch("state does not match discretisation".into()));
    }
    let pairs = after.eigensolve(k, eigen, &[])?;
    let n2 = cnorm(psi).powi(2);
    let distribution: Vec<f64> = projections(&pairs.vectors, psi).iter().map(|p| p / n2).collect();
    Ok(SwitchReport {
        ground_overlap: distribution[0],
        distribution,
        energies_after: pairs.values,
        energy_before: before.expectation(psi) / n2,
        energy_after: after.expectation(psi) / n2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatParameters {
    pub alpha: f64,
    pub beta: f64,
    /// Phase of the right component relative to the left one.
    pub theta: f64,
    /// Fringe contrast `2αβ/(α² + β²)`.
    pub visibility: f64,
    /// All-left weight of the left state and all-right weight of the right state.
    pub localization: (f64, f64),
    /// The doublet did not separate into localised states.
    pub degenerate: bool,
}

pub fn visibility(alpha: f64, beta: f64) -> f64 {
    let s = alpha * alpha + beta * beta;
    if s == 0.0 {
        0.0
    } else {
        2.0 * alpha * beta / s
    }
}

/// Localised left/right states spanned by a near-degenerate doublet: the
/// doublet combinations with the largest all-left and all-right weight,
/// each normalised with a positive coefficient sum. Built from separate
/// projectors so that mirror-symmetric doublets give mirror-image states.
pub fn localized_doublet(disc: &Discretization, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>, (f64, f64)) {
    let basis = disc.basis();
    let grid = disc.grid();
    let side = |inside: &dyn Fn(f64) -> bool| -> Vec<f64> {
        let mask: Vec<bool> = (0..grid.points).map(|i| inside(grid.x(i))).collect();
        let (mut p00, mut p01, mut p11) = (0.0, 0.0, 0.0);
        for s in 0..lower.len() {
            if basis.state(s).iter().all(|&k| mask[k as usize]) {
                p00 += lower[s] * lower[s];
                p01 += lower[s] * upper[s];
                p11 += upper[s] * upper[s];
            }
        }
        // eigenvector of [[p00, p01], [p01, p11]] with the larger eigenvalue
        let phi = 0.5 * (2.0 * p01).atan2(p00 - p11);
        let (c, s) = (phi.cos(), phi.sin());
        let mut v: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| c * a + s * b).collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let l = side(&|x| x < 0.0);
    let r = side(&|x| x > 0.0);
    let loc_l = disc.all_in_weight_real(&l, |x| x < 0.0);
    let loc_r = disc.all_in_weight_real(&r, |x| x > 0.0);
    (l, r, (loc_l, loc_r))
}

/// Cat amplitudes of `psi` relative to the localised doublet of the final
/// two-well trap. When the doublet is not localised (each state less than
/// 90% on its side) the amplitudes fall back to the all-left / all-right
/// weights and `degenerate` is set.
pub fn extract_cat(disc: &Discretization, psi: &[Complex64], lower: &[f64], upper: &[f64]) -> CatParameters {
    let (l, r, loc) = localized_doublet(disc, lower, upper);
    let al = real_overlap(&l, psi);
    let ar = real_overlap(&r, psi);
    let degenerate = loc.0 < 0.9 || loc.1 < 0.9;
    let (alpha, beta) = if degenerate {
        (disc.all_in_weight(psi, |x| x < 0.0).sqrt(), disc.all_in_weight(psi, |x| x > 0.0).sqrt())
    } else {
        (al.norm(), ar.norm())
    };
    let theta = wrap_phase(ar.arg() - al.arg());
    CatParameters { alpha, beta, theta, visibility: visibility(alpha, beta), localization: loc, degenerate }
}

/// Maps a phase into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y - tau
    } else {
        y
    }
}

#[derive(Debug, Clone)]
pub struct ThetaRow {
    pub v: f64,
    pub projections: Vec<f64>,
    pub cat: CatParameters,
    pub doublet_probability: f64,
    pub norm_drift: f64,
}

/// Runs the two-well split from `psi0` at every speed in `speeds` and
/// extracts the cat parameters at `d_end`. `target` must hold at least the
/// two lowest eigenstates at `d_end`.
pub fn theta_vs_speed(
    ham: &Hamiltonian,
    psi0: &[Complex64],
    d_start: f64,
    d_end: f64,
    speeds: &[f64],
    target: &SpectrumPoint,
    opts: &PropagatorOptions,
) -> Result<Vec<ThetaRow>> {
    if ham.config().stage != Stage::II {
        return Err(Error::Config("cat extraction needs the two-well trap".into()));
    }
    if target.states.len() < 2 {
        return Err(Error::InvalidParameter("need the two lowest final states".into()));
    }
    if speeds.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("speeds must be positive".into()));
    }
    speeds
        .par_iter()
        .map(|&v| {
            let mut h = ham.clone();
            let ramp = Ramp::Linear(Schedule::new(d_start, d_end, v)?);
            let res = sweep_and_project(&mut h, psi0, &ramp, target, opts)?;
            let cat = extract_cat(ham.discretization(), &res.state, &target.states[0], &target.states[1]);
            Ok(ThetaRow {
                v,
                doublet_probability: res.doublet_probability(),
                projections: res.projections,
                cat,
                norm_drift: res.norm_drift,
            })
        })
        .collect()
}

/// Which half of the cat a stage-III branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSet {
    Left,
    Right,
}

/// Trap seen by a branch: the right branch's wells are all deeper by the
/// fraction `branch_asymmetry`.
pub fn branch_config(cfg: &TrapConfig, set: BranchSet, branch_asymmetry: f64) -> TrapConfig {
    let mut c = cfg.clone();
    if set == BranchSet::Right {
        c.q.iter_mut().for_each(|q| *q += branch_asymmetry);
    }
    c
}

#[derive(Debug, Clone)]
pub struct BranchPhase {
    /// `arg⟨ψ_L(T)|ψ_R(T)⟩`: phase gained by the right branch relative to the left.
    pub phase: f64,
    /// `|⟨ψ_L(T)|ψ_R(T)⟩|`, the contrast surviving the branch evolutions.
    pub overlap: f64,
    /// Final ground-state probabilities of the two branches.
    pub retention: (f64, f64),
    pub states: (Vec<Complex64>, Vec<Complex64>),
}

/// Evolves both branches of a split cat independently through the
/// three-well ramp and compares them. `psi_left`/`psi_right` are the branch
/// states already centred on the stage-III grid.
pub fn branch_phase(
    ham_left: &Hamiltonian,
    branch_asymmetry: f64,
    psi_left: &[Complex64],
    psi_right: &[Complex64],
    ramp: &Ramp,
    eigen: &EigenOptions,
    opts: &PropagatorOptions,
) -> Result<BranchPhase> {
    let mut hl = ham_left.clone();
    let mut hr = ham_left.clone();
    hr.set_config(&branch_config(ham_left.config(), BranchSet::Right, branch_asymmetry))?;
    let run = |h: &mut Hamiltonian, psi: &[Complex64]| -> Result<SweepResult> {
        let target = final_spectrum(h, ramp, 1, eigen)?;
        sweep_and_project(h, psi, ramp, &target, opts)
    };
    let (l, r) = rayon::join(|| run(&mut hl, psi_left), || run(&mut hr, psi_right));
    let (l, r) = (l?, r?);
    let o = cdot(&l.state, &r.state) / (cnorm(&l.state) * cnorm(&r.state));
    Ok(BranchPhase {
        phase: o.arg(),
        overlap: o.norm(),
        retention: (l.ground_probability, r.ground_probability),
        states: (l.state, r.state),
    })
}

/// Real eigenvector as a complex initial state.
pub fn as_state(v: &[f64]) -> Vec<Complex64> {
    to_complex(v)
}
