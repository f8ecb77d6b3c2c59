//! The N-boson Hamiltonian `Σ_i [−∂²_i + V(x_i)] + U₀ Σ_{i<j} δ(x_i − x_j)`
//! discretised with second-order central differences (Dirichlet walls) and
//! the contact term regularised as `U₀/h` on coincident grid nodes.
//!
//! Operator application is matrix-free. Eigensolves and time stepping work
//! in the permutation-symmetric sector ([`BosonicBasis`]); [`Hamiltonian::apply`]
//! acts on dense [`WaveFunction`]s of any symmetry.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::BosonicBasis;
use crate::eigen::{lowest_eigenpairs, EigenOptions, Eigenpairs};
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::linalg::dot;
use crate::potential::TrapConfig;

/// Real symmetric operator usable by the eigensolver and the propagator.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_real(&self, x: &[f64], y: &mut [f64]);
    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]);
    /// Diagonal matrix elements.
    fn diagonal(&self) -> &[f64];
}

/// Grid plus the bosonic basis built on it; cheap to clone.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    basis: Arc<BosonicBasis>,
}

impl Discretization {
    pub fn new(grid: Grid, n_particles: usize) -> Result<Self> {
        let basis = Arc::new(BosonicBasis::new(grid.points, n_particles)?);
        Ok(Self { grid, basis })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &BosonicBasis {
        &self.basis
    }

    pub fn n_particles(&self) -> usize {
        self.basis.n_particles()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn to_wavefunction(&self, coeffs: &[Complex64]) -> Result<WaveFunction> {
        self.basis.to_wavefunction(&self.grid, coeffs)
    }

    pub fn project(&self, psi: &WaveFunction) -> Result<Vec<Complex64>> {
        self.grid.check_same(psi.grid())?;
        self.basis.project(psi)
    }

    /// Probability that all particles sit on nodes selected by `inside`.
    pub fn all_in_weight(&self, coeffs: &[Complex64], inside: impl Fn(f64) -> bool) -> f64 {
        let flags: Vec<bool> = (0..self.grid.points).map(|i| inside(self.grid.x(i))).collect();
        coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| self.basis.state(*s).iter().all(|&k| flags[k as usize]))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn all_in_weight_real(&self, v: &[f64], inside: impl Fn(f64) -> bool) -> f64 {
        let flags: Vec<bool> = (0..self.grid.points).map(|i| inside(self.grid.x(i))).collect();
        v.iter()
            .enumerate()
            .filter(|(s, _)| self.basis.state(*s).iter().all(|&k| flags[k as usize]))
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Sum of the coefficients; fixes the sign convention of real eigenvectors.
    pub fn weight_sum(v: &[f64]) -> f64 {
        v.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    disc: Discretization,
    cfg: TrapConfig,
    potential: Vec<f64>,
    diag: Vec<f64>,
    inv_h2: f64,
    geometry: Geometry,
    /// Interaction strength currently in effect.
    u0: f64,
}

/// Deviations from the equally spaced trap described by the config.
#[derive(Debug, Clone, PartialEq)]
enum Geometry {
    Regular,
    /// Explicit well positions.
    Centers(Vec<f64>),
    /// Linear interpolation of potential and interaction towards `to`.
    Blend { to: TrapConfig, s: f64 },
}

impl Hamiltonian {
    pub fn new(disc: &Discretization, cfg: &TrapConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.n_particles != disc.n_particles() {
            return Err(Error::Config(format!(
                "trap has {} particles, discretisation {}",
                cfg.n_particles,
                disc.n_particles()
            )));
        }
        let h = disc.grid.spacing();
        let mut out = Self {
            disc: disc.clone(),
            cfg: cfg.clone(),
            potential: Vec::new(),
            diag: vec![0.0; disc.dim()],
            inv_h2: 1.0 / (h * h),
            geometry: Geometry::Regular,
            u0: cfg.u0,
        };
        out.rebuild_diagonal();
        Ok(out)
    }

    pub fn config(&self) -> &TrapConfig {
        &self.cfg
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn grid(&self) -> &Grid {
        &self.disc.grid
    }

    /// Trap sampled on the grid nodes.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Interaction strength in effect (differs from the config while blending).
    pub fn interaction(&self) -> f64 {
        self.u0
    }

    /// Moves the wells; only the diagonal changes.
    pub fn set_separation(&mut self, d: f64) {
        if d != self.cfg.d || self.geometry != Geometry::Regular {
            self.cfg.d = d;
            self.geometry = Geometry::Regular;
            self.rebuild_diagonal();
        }
    }

    /// Places the wells at arbitrary positions (one per asymmetry entry).
    pub fn set_centers(&mut self, centers: &[f64]) -> Result<()> {
        if centers.len() != self.cfg.q.len() {
            return Err(Error::Config(format!("{} centres for {} wells", centers.len(), self.cfg.q.len())));
        }
        if !matches!(&self.geometry, Geometry::Centers(c) if c.as_slice() == centers) {
            self.geometry = Geometry::Centers(centers.to_vec());
            self.rebuild_diagonal();
        }
        Ok(())
    }

    /// Uses `(1 − s)·(this trap) + s·to` for both potential and interaction.
    pub fn set_blend(&mut self, to: &TrapConfig, s: f64) -> Result<()> {
        if to.n_particles != self.cfg.n_particles {
            return Err(Error::Config("particle number cannot change".into()));
        }
        let next = Geometry::Blend { to: to.clone(), s };
        if self.geometry != next {
            self.geometry = next;
            self.rebuild_diagonal();
        }
        Ok(())
    }

    pub fn well_centers(&self) -> Vec<f64> {
        match &self.geometry {
            Geometry::Centers(c) => c.clone(),
            _ => self.cfg.well_centers(),
        }
    }

    /// Swaps in new trap parameters on the same discretisation.
    pub fn set_config(&mut self, cfg: &TrapConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.n_particles != self.disc.n_particles() {
            return Err(Error::Config("particle number cannot change".into()));
        }
        self.cfg = cfg.clone();
        self.geometry = Geometry::Regular;
        self.rebuild_diagonal();
        Ok(())
    }

    fn rebuild_diagonal(&mut self) {
        let grid = self.disc.grid;
        let xs = grid.coordinates();
        let (potential, u0) = match &self.geometry {
            Geometry::Regular => (self.cfg.sample(&xs), self.cfg.u0),
            Geometry::Centers(c) => (xs.iter().map(|&x| self.cfg.potential_with_centers(x, c)).collect(), self.cfg.u0),
            Geometry::Blend { to, s } => (
                xs.iter().map(|&x| (1.0 - s) * self.cfg.potential(x) + s * to.potential(x)).collect(),
                (1.0 - s) * self.cfg.u0 + s * to.u0,
            ),
        };
        self.potential = potential;
        self.u0 = u0;
        let basis = &self.disc.basis;
        let n = basis.n_particles();
        let kinetic = 2.0 * n as f64 * self.inv_h2;
        let contact = self.u0 / grid.spacing();
        let pot = &self.potential;
        self.diag.par_iter_mut().enumerate().for_each(|(r, out)| {
            let v: f64 = basis.state(r).iter().map(|&k| pot[k as usize]).sum();
            *out = kinetic + v + contact * basis.coincident_pairs(r) as f64;
        });
    }

    fn apply_generic<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Send + Sync + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let basis = &self.disc.basis;
        // −√f/h² for every possible squared bosonic factor f
        let mut table = [0.0f64; 32];
        for (f, w) in table.iter_mut().enumerate() {
            *w = -(f as f64).sqrt() * self.inv_h2;
        }
        y.par_chunks_mut(4096).enumerate().for_each(|(chunk, ys)| {
            let base = chunk * 4096;
            for (off, out) in ys.iter_mut().enumerate() {
                let r = base + off;
                let (cols, weights) = basis.hops(r);
                let mut acc = x[r] * self.diag[r];
                for (&c, &f) in cols.iter().zip(weights) {
                    acc = acc + x[c as usize] * table[f as usize];
                }
                *out = acc;
            }
        });
    }

    /// Applies the operator to a dense wavefunction of arbitrary symmetry.
    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.disc.grid.check_same(psi.grid())?;
        let n = psi.n_particles();
        if n != self.cfg.n_particles {
            return Err(Error::GridMismatch(format!("{} particles vs {}", n, self.cfg.n_particles)));
        }
        let m = self.disc.grid.points;
        let amps = psi.amplitudes();
        let contact = self.u0 / self.disc.grid.spacing();
        let strides: Vec<usize> = (0..n).map(|k| m.pow((n - 1 - k) as u32)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        out.par_iter_mut().enumerate().for_each(|(idx, o)| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut coords = [0usize; crate::grid::MAX_PARTICLES];
            for k in 0..n {
                coords[k] = (idx / strides[k]) % m;
            }
            let a = amps[idx];
            for k in 0..n {
                let c = coords[k];
                let mut lap = a * 2.0;
                if c > 0 {
                    lap -= amps[idx - strides[k]];
                }
                if c + 1 < m {
                    lap -= amps[idx + strides[k]];
                }
                acc += lap * self.inv_h2 + a * self.potential[c];
                for j in k + 1..n {
                    if coords[j] == c {
                        acc += a * contact;
                    }
                }
            }
            *o = acc;
        });
        WaveFunction::new(self.disc.grid, n, out)
    }

    /// Rayleigh quotient of a normalised real vector.
    pub fn expectation_real(&self, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.apply_real(v, &mut hv);
        dot(v, &hv)
    }

    pub fn expectation(&self, c: &[Complex64]) -> f64 {
        let mut hc = vec![Complex64::new(0.0, 0.0); c.len()];
        self.apply_complex(c, &mut hc);
        crate::linalg::cdot(c, &hc).re
    }

    /// `k` lowest bosonic eigenpairs, energies ascending, each eigenvector
    /// normalised with a non-negative coefficient sum.
    pub fn eigensolve(&self, k: usize, opts: &EigenOptions, guess: &[Vec<f64>]) -> Result<Eigenpairs> {
        let mut pairs = lowest_eigenpairs(self, k, opts, guess)?;
        for v in &mut pairs.vectors {
            let n = crate::linalg::norm(v);
            let sign = if Discretization::weight_sum(v) < 0.0 { -1.0 } else { 1.0 };
            v.iter_mut().for_each(|x| *x *= sign / n);
        }
        Ok(pairs)
    }
}

impl SymmetricOperator for Hamiltonian {
    fn dim(&self) -> usize {
        self.disc.dim()
    }

    fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        self.apply_generic(x, y);
    }

    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_generic(x, y);
    }

    fn diagonal(&self) -> &[f64] {
        &self.diag
    }
}

/// Eigenpairs at one separation.
#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub d: f64,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

pub fn eigensolve(h: &Hamiltonian, k: usize, opts: &EigenOptions) -> Result<SpectrumPoint> {
    let pairs = h.eigensolve(k, opts, &[])?;
    Ok(SpectrumPoint { d: h.config().d, energies: pairs.values, states: pairs.vectors, residuals: pairs.residuals })
}

/// Adiabatic levels along a separation scan.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    pub d: Vec<f64>,
    /// Energies per separation, ascending.
    pub levels: Vec<Vec<f64>>,
    /// `tracking[i][c]`: energy index at `d[i]` of the continuously followed
    /// curve `c` (curve `c` starts as level `c` at `d[0]`).
    pub tracking: Vec<Vec<usize>>,
    /// Smallest matched overlap between consecutive separations.
    pub min_overlap: Vec<f64>,
    /// Scan steps where two candidate overlaps were within 1e-3.
    pub ambiguous_steps: Vec<usize>,
    pub max_residual: f64,
    /// Eigenvectors at the final separation.
    pub final_states: Vec<Vec<f64>>,
    /// Ground-state vectors at every separation, kept on request.
    pub ground_states: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    GroundToFirst,
    FirstToSecond,
}

#[derive(Debug, Clone)]
pub struct GapSeries {
    pub values: Vec<f64>,
    pub min: f64,
    pub d_at_min: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub eigen: EigenOptions,
    pub keep_ground_states: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { eigen: EigenOptions::default(), keep_ground_states: false }
    }
}

pub fn scan_levels(
    disc: &Discretization,
    template: &TrapConfig,
    d_list: &[f64],
    k: usize,
    opts: &ScanOptions,
) -> Result<SpectrumCurve> {
    if d_list.is_empty() {
        return Err(Error::InvalidParameter("empty separation list".into()));
    }
    let increasing = d_list.windows(2).all(|w| w[1] > w[0]);
    let decreasing = d_list.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter("separation list must be strictly monotone".into()));
    }
    let mut h = Hamiltonian::new(disc, &template.with_separation(d_list[0]))?;
    let mut levels = Vec::with_capacity(d_list.len());
    let mut tracking: Vec<Vec<usize>> = Vec::with_capacity(d_list.len());
    let mut min_overlap = Vec::with_capacity(d_list.len());
    let mut ambiguous_steps = Vec::new();
    let mut ground_states = opts.keep_ground_states.then(Vec::new);
    let mut prev: Vec<Vec<f64>> = Vec::new();
    let mut max_residual: f64 = 0.0;

    for (i, &d) in d_list.iter().enumerate() {
        h.set_separation(d);
        let pairs = h.eigensolve(k, &opts.eigen, &prev)?;
        max_residual = pairs.residuals.iter().cloned().fold(max_residual, f64::max);
        if i == 0 {
            tracking.push((0..k).collect());
            min_overlap.push(1.0);
        } else {
            let overlaps: Vec<Vec<f64>> =
                prev.iter().map(|p| pairs.vectors.iter().map(|v| dot(p, v).abs()).collect()).collect();
            let (assign, worst, ambiguous) = match_levels(&overlaps);
            if ambiguous {
                ambiguous_steps.push(i);
            }
            let last = tracking.last().unwrap();
            tracking.push(last.iter().map(|&lvl| assign[lvl]).collect());
            min_overlap.push(worst);
        }
        if let Some(g) = ground_states.as_mut() {
            g.push(pairs.vectors[0].clone());
        }
        levels.push(pairs.values);
        prev = pairs.vectors;
    }
    Ok(SpectrumCurve {
        d: d_list.to_vec(),
        levels,
        tracking,
        min_overlap,
        ambiguous_steps,
        max_residual,
        final_states: prev,
        ground_states,
    })
}

/// Greedy maximal-overlap assignment of previous levels to current ones.
/// Returns `assign[prev] = current`, the smallest matched overlap, and
/// whether any choice was ambiguous (ties are resolved by energy order).
fn match_levels(overlaps: &[Vec<f64>]) -> (Vec<usize>, f64, bool) {
    let k = overlaps.len();
    let mut pairs: Vec<(usize, usize, f64)> =
        (0..k).flat_map(|p| (0..k).map(move |c| (p, c, overlaps[p][c]))).collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut assign = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    let mut worst: f64 = 1.0;
    for (p, c, o) in pairs {
        if assign[p] == usize::MAX && !taken[c] {
            assign[p] = c;
            taken[c] = true;
            worst = worst.min(o);
        }
    }
    let ambiguous = (0..k).any(|p| {
        let mut row = overlaps[p].clone();
        row.sort_by(|a, b| b.total_cmp(a));
        row.len() > 1 && row[0] - row[1] < 1e-3 && row[0] > 0.1
    });
    if ambiguous {
        // fall back to energy order among the tied rows
        for p in 0..k {
            let mut row: Vec<(usize, f64)> = overlaps[p].iter().cloned().enumerate().collect();
            row.sort_by(|a, b| b.1.total_cmp(&a.1));
            if row.len() > 1 && row[0].1 - row[1].1 < 1e-3 && row[0].1 > 0.1 {
                let lo = row[0].0.min(row[1].0);
                let hi = row[0].0.max(row[1].0);
                if let Some(q) = (0..k).find(|&q| q != p && (assign[q] == lo || assign[q] == hi)) {
                    let (a, b) = if p < q { (lo, hi) } else { (hi, lo) };
                    if assign[p] == lo || assign[p] == hi {
                        assign[p] = a;
                        assign[q] = b;
                    }
                }
            }
        }
    }
    (assign, worst, ambiguous)
}

impl SpectrumCurve {
    pub fn levels_count(&self) -> usize {
        self.levels.first().map_or(0, |l| l.len())
    }

    pub fn gap(&self, which: GapKind) -> Result<GapSeries> {
        let (lo, hi) = match which {
            GapKind::GroundToFirst => (0, 1),
            GapKind::FirstToSecond => (1, 2),
        };
        if self.levels_count() <= hi {
            return Err(Error::InvalidParameter(format!("gap needs at least {} levels", hi + 1)));
        }
        let values: Vec<f64> = self.levels.iter().map(|l| l[hi] - l[lo]).collect();
        let (imin, &min) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        Ok(GapSeries { min, d_at_min: self.d[imin], values })
    }

    /// CSV with columns `d, E0..E{k-1}, min_gap` where `min_gap` is the
    /// smallest spacing between adjacent levels at that separation.
    pub fn to_csv(&self) -> String {
        let k = self.levels_count();
        let mut out = String::from("d");
        for j in 0..k {
            out.push_str(&format!(",E{j}"));
        }
        out.push_str(",min_gap\n");
        for (d, l) in self.d.iter().zip(&self.levels) {
            out.push_str(&format!("{d:.16e}"));
            for e in l {
                out.push_str(&format!(",{e:.16e}"));
            }
            let g = l.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            out.push_str(&format!(",{:.16e}\n", if g.is_finite() { g } else { 0.0 }));
        }
        out
    }
}
