//! Optical microtrap potentials, separation schedules and the closed-form
//! energy-scale estimates used to pick sweep speeds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Fusion of one-atom-per-well into a single trap (repulsive).
    #[serde(rename = "I")]
    I,
    /// Splitting a single trap into two (attractive), producing the cat.
    #[serde(rename = "II")]
    II,
    /// Splitting each cat branch back into one atom per well (repulsive).
    #[serde(rename = "III")]
    III,
}

impl Stage {
    pub fn parse(s: &str) -> Option<Stage> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Some(Stage::I),
            "II" | "2" => Some(Stage::II),
            "III" | "3" => Some(Stage::III),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::I => "I",
            Stage::II => "II",
            Stage::III => "III",
        }
    }
}

/// Stage-tagged trap: `q.len()` Gaussian wells of depth `(1 + q_i) v0`,
/// equally spaced by `d` and centred on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub stage: Stage,
    pub v0: f64,
    pub sigma: f64,
    pub q: Vec<f64>,
    pub d: f64,
    pub u0: f64,
    pub n_particles: usize,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return bad(format!("v0 must be positive, got {}", self.v0));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return bad(format!("d must be non-negative, got {}", self.d));
        }
        if !self.u0.is_finite() {
            return bad("u0 must be finite".into());
        }
        if self.n_particles == 0 {
            return bad("n_particles must be at least 1".into());
        }
        let wells = self.expected_wells();
        if self.q.len() != wells {
            return bad(format!(
                "stage {} with {} particles needs {} asymmetries, got {}",
                self.stage.name(),
                self.n_particles,
                wells,
                self.q.len()
            ));
        }
        if self.q.iter().any(|q| !q.is_finite() || q.abs() >= 0.5) {
            return bad("asymmetries must be small (|q_i| < 0.5)".into());
        }
        Ok(())
    }

    /// Two wells for stage II, one per particle otherwise.
    pub fn expected_wells(&self) -> usize {
        match self.stage {
            Stage::II => 2,
            Stage::I | Stage::III => self.n_particles,
        }
    }

    pub fn wells(&self) -> usize {
        self.q.len()
    }

    pub fn well_centers(&self) -> Vec<f64> {
        well_centers(self.q.len(), self.d)
    }

    /// Largest |center| reached at separation `d`.
    pub fn extent_at(&self, d: f64) -> f64 {
        0.5 * (self.q.len().saturating_sub(1)) as f64 * d
    }

    pub fn with_separation(&self, d: f64) -> Self {
        Self { d, ..self.clone() }
    }

    /// Evaluates the trap at `x` without re-validating.
    pub fn potential(&self, x: f64) -> f64 {
        let n = self.q.len();
        self.q
            .iter()
            .enumerate()
            .map(|(i, q)| (1.0 + q) * single_well(x, center(i, n, self.d), self.v0, self.sigma))
            .sum()
    }

    /// Same wells and depths, placed at explicit `centers`.
    pub fn potential_with_centers(&self, x: f64, centers: &[f64]) -> f64 {
        self.q
            .iter()
            .zip(centers)
            .map(|(q, &c)| (1.0 + q) * single_well(x, c, self.v0, self.sigma))
            .sum()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.potential(x)).collect()
    }

    /// Sum of well depths, the lower bound of the potential.
    pub fn total_depth(&self) -> f64 {
        self.q.iter().map(|q| (1.0 + q) * self.v0).sum()
    }

    /// Largest depth mismatch between neighbouring wells (as a fraction of v0).
    pub fn asymmetry(&self) -> f64 {
        self.q.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

fn center(i: usize, n: usize, d: f64) -> f64 {
    (i as f64 - 0.5 * (n as f64 - 1.0)) * d
}

pub fn well_centers(n: usize, d: f64) -> Vec<f64> {
    (0..n).map(|i| center(i, n, d)).collect()
}

/// Gaussian well `−v0 exp(−(x − center)²/(2σ²))`.
pub fn single_well(x: f64, center: f64, v0: f64, sigma: f64) -> f64 {
    let u = (x - center) / sigma;
    -v0 * (-0.5 * u * u).exp()
}

pub fn stage_potential(cfg: &TrapConfig, x: f64) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.potential(x))
}

/// Linear separation ramp at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub d_start: f64,
    pub d_end: f64,
    pub speed: f64,
}

impl Schedule {
    pub fn new(d_start: f64, d_end: f64, speed: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::InvalidParameter(format!("sweep speed must be positive, got {speed}")));
        }
        if !(d_start >= 0.0 && d_end >= 0.0) {
            return Err(Error::InvalidParameter("separations must be non-negative".into()));
        }
        Ok(Self { d_start, d_end, speed })
    }

    pub fn distance(&self) -> f64 {
        (self.d_end - self.d_start).abs()
    }

    pub fn duration(&self) -> f64 {
        self.distance() / self.speed
    }

    pub fn separation_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration());
        let dir = if self.d_end >= self.d_start { 1.0 } else { -1.0 };
        self.d_start + dir * self.speed * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyScales {
    pub e_asym: f64,
    pub e_int: f64,
    pub e_exc: f64,
    pub e_d: f64,
    pub sigma0: f64,
    pub spacing: f64,
}

/// Order-of-magnitude energy scales. `spacing` is the well distance `D` at
/// which the merged trap is treated as a square well (typically `2σ`).
pub fn energy_scales(cfg: &TrapConfig, spacing: f64) -> EnergyScales {
    let n = cfg.n_particles as f64;
    let q = cfg.asymmetry();
    let sigma0 = (cfg.v0 / (cfg.sigma * cfg.sigma)).powf(0.25);
    let e_exc = sigma0.powi(-2);
    let (e_asym, e_int, e_d) = match cfg.stage {
        Stage::I | Stage::III => {
            (q * cfg.v0, cfg.u0.abs() / sigma0, (PI / (n * spacing)).powi(2))
        }
        Stage::II => (
            n * q * cfg.v0,
            (n - 1.0) * cfg.u0.abs() / sigma0,
            (PI / (2.0 * spacing)).powi(2),
        ),
    };
    EnergyScales { e_asym, e_int, e_exc, e_d, sigma0, spacing }
}

impl EnergyScales {
    pub fn smallest_large_scale(&self) -> f64 {
        self.e_int.min(self.e_exc).min(self.e_d)
    }

    /// `E_asym · margin ≤ min(E_int, E_exc, E_D)`.
    pub fn hierarchy_satisfied(&self, margin: f64) -> bool {
        self.e_asym * margin <= self.smallest_large_scale()
    }
}

pub fn hierarchy_satisfied(scales: &EnergyScales, margin: f64) -> bool {
    scales.hierarchy_satisfied(margin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzEstimate {
    pub gap: f64,
    pub slope: f64,
    pub v_ad: f64,
}

/// Speed below which a sweep through an avoided crossing of size `gap`
/// stays adiabatic, using the level slope `√(N V0)/σ²`.
pub fn lz_estimate(gap: f64, cfg: &TrapConfig) -> LzEstimate {
    let slope = (cfg.n_particles as f64 * cfg.v0).sqrt() / (cfg.sigma * cfg.sigma);
    LzEstimate { gap, slope, v_ad: gap * gap / slope }
}

/// Lower speed limit from dephasing: a constant bias `N q V0` acting during
/// `distance / v` accumulates at most `phi_max` of relative phase.
pub fn dephasing_bound(cfg: &TrapConfig, phi_max: f64, distance: f64) -> f64 {
    let e_asym = cfg.n_particles as f64 * cfg.asymmetry() * cfg.v0;
    e_asym * distance / phi_max
}
