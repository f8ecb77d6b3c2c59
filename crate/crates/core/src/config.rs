//! Run configuration: a TOML file with one table per stage, presets matching
//! the standard parameter sets, and conversion into the simulation types.

use serde::{Deserialize, Serialize};

use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::potential::{Stage, TrapConfig};
use crate::protocol::{Handoff, Mode, ProtocolRun, Splitter};
use crate::units::{CriticalSpeeds, Species};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageParams {
    pub v0: f64,
    pub sigma: f64,
    pub u0: f64,
    pub q: Vec<f64>,
    /// Separation at the far end of the stage (initial for I, final for II/III).
    pub d: f64,
}

impl StageParams {
    pub fn trap(&self, stage: Stage, n_particles: usize) -> TrapConfig {
        TrapConfig { stage, v0: self.v0, sigma: self.sigma, q: self.q.clone(), d: self.d, u0: self.u0, n_particles }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub spacing: f64,
    /// Box half-width beyond the outermost well centre, in units of σ.
    pub margin_sigmas: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { spacing: 0.2, margin_sigmas: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanParams {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    pub levels: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self { d_min: 0.0, d_max: 3.0, points: 31, levels: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub speeds: Vec<f64>,
    pub dt: f64,
    /// Adiabatic states the final state is projected on.
    pub levels: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { speeds: vec![0.2], dt: 0.02, levels: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolParams {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    /// Phases on the right-branch atoms; empty means all zero.
    pub phases: Vec<f64>,
    pub mode: Mode,
    pub handoff: Handoff,
    pub branch_asymmetry: f64,
    pub retention_floor: f64,
    pub splitter: Splitter,
    pub delta_scan: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            v1: 0.2,
            v2: 0.15,
            v3: 0.2,
            phases: Vec::new(),
            mode: Mode::Parallel,
            handoff: Handoff::Ramp { duration: 5.0 },
            branch_asymmetry: 1e-4,
            retention_floor: 0.95,
            splitter: Splitter::Default,
            delta_scan: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesParams {
    pub name: String,
    pub mass_u: f64,
    pub scattering_length_a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableParams {
    pub v_c1: f64,
    pub v_c2: f64,
    pub v_cii1: f64,
    pub v_cii2: f64,
    /// Stage-II well depth converted in the table.
    pub depth: f64,
    pub u0: f64,
}

impl Default for TableParams {
    fn default() -> Self {
        let s = CriticalSpeeds::default();
        Self {
            v_c1: s.stage1_lower,
            v_c2: s.stage1_upper,
            v_cii1: s.stage2_lower,
            v_cii2: s.stage2_upper,
            depth: 30.0,
            u0: 10.0,
        }
    }
}

impl TableParams {
    pub fn speeds(&self) -> CriticalSpeeds {
        CriticalSpeeds {
            stage1_lower: self.v_c1,
            stage1_upper: self.v_c2,
            stage2_lower: self.v_cii1,
            stage2_upper: self.v_cii2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_particles: usize,
    /// Stage used by single-stage commands (spectrum, sweep, criticalv).
    pub stage: Stage,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Species for unit conversion; empty means sodium and rubidium.
    #[serde(default)]
    pub species: Vec<SpeciesParams>,
    pub stage1: StageParams,
    pub stage2: StageParams,
    pub stage3: StageParams,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub scan: ScanParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub protocol: ProtocolParams,
    #[serde(default)]
    pub table: TableParams,
}

pub const PRESETS: [&str; 5] = ["fig2", "fig3", "fig4", "fig5", "table1"];

fn repulsive() -> StageParams {
    StageParams { v0: 10.0, sigma: 0.5, u0: 10.0, q: vec![-1e-4, 0.0, 1e-4], d: 3.0 }
}

fn attractive() -> StageParams {
    StageParams { v0: 30.0, sigma: 0.5, u0: -4.0, q: vec![0.0, 1e-4], d: 3.0 }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_particles: 3,
            stage: Stage::I,
            seed: 0,
            output_dir: None,
            species: Vec::new(),
            stage1: repulsive(),
            stage2: attractive(),
            stage3: repulsive(),
            grid: GridParams::default(),
            scan: ScanParams::default(),
            sweep: SweepParams::default(),
            protocol: ProtocolParams::default(),
            table: TableParams::default(),
        }
    }
}

impl RunConfig {
    /// Named configurations: `fig2` (repulsive levels), `fig3` (repulsive
    /// split), `fig4` (attractive levels), `fig5` (attractive split),
    /// `table1` (unit conversion).
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let log_speeds = |lo: f64, hi: f64, n: usize| log_space(lo, hi, n);
        match name {
            "fig2" => Ok(Self { stage: Stage::I, ..base }),
            "fig3" => Ok(Self {
                stage: Stage::III,
                sweep: SweepParams { speeds: log_speeds(0.02, 1.0, 20), ..SweepParams::default() },
                ..base
            }),
            "fig4" => Ok(Self { stage: Stage::II, ..base }),
            "fig5" => Ok(Self {
                stage: Stage::II,
                sweep: SweepParams { speeds: log_speeds(0.05, 1.0, 20), ..SweepParams::default() },
                ..base
            }),
            "table1" => Ok(base),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected one of {PRESETS:?})"))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn trap(&self, stage: Stage) -> TrapConfig {
        match stage {
            Stage::I => self.stage1.trap(Stage::I, self.n_particles),
            Stage::II => self.stage2.trap(Stage::II, self.n_particles),
            Stage::III => self.stage3.trap(Stage::III, self.n_particles),
        }
    }

    pub fn species_list(&self) -> Result<Vec<Species>> {
        if self.species.is_empty() {
            return Ok(vec![Species::sodium(), Species::rubidium()]);
        }
        self.species.iter().map(|s| Species::new(&s.name, s.mass_u, s.scattering_length_a0)).collect()
    }

    pub fn eigen(&self) -> EigenOptions {
        EigenOptions { seed: self.seed ^ 0x5eed, ..EigenOptions::default() }
    }

    pub fn phases(&self) -> Vec<f64> {
        if self.protocol.phases.is_empty() {
            vec![0.0; self.n_particles]
        } else {
            self.protocol.phases.clone()
        }
    }

    pub fn protocol_run(&self) -> ProtocolRun {
        let p = &self.protocol;
        ProtocolRun {
            stage1: self.trap(Stage::I),
            stage2: self.trap(Stage::II),
            stage3: self.trap(Stage::III),
            v1: p.v1,
            v2: p.v2,
            v3: p.v3,
            phases: self.phases(),
            mode: p.mode,
            handoff: p.handoff,
            branch_asymmetry: p.branch_asymmetry,
            retention_floor: p.retention_floor,
            spacing: self.grid.spacing,
            margin_sigmas: self.grid.margin_sigmas,
            dt: self.sweep.dt,
            splitter: p.splitter,
            delta_scan: p.delta_scan,
            eigen: self.eigen(),
        }
    }

    /// Checks every field against the preconditions of the code that uses it.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Err(Error::Config(format!("{name}: {msg}")));
        for stage in [Stage::I, Stage::II, Stage::III] {
            self.trap(stage).validate().map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("stage{}: {m}", stage_index(stage))),
                other => other,
            })?;
        }
        if !(self.grid.spacing > 0.0 && self.grid.spacing.is_finite()) {
            return field("grid.spacing", "must be positive");
        }
        if !(self.grid.margin_sigmas > 0.0) {
            return field("grid.margin_sigmas", "must be positive");
        }
        if !(self.scan.d_min >= 0.0 && self.scan.d_max >= self.scan.d_min) {
            return field("scan", "need 0 ≤ d_min ≤ d_max");
        }
        if self.scan.points == 0 || self.scan.levels == 0 {
            return field("scan", "points and levels must be at least 1");
        }
        if self.sweep.speeds.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return field("sweep.speeds", "must be positive");
        }
        if !(self.sweep.dt > 0.0) {
            return field("sweep.dt", "must be positive");
        }
        if self.sweep.levels < 2 {
            return field("sweep.levels", "must be at least 2");
        }
        if !self.protocol.phases.is_empty() && self.protocol.phases.len() != self.n_particles {
            return field("protocol.phases", "needs one phase per atom");
        }
        for (v, name) in [(self.protocol.v1, "protocol.v1"), (self.protocol.v2, "protocol.v2"), (self.protocol.v3, "protocol.v3")] {
            if !(v.is_finite() && v > 0.0) {
                return field(name, "must be positive");
            }
        }
        if !(0.0..=1.0).contains(&self.protocol.retention_floor) {
            return field("protocol.retention_floor", "must lie in [0, 1]");
        }
        if let Handoff::Ramp { duration } = self.protocol.handoff {
            if !(duration > 0.0) {
                return field("protocol.handoff.duration", "must be positive");
            }
        }
        self.species_list()?;
        Ok(())
    }
}

fn stage_index(stage: Stage) -> usize {
    match stage {
        Stage::I => 1,
        Stage::II => 2,
        Stage::III => 3,
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect(),
    }
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Parses a speed list: `0.3`, `0.1,0.2,0.4`, `a:b:N` (linear) or `a:b:logN`.
pub fn parse_speeds(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse speed list '{s}'"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [a, b, n] => {
            let (lo, hi) = (num(a)?, num(b)?);
            if let Some(k) = n.trim().strip_prefix("log") {
                let k: usize = k.parse().map_err(|_| bad())?;
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(bad());
                }
                log_space(lo, hi, k)
            } else {
                lin_space(lo, hi, n.trim().parse().map_err(|_| bad())?)
            }
        }
        _ => return Err(bad()),
    };
    if out.is_empty() || out.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            let back = RunConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg, "{name}");
            assert_eq!(back.to_toml().unwrap(), text);
        }
    }

    #[test]
    fn preset_parameters() {
        let c = RunConfig::preset("fig2").unwrap();
        assert_eq!((c.stage1.v0, c.stage1.sigma, c.stage1.u0), (10.0, 0.5, 10.0));
        assert_eq!(c.stage1.q, vec![-1e-4, 0.0, 1e-4]);
        let c = RunConfig::preset("fig4").unwrap();
        assert_eq!((c.stage2.v0, c.stage2.sigma, c.stage2.u0), (30.0, 0.5, -4.0));
        assert_eq!(c.stage2.q, vec![0.0, 1e-4]);
        assert_eq!(c.stage2.d, 3.0);
        assert_eq!(RunConfig::preset("fig3").unwrap().stage3.d, 3.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = RunConfig::default().to_toml().unwrap();
        text = text.replace("[stage1]", "[stage1]\ndepth = 3.0");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = RunConfig::default();
        cfg.stage2.q = vec![0.0];
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("stage2"), "{err}");
        let mut cfg = RunConfig::default();
        cfg.sweep.dt = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("sweep.dt"));
    }

    #[test]
    fn speed_lists() {
        assert_eq!(parse_speeds("0.3").unwrap(), vec![0.3]);
        assert_eq!(parse_speeds("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        let v = parse_speeds("0.02:1.0:log20").unwrap();
        assert_eq!(v.len(), 20);
        assert!((v[0] - 0.02).abs() < 1e-15 && (v[19] - 1.0).abs() < 1e-12);
        assert_eq!(parse_speeds("0.1:0.3:3").unwrap().len(), 3);
        assert!(parse_speeds("0:1:log3").is_err());
        assert!(parse_speeds("a").is_err());
    }
}
