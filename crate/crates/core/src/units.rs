//! Atomic species and the scaled unit system used throughout the simulator.
//!
//! Lengths are measured in `L_u = 2 μm`, energies in `E_u = ħ²/(2 M L_u²)` and
//! times in `t_u = ħ/E_u`. With this choice the single-particle kinetic
//! operator is simply `−∂²/∂x²`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// CODATA 2018 values.
pub mod constants {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Planck constant, J·s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Unified atomic mass unit, kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Bohr radius, m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
}

/// Unit of length, metres.
pub const LENGTH_UNIT: f64 = 2.0e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// Atomic mass in kg.
    pub mass: f64,
    /// Zero-field triplet scattering length in metres.
    pub scattering_length: f64,
}

impl Species {
    /// Builds a species from a mass in atomic mass units and a scattering
    /// length in Bohr radii.
    pub fn new(name: impl Into<String>, mass_u: f64, scattering_length_a0: f64) -> Result<Self> {
        Self::from_si(
            name,
            mass_u * constants::ATOMIC_MASS_UNIT,
            scattering_length_a0 * constants::BOHR_RADIUS,
        )
    }

    pub fn from_si(name: impl Into<String>, mass: f64, scattering_length: f64) -> Result<Self> {
        let name = name.into();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidSpecies(format!("{name}: mass must be positive")));
        }
        if !scattering_length.is_finite() || scattering_length == 0.0 {
            return Err(Error::InvalidSpecies(format!(
                "{name}: scattering length must be finite and nonzero"
            )));
        }
        Ok(Self { name, mass, scattering_length })
    }

    /// ²³Na, triplet scattering length 65 a₀.
    pub fn sodium() -> Self {
        Self::new("Na", 22.989_77, 65.0).expect("valid built-in species")
    }

    /// ⁸⁷Rb, triplet scattering length 106 a₀.
    pub fn rubidium() -> Self {
        Self::new("Rb", 86.909_18, 106.0).expect("valid built-in species")
    }

    /// Looks up one of the built-in species by (case-insensitive) symbol.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "na" | "na23" | "sodium" => Some(Self::sodium()),
            "rb" | "rb87" | "rubidium" => Some(Self::rubidium()),
            _ => None,
        }
    }

    pub fn mass_u(&self) -> f64 {
        self.mass / constants::ATOMIC_MASS_UNIT
    }

    pub fn scattering_length_a0(&self) -> f64 {
        self.scattering_length / constants::BOHR_RADIUS
    }
}

/// Consistent set of scaled units for one species. All fields are derived
/// from the species mass and [`LENGTH_UNIT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// metres
    pub length: f64,
    /// joules
    pub energy: f64,
    /// seconds
    pub time: f64,
    /// metres per second
    pub velocity: f64,
}

pub fn make_unit_system(species: &Species) -> UnitSystem {
    let length = LENGTH_UNIT;
    let energy = constants::HBAR * constants::HBAR / (2.0 * species.mass * length * length);
    let time = constants::HBAR / energy;
    UnitSystem { length, energy, time, velocity: length / time }
}

impl UnitSystem {
    /// Dimensionless speed to μm/s.
    pub fn velocity_to_physical(&self, v: f64) -> f64 {
        v * self.velocity * 1e6
    }

    /// μm/s to dimensionless speed.
    pub fn velocity_from_physical(&self, um_per_s: f64) -> f64 {
        um_per_s * 1e-6 / self.velocity
    }

    /// Dimensionless energy to h × kHz.
    pub fn energy_to_physical(&self, e: f64) -> f64 {
        e * self.energy / constants::PLANCK * 1e-3
    }

    /// h × kHz to dimensionless energy.
    pub fn energy_from_physical(&self, h_khz: f64) -> f64 {
        h_khz * 1e3 * constants::PLANCK / self.energy
    }

    /// Dimensionless time to seconds.
    pub fn time_to_physical(&self, t: f64) -> f64 {
        t * self.time
    }
}

pub fn velocity_to_physical(v: f64, species: &Species) -> f64 {
    make_unit_system(species).velocity_to_physical(v)
}

pub fn energy_to_physical(e: f64, species: &Species) -> f64 {
    make_unit_system(species).energy_to_physical(e)
}

/// Transverse trap frequency (rad/s) that realises the dimensionless 1D
/// coupling `u0`, evaluated as `U₀ ħ / (4 |a| M L_u)`.
pub fn omega_perp(u0: f64, species: &Species) -> Result<f64> {
    if u0 == 0.0 || !u0.is_finite() {
        return Err(Error::InvalidParameter("omega_perp requires a finite nonzero U0".into()));
    }
    Ok(u0.abs() * constants::HBAR
        / (4.0 * species.scattering_length.abs() * species.mass * LENGTH_UNIT))
}

/// Dimensionless critical speeds feeding the parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSpeeds {
    pub stage1_lower: f64,
    pub stage1_upper: f64,
    pub stage2_lower: f64,
    pub stage2_upper: f64,
}

impl Default for CriticalSpeeds {
    /// Default dimensionless speeds. The stage-II lower bound is
    /// back-derived from the tabulated μm/s entries of both species.
    fn default() -> Self {
        Self { stage1_lower: 0.09, stage1_upper: 0.35, stage2_lower: 0.1698, stage2_upper: 0.27 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table1Row {
    OmegaPerp,
    Stage1Lower,
    Stage1Upper,
    Stage2Lower,
    Stage2Upper,
    DepthStage2,
}

impl Table1Row {
    pub const ALL: [Table1Row; 6] = [
        Table1Row::OmegaPerp,
        Table1Row::Stage1Lower,
        Table1Row::Stage1Upper,
        Table1Row::Stage2Lower,
        Table1Row::Stage2Upper,
        Table1Row::DepthStage2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Table1Row::OmegaPerp => "omega_perp",
            Table1Row::Stage1Lower => "v_cI1",
            Table1Row::Stage1Upper => "v_cI2",
            Table1Row::Stage2Lower => "v_cII1",
            Table1Row::Stage2Upper => "v_cII2",
            Table1Row::DepthStage2 => "V0_II",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Table1Row::OmegaPerp => "2pi kHz",
            Table1Row::DepthStage2 => "h kHz",
            _ => "um/s",
        }
    }
}

/// Tabulated dimensional values for the two default species, in row order of
/// [`Table1Row::ALL`].
pub fn reference_table1(species_name: &str) -> Option<[f64; 6]> {
    match species_name {
        "Na" => Some([79.9, 62.2, 242.0, 117.0, 186.0, 2.47]),
        "Rb" => Some([13.0, 16.5, 64.0, 31.1, 49.4, 0.665]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Column {
    pub species: String,
    /// Computed values in row order of [`Table1Row::ALL`].
    pub values: [f64; 6],
    pub reference: Option<[f64; 6]>,
}

impl Table1Column {
    pub fn value(&self, row: Table1Row) -> f64 {
        self.values[row_index(row)]
    }

    /// computed / reference, when a reference exists.
    pub fn ratio(&self, row: Table1Row) -> Option<f64> {
        self.reference.map(|r| self.values[row_index(row)] / r[row_index(row)])
    }
}

fn row_index(row: Table1Row) -> usize {
    Table1Row::ALL.iter().position(|&r| r == row).unwrap()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table1 {
    pub columns: Vec<Table1Column>,
}

/// Converts the dimensionless simulation parameters into physical units, one
/// column per species. `depth_stage2` and `u0` are the stage-II trap depth
/// and the interaction strength fed to the ω⊥ conversion.
pub fn emit_table1(species: &[Species], speeds: &CriticalSpeeds, depth_stage2: f64, u0: f64) -> Result<Table1> {
    let mut columns = Vec::with_capacity(species.len());
    for sp in species {
        let units = make_unit_system(sp);
        let omega = omega_perp(u0, sp)?;
        let values = [
            omega / (2.0 * std::f64::consts::PI) * 1e-3,
            units.velocity_to_physical(speeds.stage1_lower),
            units.velocity_to_physical(speeds.stage1_upper),
            units.velocity_to_physical(speeds.stage2_lower),
            units.velocity_to_physical(speeds.stage2_upper),
            units.energy_to_physical(depth_stage2),
        ];
        columns.push(Table1Column { species: sp.name.clone(), values, reference: reference_table1(&sp.name) });
    }
    Ok(Table1 { columns })
}

impl Table1 {
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Long-format CSV: one line per (row, species) with the reference value
    /// and the computed/reference ratio where available.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,unit,species,computed,reference,ratio\n");
        for row in Table1Row::ALL {
            for col in &self.columns {
                let (reference, ratio) = match (col.reference, col.ratio(row)) {
                    (Some(r), Some(q)) => (format!("{:.16e}", r[row_index(row)]), format!("{q:.16e}")),
                    _ => (String::new(), String::new()),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{:.16e},{},{}",
                    row.label(),
                    row.unit(),
                    col.species,
                    col.value(row),
                    reference,
                    ratio
                );
            }
        }
        out
    }

    /// Aligned text rendering with a discrepancy column per species.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.columns.is_empty() {
            return out;
        }
        let _ = write!(out, "{:<12}", "parameter");
        for col in &self.columns {
            let _ = write!(out, "{:>12}{:>12}", col.species, "vs table");
        }
        let _ = writeln!(out, "  unit");
        for row in Table1Row::ALL {
            let _ = write!(out, "{:<12}", row.label());
            for col in &self.columns {
                let ratio = col.ratio(row).map(|q| format!("x{q:.3}")).unwrap_or_else(|| "-".into());
                let _ = write!(out, "{:>12.4}{:>12}", col.value(row), ratio);
            }
            let _ = writeln!(out, "  {}", row.unit());
        }
        out
    }
}
