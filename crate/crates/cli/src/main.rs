use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use catsim::config::{parse_speeds, RunConfig, SpeciesParams, PRESETS};
use catsim::dynamics::PropagatorOptions;
use catsim::grid::Grid;
use catsim::io::{csv_row, fmt, write_atomic};
use catsim::operator::{scan_levels, Discretization, ScanOptions};
use catsim::potential::{Stage, TrapConfig};
use catsim::protocol::{
    coincidence_probability, find_critical_velocity, fringe_amplitude, fringe_csv, marginal_distribution,
    records_csv, run_protocol, sample_outcomes, BranchPair, Handoff, MeasurementModel, Metric, Mode, Splitter,
    StageSweep,
};
use catsim::units::emit_table1;
use catsim::Error;

#[derive(Parser)]
#[command(name = "catsim", version, about = "Few-boson cat-state preparation in tweezer arrays")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: fig2, fig3, fig4, fig5 or table1.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Directory for CSV output (nothing is written without one).
    #[arg(long, global = true, env = "CATSIM_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for Monte Carlo sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid spacing.
    #[arg(long, global = true)]
    spacing: Option<f64>,
    /// Time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Adiabatic levels versus well separation.
    Spectrum {
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        d_min: Option<f64>,
        #[arg(long)]
        d_max: Option<f64>,
    },
    /// Final adiabatic-state populations versus sweep speed.
    Sweep {
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
        /// Speeds: `0.3`, `0.1,0.2`, `a:b:N` or `a:b:logN`.
        #[arg(long)]
        v: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// All four stages end to end.
    Protocol {
        /// Stage I merge speed.
        #[arg(long)]
        v1: Option<f64>,
        /// Stage II split speed.
        #[arg(long)]
        v2: Option<f64>,
        /// Stage III split speed.
        #[arg(long)]
        v3: Option<f64>,
        /// Comma-separated phases on the right-branch atoms.
        #[arg(long)]
        phases: Option<String>,
        #[arg(long)]
        mode: Option<ModeArg>,
        #[arg(long)]
        handoff: Option<HandoffArg>,
        /// Duration of a ramped interaction switch.
        #[arg(long)]
        handoff_duration: Option<f64>,
        /// Points of the fringe scan over Δ.
        #[arg(long)]
        delta_scan: Option<usize>,
        /// Abort when a stage keeps less than this in its target state(s).
        #[arg(long)]
        retention_floor: Option<f64>,
        #[arg(long)]
        splitter: Option<SplitterArg>,
    },
    /// Dimensionless results in physical units.
    Table1 {
        /// `Na`, `Rb` or `name:mass_u:a0`; repeatable.
        #[arg(long)]
        species: Vec<String>,
    },
    /// Exact and sampled coincidence statistics of a cat state.
    Interfere {
        /// Number of atoms (default: the configured N).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, conflicts_with = "visibility")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        /// Cat visibility; alternative to --alpha/--beta.
        #[arg(long)]
        visibility: Option<f64>,
        /// Relative phase of the cat components.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Total applied phase Σφ_i.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 16)]
        delta_scan: usize,
        /// Comma-separated 1-based atom indices.
        #[arg(long)]
        subset: Option<String>,
        /// Monte Carlo shots to sample in addition to the exact result.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        splitter: Option<SplitterArg>,
    },
    /// Bisection for the critical sweep speed of one stage.
    Criticalv {
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
        #[arg(long, value_enum, default_value_t = MetricArg::Retention)]
        metric: MetricArg,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Retention threshold.
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        /// Largest tolerated phase for the dephasing metric.
        #[arg(long, default_value_t = 0.1)]
        phi_max: f64,
        /// Relative bracket width at which bisection stops.
        #[arg(long, default_value_t = 0.05)]
        width: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Parallel,
    Serial,
}

#[derive(Clone, Copy, ValueEnum)]
enum HandoffArg {
    Sudden,
    Ramp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitterArg {
    Default,
    Hadamard,
    Symmetric,
}

impl From<SplitterArg> for Splitter {
    fn from(s: SplitterArg) -> Self {
        match s {
            SplitterArg::Default => Splitter::Default,
            SplitterArg::Hadamard => Splitter::Hadamard,
            SplitterArg::Symmetric => Splitter::Symmetric,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MetricArg {
    Retention,
    Dephasing,
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    Stage::parse(s).ok_or_else(|| format!("unknown stage '{s}' (expected I, II or III)"))
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Simulation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidSpecies(_) => Failure::Usage(e.to_string()),
            other => Failure::Simulation(other.to_string()),
        }
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn emit(&self, name: &str, contents: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.dir {
            write_atomic(&dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(h) = common.spacing {
        cfg.grid.spacing = h;
    }
    if let Some(dt) = common.dt {
        cfg.sweep.dt = dt;
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = Some(dir.display().to_string());
    }
    Ok(cfg)
}

fn stage_grid(cfg: &RunConfig, trap: &TrapConfig, d_max: f64) -> Result<Discretization, Failure> {
    let grid = Grid::for_wells(trap.extent_at(d_max), trap.sigma, cfg.grid.margin_sigmas, cfg.grid.spacing)?;
    Ok(Discretization::new(grid, cfg.n_particles)?)
}

/// Separation range of a single-stage sweep: fusion ends at 0, splits start there.
fn sweep_range(trap: &TrapConfig) -> (f64, f64) {
    match trap.stage {
        Stage::I => (trap.d, 0.0),
        Stage::II | Stage::III => (0.0, trap.d),
    }
}

fn propagator(cfg: &RunConfig) -> PropagatorOptions {
    PropagatorOptions { dt: cfg.sweep.dt, ..PropagatorOptions::default() }
}

fn cmd_spectrum(
    cfg: &mut RunConfig,
    out: &Output,
    stage: Stage,
    levels: Option<usize>,
    points: Option<usize>,
    d_min: Option<f64>,
    d_max: Option<f64>,
) -> Result<(), Failure> {
    cfg.stage = stage;
    if let Some(k) = levels {
        cfg.scan.levels = k;
    }
    if let Some(p) = points {
        cfg.scan.points = p;
    }
    if let Some(d) = d_min {
        cfg.scan.d_min = d;
    }
    if let Some(d) = d_max {
        cfg.scan.d_max = d;
    }
    cfg.validate()?;
    let trap = cfg.trap(stage);
    let disc = stage_grid(cfg, &trap, cfg.scan.d_max)?;
    let d_list = catsim::config::lin_space(cfg.scan.d_min, cfg.scan.d_max, cfg.scan.points);
    let curve = scan_levels(&disc, &trap, &d_list, cfg.scan.levels, &ScanOptions { eigen: cfg.eigen(), ..Default::default() })?;
    let csv = curve.to_csv();
    print!("{csv}");
    if !curve.ambiguous_steps.is_empty() {
        eprintln!("warning: ambiguous level matching at scan steps {:?}", curve.ambiguous_steps);
    }
    out.emit(&format!("spectrum_stage{}.csv", stage.name()), &csv)
}

fn cmd_sweep(cfg: &mut RunConfig, out: &Output, stage: Stage, v: Option<String>, levels: Option<usize>) -> Result<(), Failure> {
    cfg.stage = stage;
    if let Some(v) = v {
        cfg.sweep.speeds = parse_speeds(&v)?;
    }
    if let Some(k) = levels {
        cfg.sweep.levels = k;
    }
    cfg.validate()?;
    let trap = cfg.trap(stage);
    let (d_start, d_end) = sweep_range(&trap);
    let disc = stage_grid(cfg, &trap, trap.d)?;
    let k = cfg.sweep.levels;
    let sweep = StageSweep::from_ground(&disc, &trap, d_start, d_end, k, &cfg.eigen(), &propagator(cfg))?;
    let rows: Vec<Result<String, Error>> = cfg
        .sweep
        .speeds
        .par_iter()
        .map(|&v| {
            let r = sweep.run(v)?;
            let mut vals = vec![v];
            vals.extend(&r.projections);
            if stage == Stage::II {
                let cat = catsim::dynamics::extract_cat(&disc, &r.state, &sweep.target.states[0], &sweep.target.states[1]);
                vals.extend([r.doublet_probability(), cat.theta, cat.visibility]);
            }
            vals.push(r.norm_drift);
            Ok(csv_row(vals))
        })
        .collect();
    let mut csv = String::from("v");
    for j in 0..k {
        csv.push_str(&format!(",P{j}"));
    }
    if stage == Stage::II {
        csv.push_str(",doublet,theta,visibility");
    }
    csv.push_str(",norm_drift\n");
    for r in rows {
        csv.push_str(&r?);
        csv.push('\n');
    }
    print!("{csv}");
    out.emit(&format!("sweep_stage{}.csv", stage.name()), &csv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_protocol(
    cfg: &mut RunConfig,
    out: &Output,
    v1: Option<f64>,
    v2: Option<f64>,
    v3: Option<f64>,
    phases: Option<String>,
    mode: Option<ModeArg>,
    handoff: Option<HandoffArg>,
    handoff_duration: Option<f64>,
    delta_scan: Option<usize>,
    retention_floor: Option<f64>,
    splitter: Option<SplitterArg>,
) -> Result<(), Failure> {
    let p = &mut cfg.protocol;
    p.v1 = v1.unwrap_or(p.v1);
    p.v2 = v2.unwrap_or(p.v2);
    p.v3 = v3.unwrap_or(p.v3);
    if let Some(s) = phases {
        p.phases = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad phase '{t}'"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(m) = mode {
        p.mode = match m {
            ModeArg::Parallel => Mode::Parallel,
            ModeArg::Serial => Mode::Serial,
        };
    }
    let duration = match (p.handoff, handoff_duration) {
        (_, Some(t)) => t,
        (Handoff::Ramp { duration }, None) => duration,
        (Handoff::Sudden, None) => 5.0,
    };
    p.handoff = match handoff {
        Some(HandoffArg::Sudden) => Handoff::Sudden,
        Some(HandoffArg::Ramp) => Handoff::Ramp { duration },
        None => match p.handoff {
            Handoff::Ramp { .. } => Handoff::Ramp { duration },
            h => h,
        },
    };
    if let Some(n) = delta_scan {
        p.delta_scan = n;
    }
    if let Some(f) = retention_floor {
        p.retention_floor = f;
    }
    if let Some(s) = splitter {
        p.splitter = s.into();
    }
    cfg.validate()?;
    let report = run_protocol(&cfg.protocol_run())?;
    print!("{}", report.to_text());
    out.emit("protocol_stages.csv", &report.stages_csv())?;
    if !report.fringe.is_empty() {
        let csv = fringe_csv(&report.fringe);
        println!("fringe amplitude {:.6}", fringe_amplitude(&report.fringe));
        print!("{csv}");
        out.emit("protocol_fringe.csv", &csv)?;
    }
    match &report.failed_stage {
        Some(stage) => Err(Failure::Simulation(format!("protocol failed at {stage}"))),
        None => Ok(()),
    }
}

fn parse_species(s: &str) -> Result<SpeciesParams, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["Na"] => Ok(SpeciesParams { name: "Na".into(), mass_u: 22.98977, scattering_length_a0: 65.0 }),
        ["Rb"] => Ok(SpeciesParams { name: "Rb".into(), mass_u: 86.90918, scattering_length_a0: 106.0 }),
        [name, m, a] => Ok(SpeciesParams {
            name: name.to_string(),
            mass_u: m.parse().map_err(|_| Failure::Usage(format!("bad mass in '{s}'")))?,
            scattering_length_a0: a.parse().map_err(|_| Failure::Usage(format!("bad scattering length in '{s}'")))?,
        }),
        _ => Err(Failure::Usage(format!("unknown species '{s}' (use Na, Rb or name:mass_u:a0)"))),
    }
}

fn cmd_table1(cfg: &mut RunConfig, out: &Output, species: Vec<String>) -> Result<(), Failure> {
    if !species.is_empty() {
        cfg.species = species.iter().map(|s| parse_species(s)).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    let table = emit_table1(&cfg.species_list()?, &cfg.table.speeds(), cfg.table.depth, cfg.table.u0)?;
    print!("{}", table.to_text());
    out.emit("table1.csv", &table.to_csv())
}

#[allow(clippy::too_many_arguments)]
fn cmd_interfere(
    cfg: &mut RunConfig,
    out: &Output,
    n: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    visibility: Option<f64>,
    theta: f64,
    delta: f64,
    delta_scan: usize,
    subset: Option<String>,
    shots: Option<usize>,
    splitter: Option<SplitterArg>,
) -> Result<(), Failure> {
    let n = n.unwrap_or(cfg.n_particles);
    let model = match (alpha, visibility) {
        (Some(a), _) => {
            let b = beta.unwrap_or_else(|| (1.0 - a * a).max(0.0).sqrt());
            MeasurementModel::new(n, a, b, theta, delta)?
        }
        (None, v) => MeasurementModel::from_visibility(n, v.unwrap_or(1.0), theta, delta)?,
    };
    let model = model.with_splitter(splitter.map(Into::into).unwrap_or(cfg.protocol.splitter));
    let p = coincidence_probability(&model)?;
    println!(
        "N = {n}, alpha = {}, beta = {}, visibility = {}, theta = {}, Delta = {}",
        fmt(model.alpha),
        fmt(model.beta),
        fmt(model.visibility()),
        fmt(theta),
        fmt(delta)
    );
    println!("P(+1) = {}, P(-1) = {}, <prod s> = {}", fmt(p), fmt(1.0 - p), fmt(2.0 * p - 1.0));
    if delta_scan > 0 {
        let fringe = catsim::protocol::fringe_scan(&model, delta_scan)?;
        let csv = fringe_csv(&fringe);
        println!("fringe amplitude {}", fmt(fringe_amplitude(&fringe)));
        print!("{csv}");
        out.emit("fringe.csv", &csv)?;
    }
    if let Some(s) = subset {
        let atoms: Vec<usize> = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| match t.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(Failure::Usage(format!("bad atom index '{t}' (1-based)"))),
            })
            .collect::<Result<_, _>>()?;
        let marginal = marginal_distribution(&model, &atoms)?;
        let mut csv = String::from("outcome,probability\n");
        for (outcome, prob) in &marginal {
            let label: Vec<String> = outcome.iter().map(|s| format!("{s:+}")).collect();
            csv.push_str(&format!("{},{}\n", label.join(" "), fmt(*prob)));
        }
        print!("{csv}");
        out.emit("marginal.csv", &csv)?;
    }
    if let Some(shots) = shots {
        let samples = sample_outcomes(&model, shots, cfg.seed)?;
        println!(
            "sampled <prod s> = {} +- {} over {shots} shots (seed {})",
            fmt(samples.mean),
            fmt(samples.stderr),
            cfg.seed
        );
        out.emit("outcomes.csv", &records_csv(&samples))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_criticalv(
    cfg: &mut RunConfig,
    out: &Output,
    stage: Stage,
    metric: MetricArg,
    lo: f64,
    hi: f64,
    threshold: f64,
    phi_max: f64,
    width: f64,
) -> Result<(), Failure> {
    cfg.stage = stage;
    cfg.validate()?;
    let trap = cfg.trap(stage);
    let (d_start, d_end) = sweep_range(&trap);
    let disc = stage_grid(cfg, &trap, trap.d)?;
    let eigen = cfg.eigen();
    let opts = propagator(cfg);
    let search = match (metric, stage) {
        (MetricArg::Retention, _) => {
            let sweep = StageSweep::from_ground(&disc, &trap, d_start, d_end, 4, &eigen, &opts)?;
            find_critical_velocity(Metric::Retention { threshold }, lo, hi, width, |v| match stage {
                Stage::II => sweep.doublet_retention(v),
                _ => sweep.ground_retention(v),
            })?
        }
        (MetricArg::Dephasing, Stage::II) => {
            let sweep = StageSweep::from_ground(&disc, &trap, d_start, d_end, 2, &eigen, &opts)?;
            find_critical_velocity(Metric::Dephasing { phi_max }, lo, hi, width, |v| Ok(sweep.cat(v)?.theta))?
        }
        (MetricArg::Dephasing, _) => {
            let pair = BranchPair::new(&disc, &trap, cfg.protocol.branch_asymmetry, d_start, d_end, &eigen, &opts)?;
            find_critical_velocity(Metric::Dephasing { phi_max }, lo, hi, width, |v| Ok(pair.phase(v)?.0))?
        }
    };
    let mut csv = String::from("v,metric\n");
    for (v, m) in &search.evaluations {
        csv.push_str(&format!("{},{}\n", fmt(*v), fmt(*m)));
    }
    print!("{csv}");
    println!(
        "critical speed {} (bracket [{}, {}])",
        fmt(search.speed),
        fmt(search.bracket.0),
        fmt(search.bracket.1)
    );
    out.emit(&format!("criticalv_stage{}.csv", stage.name()), &csv)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(p) = &cli.common.preset {
        if !PRESETS.contains(&p.as_str()) {
            return Err(Failure::Usage(format!("unknown preset '{p}' (expected one of {PRESETS:?})")));
        }
    }
    let mut cfg = load_config(&cli.common)?;
    let out = Output { dir: cfg.output_dir.as_deref().map(Path::new).map(Path::to_path_buf) };
    match cli.command {
        Command::Spectrum { stage, levels, points, d_min, d_max } => {
            cmd_spectrum(&mut cfg, &out, stage, levels, points, d_min, d_max)
        }
        Command::Sweep { stage, v, levels } => cmd_sweep(&mut cfg, &out, stage, v, levels),
        Command::Protocol { v1, v2, v3, phases, mode, handoff, handoff_duration, delta_scan, retention_floor, splitter } => {
            cmd_protocol(
                &mut cfg,
                &out,
                v1,
                v2,
                v3,
                phases,
                mode,
                handoff,
                handoff_duration,
                delta_scan,
                retention_floor,
                splitter,
            )
        }
        Command::Table1 { species } => cmd_table1(&mut cfg, &out, species),
        Command::Interfere { n, alpha, beta, visibility, theta, delta, delta_scan, subset, shots, splitter } => {
            cmd_interfere(&mut cfg, &out, n, alpha, beta, visibility, theta, delta, delta_scan, subset, shots, splitter)
        }
        Command::Criticalv { stage, metric, lo, hi, threshold, phi_max, width } => {
            cmd_criticalv(&mut cfg, &out, stage, metric, lo, hi, threshold, phi_max, width)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Simulation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
