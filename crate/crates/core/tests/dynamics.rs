mod common;

use num_complex::Complex64;

use catsim::dynamics::{
    extract_cat, final_spectrum, propagate, sweep_and_project, PropagatorOptions, Ramp, SerialSchedule,
};
use catsim::eigen::EigenOptions;
use catsim::grid::Grid;
use catsim::linalg::{cdot, cnorm, to_complex};
use catsim::operator::{Discretization, Hamiltonian};
use catsim::potential::{Schedule, Stage, TrapConfig};

fn lz_reference(gamma: f64) -> f64 {
    catsim_oracle::lz_analytic(2.0 * gamma.sqrt(), 1.0)
}

#[test]
fn landau_zener_probabilities() {
    for gamma in [0.1f64, 0.5, 1.0] {
        let (p, drift) = common::landau_zener(1.0, 2.0 * gamma.sqrt(), 150.0, 0.01);
        let exact = lz_reference(gamma);
        assert!((p / exact - 1.0).abs() < 0.01, "Γ = {gamma}: {p} vs {exact}");
        assert!(drift < 1e-10);
    }
}

#[test]
fn adiabatic_limit_and_sudden_limit() {
    let (slow, _) = common::landau_zener(0.05, 2.0, 150.0, 0.02);
    assert!(slow < 1e-6, "{slow}");
    let (fast, _) = common::landau_zener(1.0, 0.0, 20.0, 0.01);
    assert!((fast - 1.0).abs() < 1e-10, "{fast}");
}

fn small_disc(n: usize, half: f64, h: f64) -> Discretization {
    Discretization::new(Grid::symmetric(half, h).unwrap(), n).unwrap()
}

fn repulsive(n: usize, q: Vec<f64>, d: f64) -> TrapConfig {
    TrapConfig { stage: Stage::I, v0: 10.0, sigma: 0.5, q, d, u0: 10.0, n_particles: n }
}

#[test]
fn stationary_state_only_gains_phase() {
    let disc = small_disc(2, 3.0, 0.2);
    let cfg = repulsive(2, vec![0.0, 0.0], 1.0);
    let mut ham = Hamiltonian::new(&disc, &cfg).unwrap();
    let g = ham.eigensolve(1, &EigenOptions { tol: 1e-12, ..Default::default() }, &[]).unwrap();
    let psi0 = to_complex(&g.vectors[0]);
    let t = 3.7;
    let ramp = Ramp::Hold { d: 1.0, duration: t };
    let p = propagate(&mut ham, &psi0, &ramp, &PropagatorOptions { dt: 0.01, ..Default::default() }).unwrap();
    let expected = Complex64::from_polar(1.0, -g.values[0] * t);
    let got = cdot(&psi0, &p.state);
    assert!((got - expected).norm() < 1e-8, "{got} vs {expected}");
    assert!(p.norm_drift < 1e-10);
}

#[test]
fn sweep_conserves_norm() {
    let disc = small_disc(2, 3.5, 0.2);
    let cfg = repulsive(2, vec![-1e-4, 1e-4], 0.0);
    let mut ham = Hamiltonian::new(&disc, &cfg).unwrap();
    let g = ham.eigensolve(1, &EigenOptions::default(), &[]).unwrap();
    let ramp = Ramp::Linear(Schedule::new(0.0, 2.0, 0.5).unwrap());
    let p = propagate(&mut ham, &to_complex(&g.vectors[0]), &ramp, &PropagatorOptions { dt: 0.02, ..Default::default() })
        .unwrap();
    assert!(p.norm_drift < 1e-8, "{}", p.norm_drift);
    assert!((cnorm(&p.state) - 1.0).abs() < 1e-8);
}

#[test]
fn slow_split_follows_ground_state() {
    let disc = small_disc(2, 3.5, 0.25);
    let cfg = repulsive(2, vec![0.0, 0.0], 0.0);
    let mut ham = Hamiltonian::new(&disc, &cfg).unwrap();
    let eig = EigenOptions::default();
    let g = ham.eigensolve(1, &eig, &[]).unwrap();
    let ramp = Ramp::Linear(Schedule::new(0.0, 2.0, 0.1).unwrap());
    let target = final_spectrum(&ham, &ramp, 3, &eig).unwrap();
    let r = sweep_and_project(&mut ham, &to_complex(&g.vectors[0]), &ramp, &target, &PropagatorOptions {
        dt: 0.02,
        ..Default::default()
    })
    .unwrap();
    assert!(r.ground_probability > 0.99, "{:?}", r.projections);
    let fast = {
        let mut h = Hamiltonian::new(&disc, &cfg).unwrap();
        let ramp = Ramp::Linear(Schedule::new(0.0, 2.0, 20.0).unwrap());
        sweep_and_project(&mut h, &to_complex(&g.vectors[0]), &ramp, &target, &PropagatorOptions {
            dt: 0.002,
            ..Default::default()
        })
        .unwrap()
    };
    assert!(fast.ground_probability < r.ground_probability);
}

#[test]
fn serial_and_parallel_coincide_for_two_atoms() {
    let disc = small_disc(2, 3.5, 0.25);
    let cfg = repulsive(2, vec![-1e-3, 1e-3], 0.0);
    let eig = EigenOptions::default();
    let g = Hamiltonian::new(&disc, &cfg).unwrap().eigensolve(1, &eig, &[]).unwrap();
    let psi0 = to_complex(&g.vectors[0]);
    let opts = PropagatorOptions { dt: 0.02, ..Default::default() };
    let parallel = Ramp::Linear(Schedule::new(0.0, 2.0, 0.4).unwrap());
    let serial = Ramp::Serial(SerialSchedule { final_centers: vec![-1.0, 1.0], speed: 0.4, merge: false });
    assert!((serial.duration() - parallel.duration()).abs() < 1e-12);
    let a = propagate(&mut Hamiltonian::new(&disc, &cfg).unwrap(), &psi0, &parallel, &opts).unwrap();
    let b = propagate(&mut Hamiltonian::new(&disc, &cfg).unwrap(), &psi0, &serial, &opts).unwrap();
    let diff: f64 = a.state.iter().zip(&b.state).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn symmetric_two_well_split_gives_balanced_cat() {
    let disc = small_disc(2, 3.0, 0.25);
    let cfg = TrapConfig { stage: Stage::II, v0: 30.0, sigma: 0.5, q: vec![0.0, 0.0], d: 0.0, u0: -4.0, n_particles: 2 };
    let mut ham = Hamiltonian::new(&disc, &cfg).unwrap();
    let eig = EigenOptions::default();
    let g = ham.eigensolve(1, &eig, &[]).unwrap();
    let ramp = Ramp::Linear(Schedule::new(0.0, 2.0, 0.3).unwrap());
    let target = final_spectrum(&ham, &ramp, 2, &eig).unwrap();
    let r = sweep_and_project(&mut ham, &to_complex(&g.vectors[0]), &ramp, &target, &PropagatorOptions {
        dt: 0.02,
        ..Default::default()
    })
    .unwrap();
    let cat = extract_cat(&disc, &r.state, &target.states[0], &target.states[1]);
    assert!(cat.theta.abs() < 1e-6, "{cat:?}");
    assert!((cat.alpha - cat.beta).abs() < 1e-6, "{cat:?}");
    let psi = disc.to_wavefunction(&r.state).unwrap();
    assert!(psi.swap_deviation() < 1e-9);
}
