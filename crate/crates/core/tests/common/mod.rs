#![allow(dead_code)]

use num_complex::Complex64;

use catsim::dynamics::{propagate_with, PropagatorOptions};
use catsim::operator::SymmetricOperator;

/// `[[r t/2, Δ/2], [Δ/2, −r t/2]]` with the clock set by `set_time`.
pub struct TwoLevel {
    pub rate: f64,
    pub gap: f64,
    diag: [f64; 2],
}

impl TwoLevel {
    pub fn new(rate: f64, gap: f64) -> Self {
        Self { rate, gap, diag: [0.0; 2] }
    }

    pub fn set_time(&mut self, t: f64) {
        let a = 0.5 * self.rate * t;
        self.diag = [a, -a];
    }

    /// Lower and upper instantaneous eigenvectors.
    pub fn adiabatic(&self) -> ([f64; 2], [f64; 2]) {
        let (a, g) = (self.diag[0], 0.5 * self.gap);
        if g == 0.0 {
            return if a <= 0.0 { ([1.0, 0.0], [0.0, 1.0]) } else { ([0.0, 1.0], [-1.0, 0.0]) };
        }
        let e = (a * a + g * g).sqrt();
        let norm = |v: [f64; 2]| {
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / n, v[1] / n]
        };
        let lower = if a <= 0.0 { norm([g, -a - e]) } else { norm([a - e, g]) };
        (lower, [-lower[1], lower[0]])
    }
}

impl SymmetricOperator for TwoLevel {
    fn dim(&self) -> usize {
        2
    }
    fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        let g = 0.5 * self.gap;
        y[0] = self.diag[0] * x[0] + g * x[1];
        y[1] = g * x[0] + self.diag[1] * x[1];
    }
    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        let g = 0.5 * self.gap;
        y[0] = x[0] * self.diag[0] + x[1] * g;
        y[1] = x[0] * g + x[1] * self.diag[1];
    }
    fn diagonal(&self) -> &[f64] {
        &self.diag
    }
}

/// Sweeps from `−half_time` to `+half_time` starting in the lower adiabatic
/// state; returns the final upper-state population and the norm drift.
pub fn landau_zener(rate: f64, gap: f64, half_time: f64, dt: f64) -> (f64, f64) {
    let mut op = TwoLevel::new(rate, gap);
    op.set_time(-half_time);
    let (lower, _) = op.adiabatic();
    let psi0 = [Complex64::new(lower[0], 0.0), Complex64::new(lower[1], 0.0)];
    let opts = PropagatorOptions { dt, ..PropagatorOptions::default() };
    let (psi, _) = propagate_with(&mut op, |o, t| o.set_time(t - half_time), &psi0, 2.0 * half_time, &opts, |_, _, _| {})
        .expect("two-level propagation");
    op.set_time(half_time);
    let (_, upper) = op.adiabatic();
    let amp = psi[0] * upper[0] + psi[1] * upper[1];
    let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
    (amp.norm_sqr(), (norm - 1.0).abs())
}
