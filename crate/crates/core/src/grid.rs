//! N-particle wavefunctions on the tensor power of a uniform 1D grid.
//!
//! Amplitudes are stored row-major over particle coordinates (the first
//! particle is the slowest index) and normalised so that `Σ|ψ|² hᴺ = 1`.
//! Dirichlet walls sit one spacing outside the first and last node.

use std::io::{Read, Write};

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense states are limited to this many particles.
pub const MAX_PARTICLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidParameter(format!("grid needs at least 8 points, got {points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!("bad grid interval [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, points })
    }

    /// Grid symmetric about the origin with the origin on a node; the half
    /// width is rounded up to a whole number of spacings.
    pub fn symmetric(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && half_width > 0.0) {
            return Err(Error::InvalidParameter("grid spacing and half width must be positive".into()));
        }
        let half_points = (half_width / spacing - 1e-9).ceil() as usize;
        let x = half_points as f64 * spacing;
        Self::new(-x, x, 2 * half_points + 1)
    }

    /// Box `[−(extent + margin·σ), extent + margin·σ]` around wells whose
    /// centres stay within `±extent`.
    pub fn for_wells(extent: f64, sigma: f64, margin_sigmas: f64, spacing: f64) -> Result<Self> {
        Self::symmetric(extent + margin_sigmas * sigma, spacing)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node(&self, x: f64) -> Option<usize> {
        let f = (x - self.x_min) / self.spacing();
        let i = f.round();
        ((f - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < self.points).then_some(i as usize)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.points == other.points
            && (self.x_min - other.x_min).abs() <= 1e-12 * (1.0 + self.x_min.abs())
            && (self.x_max - other.x_max).abs() <= 1e-12 * (1.0 + self.x_max.abs())
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Bosonic,
    Unchecked,
}

#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    n_particles: usize,
    amplitudes: Vec<Complex64>,
    symmetry: Symmetry,
}

/// Open interval of positions, `lo < x < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub const LEFT: Region = Region { lo: f64::NEG_INFINITY, hi: 0.0 };
    pub const RIGHT: Region = Region { lo: 0.0, hi: f64::INFINITY };
    pub const ALL: Region = Region { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPopulation {
    /// Probability that every particle lies in the region.
    pub all_in: f64,
    /// Single-particle marginal: mean probability of one particle being there.
    pub marginal: f64,
}

pub(crate) fn dense_len(points: usize, n: usize) -> Result<usize> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(Error::InvalidParameter(format!("particle count must be 1..={MAX_PARTICLES}, got {n}")));
    }
    points
        .checked_pow(n as u32)
        .filter(|&len| len <= 1 << 28)
        .ok_or_else(|| Error::TooLarge(format!("{points}^{n} amplitudes")))
}

fn unravel(mut index: usize, points: usize, n: usize, out: &mut [usize]) {
    for k in (0..n).rev() {
        out[k] = index % points;
        index /= points;
    }
}

fn ravel(coords: &[usize], points: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * points + c)
}

impl WaveFunction {
    pub fn new(grid: Grid, n_particles: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = dense_len(grid.points, n_particles)?;
        if amplitudes.len() != len {
            return Err(Error::InvalidParameter(format!(
                "expected {len} amplitudes for {n_particles} particles on {} points, got {}",
                grid.points,
                amplitudes.len()
            )));
        }
        Ok(Self { grid, n_particles, amplitudes, symmetry: Symmetry::Unchecked })
    }

    pub fn zeros(grid: Grid, n_particles: usize) -> Result<Self> {
        let len = dense_len(grid.points, n_particles)?;
        Self::new(grid, n_particles, vec![Complex64::new(0.0, 0.0); len])
    }

    pub(crate) fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    fn volume(&self) -> f64 {
        self.grid.spacing().powi(self.n_particles as i32)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateInput);
        }
        let s = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// Largest |ψ(..x_i..x_j..) − ψ(..x_j..x_i..)| over all pairwise swaps.
    pub fn swap_deviation(&self) -> f64 {
        let n = self.n_particles;
        let m = self.grid.points;
        let mut coords = vec![0usize; n];
        let mut worst = 0.0f64;
        for (idx, a) in self.amplitudes.iter().enumerate() {
            unravel(idx, m, n, &mut coords);
            for i in 0..n {
                for j in i + 1..n {
                    coords.swap(i, j);
                    let b = self.amplitudes[ravel(&coords, m)];
                    coords.swap(i, j);
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }

    /// Sum over all coordinate permutations (not divided by N!).
    fn permutation_sum(&self) -> Vec<Complex64> {
        let n = self.n_particles;
        let m = self.grid.points;
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut coords = vec![0usize; n];
        let mut permuted = vec![0usize; n];
        for (idx, slot) in out.iter_mut().enumerate() {
            unravel(idx, m, n, &mut coords);
            for p in &perms {
                for (k, &pk) in p.iter().enumerate() {
                    permuted[k] = coords[pk];
                }
                *slot += self.amplitudes[ravel(&permuted, m)];
            }
        }
        out
    }

    /// Projects onto the permutation-symmetric subspace and renormalises.
    pub fn symmetrize(&self) -> Result<WaveFunction> {
        let sum = self.permutation_sum();
        let mut out = WaveFunction::new(self.grid, self.n_particles, sum)?;
        if out.norm() <= 1e-12 * self.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateInput);
        }
        out.normalize()?;
        out.symmetry = Symmetry::Bosonic;
        Ok(out)
    }

    /// Single-particle density ρ(x), normalised to integrate to one.
    pub fn density(&self) -> Vec<f64> {
        let n = self.n_particles;
        let m = self.grid.points;
        let mut rho = vec![0.0; m];
        let mut coords = vec![0usize; n];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            unravel(idx, m, n, &mut coords);
            let w = a.norm_sqr();
            for &c in &coords {
                rho[c] += w;
            }
        }
        let total: f64 = rho.iter().sum::<f64>() * self.grid.spacing();
        if total > 0.0 {
            rho.iter_mut().for_each(|r| *r /= total);
        }
        rho
    }

    /// Largest single-particle density at the two outermost nodes relative to
    /// the peak density.
    pub fn boundary_density(&self) -> f64 {
        let rho = self.density();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        rho[0].max(rho[rho.len() - 1]) / peak
    }

    /// Copies the state onto `target` (same spacing) after translating it by
    /// `shift`, which must be a whole number of spacings. Amplitudes falling
    /// outside the target box are dropped; the result is not renormalised.
    pub fn translated_onto(&self, target: &Grid, shift: f64) -> Result<WaveFunction> {
        let h = self.grid.spacing();
        if (target.spacing() - h).abs() > 1e-12 * h {
            return Err(Error::GridMismatch(format!("spacing {} vs {}", h, target.spacing())));
        }
        let offset_f = (self.grid.x_min + shift - target.x_min) / h;
        let offset = offset_f.round();
        if (offset_f - offset).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!("shift {shift} is not a whole number of spacings")));
        }
        let offset = offset as isize;
        let n = self.n_particles;
        let (ms, mt) = (self.grid.points, target.points);
        let mut out = WaveFunction::zeros(*target, n)?;
        let mut coords = vec![0usize; n];
        let mut mapped = vec![0usize; n];
        'outer: for (idx, a) in self.amplitudes.iter().enumerate() {
            unravel(idx, ms, n, &mut coords);
            for k in 0..n {
                let c = coords[k] as isize + offset;
                if c < 0 || c >= mt as isize {
                    continue 'outer;
                }
                mapped[k] = c as usize;
            }
            out.amplitudes[ravel(&mapped, mt)] = *a;
        }
        out.symmetry = self.symmetry;
        Ok(out)
    }

    pub fn write_density_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,density")?;
        for (i, r) in self.density().iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.x(i), r)?;
        }
        Ok(())
    }

    /// Flat little-endian dump: `M: u64, N: u64, x_min: f64, h: f64`, then
    /// interleaved (re, im) f64 pairs in row-major coordinate order.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.grid.points as u64).to_le_bytes())?;
        w.write_all(&(self.n_particles as u64).to_le_bytes())?;
        w.write_all(&self.grid.x_min.to_le_bytes())?;
        w.write_all(&self.grid.spacing().to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<WaveFunction> {
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let points = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let x_min = f64::from_le_bytes(next(&mut r)?);
        let h = f64::from_le_bytes(next(&mut r)?);
        let grid = Grid::new(x_min, x_min + h * (points as f64 - 1.0), points)?;
        let len = dense_len(points, n)?;
        let mut amplitudes = Vec::with_capacity(len);
        for _ in 0..len {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            amplitudes.push(Complex64::new(re, im));
        }
        WaveFunction::new(grid, n, amplitudes)
    }
}

#[derive(Debug, Clone)]
pub struct ProductState {
    pub state: WaveFunction,
    /// Norm² of `Σ_π ⊗ φ_{π(i)} / √N!` before renormalisation.
    pub raw_norm_sq: f64,
}

/// Symmetrised tensor product of single-particle orbitals (each normalised
/// as `Σ|φ|² h = 1`).
pub fn product_state(grid: &Grid, n_particles: usize, orbitals: &[Vec<Complex64>]) -> Result<ProductState> {
    if orbitals.len() != n_particles {
        return Err(Error::InvalidParameter(format!(
            "{} orbitals supplied for {} particles",
            orbitals.len(),
            n_particles
        )));
    }
    if let Some(bad) = orbitals.iter().find(|o| o.len() != grid.points) {
        return Err(Error::GridMismatch(format!("orbital of length {} on {} points", bad.len(), grid.points)));
    }
    let m = grid.points;
    let len = dense_len(m, n_particles)?;
    let mut raw = vec![Complex64::new(0.0, 0.0); len];
    let mut coords = vec![0usize; n_particles];
    for (idx, slot) in raw.iter_mut().enumerate() {
        unravel(idx, m, n_particles, &mut coords);
        *slot = coords.iter().zip(orbitals).map(|(&c, o)| o[c]).product();
    }
    let prod = WaveFunction::new(*grid, n_particles, raw)?;
    let factorial: f64 = (1..=n_particles).map(|k| k as f64).product();
    let mut sum = WaveFunction::new(*grid, n_particles, prod.permutation_sum())?;
    sum.scale(Complex64::new(1.0 / factorial.sqrt(), 0.0));
    let raw_norm_sq = sum.norm_sq();
    sum.normalize()?;
    sum.symmetry = Symmetry::Bosonic;
    Ok(ProductState { state: sum, raw_norm_sq })
}

/// Discrete inner product `Σ conj(a) b hᴺ`.
pub fn overlap(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    a.grid.check_same(&b.grid)?;
    if a.n_particles != b.n_particles {
        return Err(Error::GridMismatch(format!("{} vs {} particles", a.n_particles, b.n_particles)));
    }
    let s: Complex64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.volume())
}

pub fn region_population(psi: &WaveFunction, region: Region) -> RegionPopulation {
    let n = psi.n_particles;
    let m = psi.grid.points;
    let inside: Vec<bool> = (0..m).map(|i| region.contains(psi.grid.x(i))).collect();
    let mut coords = vec![0usize; n];
    let (mut all_in, mut marginal) = (0.0, 0.0);
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        unravel(idx, m, n, &mut coords);
        let w = a.norm_sqr();
        let count = coords.iter().filter(|&&c| inside[c]).count();
        if count == n {
            all_in += w;
        }
        marginal += w * count as f64 / n as f64;
    }
    let vol = psi.volume();
    RegionPopulation { all_in: all_in * vol, marginal: marginal * vol }
}

/// Normalised real orbital `Σ|φ|² h = 1` from samples of a function.
pub fn orbital_from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let mut v: Vec<f64> = (0..grid.points).map(|i| f(grid.x(i))).collect();
    let norm = (v.iter().map(|x| x * x).sum::<f64>() * grid.spacing()).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gaussian(grid: &Grid, center: f64, width: f64) -> Vec<Complex64> {
        orbital_from_fn(grid, |x| (-(x - center).powi(2) / (2.0 * width * width)).exp())
    }

    #[test]
    fn symmetric_grid_has_origin_node() {
        let g = Grid::symmetric(5.5, 0.2).unwrap();
        assert!(g.node(0.0).is_some());
        assert!(g.x_max >= 5.5);
        assert!((g.spacing() - 0.2).abs() < 1e-12);
        assert!(Grid::new(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn symmetric_input_is_fixed_point() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let w = gaussian(&g, 0.3, 0.5);
        let psi = product_state(&g, 3, &[w.clone(), w.clone(), w]).unwrap().state;
        let again = psi.symmetrize().unwrap();
        let diff = psi.amplitudes().iter().zip(again.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn identical_orbitals_need_no_symmetrization() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let w = gaussian(&g, 0.0, 0.5);
        let p = product_state(&g, 3, &[w.clone(), w.clone(), w]).unwrap();
        // 3!/√3! · ⊗w has norm² 3! when every permutation coincides
        assert!((p.raw_norm_sq - 6.0).abs() < 1e-12);
        assert!(p.state.swap_deviation() < 1e-12);
    }

    #[test]
    fn disjoint_orbitals_give_unit_norm() {
        let g = Grid::symmetric(4.0, 0.25).unwrap();
        let orb = |lo: f64, hi: f64| orbital_from_fn(&g, move |x| if x > lo && x < hi { 1.0 } else { 0.0 });
        let p = product_state(&g, 3, &[orb(-3.9, -1.6), orb(-1.1, 1.1), orb(1.6, 3.9)]).unwrap();
        assert!((p.raw_norm_sq - 1.0).abs() < 1e-12);
        // six explicit terms: ψ(x1,x2,x3) = Σ_π Π w_π(i)(x_i) / √6
        let psi = &p.state;
        let (i, j, k) = (g.node(-2.5).unwrap(), g.node(0.0).unwrap(), g.node(2.5).unwrap());
        let m = g.points;
        let a = psi.amplitudes()[(i * m + j) * m + k];
        let b = psi.amplitudes()[(k * m + i) * m + j];
        assert!((a - b).norm() < 1e-14);
        let expect = orb(-3.9, -1.6)[i] * orb(-1.1, 1.1)[j] * orb(1.6, 3.9)[k] / 6f64.sqrt();
        assert!((a - expect).norm() < 1e-14);
        assert!(region_population(psi, Region::new(-4.0, -1.5)).all_in < 1e-300);
    }

    #[test]
    fn two_orbital_overlap_formula() {
        let g = Grid::symmetric(4.0, 0.1).unwrap();
        let a = gaussian(&g, -0.4, 0.6);
        let b = gaussian(&g, 0.5, 0.6);
        let s: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * g.spacing();
        let p = product_state(&g, 2, &[a, b]).unwrap();
        assert!((p.raw_norm_sq - (1.0 + s.norm_sqr())).abs() < 1e-12);
        assert!((p.state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antisymmetric_input_rejected() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let a = gaussian(&g, -0.5, 0.5);
        let b = gaussian(&g, 0.5, 0.5);
        let m = g.points;
        let amps = (0..m * m).map(|idx| a[idx / m] * b[idx % m] - b[idx / m] * a[idx % m]).collect();
        let psi = WaveFunction::new(g, 2, amps).unwrap();
        assert!(matches!(psi.symmetrize(), Err(Error::DegenerateInput)));
    }

    #[test]
    fn wrong_orbital_count() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let a = gaussian(&g, 0.0, 0.5);
        assert!(product_state(&g, 3, &[a.clone(), a]).is_err());
    }

    #[test]
    fn overlap_properties() {
        let g = Grid::symmetric(3.0, 0.2).unwrap();
        let a = product_state(&g, 2, &[gaussian(&g, -1.0, 0.5), gaussian(&g, 1.0, 0.5)]).unwrap().state;
        let mut b = product_state(&g, 2, &[gaussian(&g, 0.0, 0.7), gaussian(&g, 0.5, 0.4)]).unwrap().state;
        b.scale(Complex64::from_polar(1.0, 0.7));
        assert!((overlap(&a, &a).unwrap() - c(1.0)).norm() < 1e-12);
        let ab = overlap(&a, &b).unwrap();
        let ba = overlap(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        let other = WaveFunction::zeros(Grid::symmetric(3.0, 0.25).unwrap(), 2).unwrap();
        assert!(overlap(&a, &other).is_err());
    }

    #[test]
    fn full_domain_population_is_one() {
        let g = Grid::symmetric(3.0, 0.2).unwrap();
        let w = gaussian(&g, 0.0, 0.5);
        let psi = product_state(&g, 2, &[w.clone(), w]).unwrap().state;
        let p = region_population(&psi, Region::ALL);
        assert!((p.all_in - 1.0).abs() < 1e-12 && (p.marginal - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::symmetric(1.0, 0.25).unwrap();
        let psi = product_state(&g, 2, &[gaussian(&g, -0.2, 0.5), gaussian(&g, 0.3, 0.4)]).unwrap().state;
        let mut buf = Vec::new();
        psi.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 16 * g.points * g.points);
        let back = WaveFunction::read_binary(&buf[..]).unwrap();
        assert!(back.grid().same_as(&g));
        assert_eq!(back.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn translation_by_whole_spacings() {
        let small = Grid::symmetric(2.0, 0.25).unwrap();
        let big = Grid::symmetric(4.0, 0.25).unwrap();
        let psi = product_state(&small, 2, &[gaussian(&small, 0.0, 0.4), gaussian(&small, 0.0, 0.4)]).unwrap().state;
        let moved = psi.translated_onto(&big, 1.5).unwrap();
        assert!((moved.norm() - 1.0).abs() < 1e-12);
        assert!(region_population(&moved, Region::RIGHT).all_in > 0.99);
        assert!(psi.translated_onto(&big, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn partition_of_domain_sums_to_one(c1 in -1.5f64..1.5, c2 in -1.5f64..1.5, w in 0.2f64..0.8) {
            let g = Grid::symmetric(3.0, 0.2).unwrap();
            let psi = product_state(&g, 2, &[gaussian(&g, c1, w), gaussian(&g, c2, w)]).unwrap().state;
            let l = region_population(&psi, Region::LEFT).all_in;
            let r = region_population(&psi, Region::RIGHT).all_in;
            let zero = g.node(0.0).unwrap();
            let m = g.points;
            let mut mixed = 0.0;
            for (idx, a) in psi.amplitudes().iter().enumerate() {
                let (i, j) = (idx / m, idx % m);
                let left = |k: usize| k < zero;
                let right = |k: usize| k > zero;
                if !((left(i) && left(j)) || (right(i) && right(j))) {
                    mixed += a.norm_sqr();
                }
            }
            mixed *= g.spacing().powi(2);
            prop_assert!((l + r + mixed - 1.0).abs() < 1e-10);
            prop_assert!(psi.swap_deviation() < 1e-10);
        }
    }
}
