//! Orthonormal basis of the permutation-symmetric sector.
//!
//! Each basis state is labelled by a sorted occupation tuple
//! `s_0 ≤ s_1 ≤ … ≤ s_{N−1}` of grid nodes and is the normalised sum over the
//! distinct coordinate permutations of that tuple. Coefficients `c_s` relate
//! to dense amplitudes by `c_s = √mult(s) · ψ(s) · h^{N/2}`, so the coefficient
//! vector has unit Euclidean norm for a normalised state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dense_len, Grid, Symmetry, WaveFunction, MAX_PARTICLES};

#[derive(Debug)]
pub struct BosonicBasis {
    points: usize,
    n_particles: usize,
    /// Sorted tuples, `n_particles` entries per state.
    states: Vec<u16>,
    /// Number of distinct permutations of each tuple.
    multiplicity: Vec<f64>,
    /// Coincident pairs `#{i<j : s_i = s_j}` per state.
    pairs: Vec<u8>,
    /// Nearest-neighbour hopping in CSR layout. The bosonic factor of each
    /// hop is `√hop_factor` with `hop_factor = n_a (n_{a±1} + 1)`.
    hop_start: Vec<u32>,
    hop_col: Vec<u32>,
    hop_factor: Vec<u8>,
    binom: Vec<Vec<usize>>,
}

fn binomial_table(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; k + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=k.min(i) {
            t[i][j] = t[i - 1][j - 1] + if j <= i - 1 { t[i - 1][j] } else { 0 };
        }
    }
    t
}

impl BosonicBasis {
    pub fn new(points: usize, n_particles: usize) -> Result<Self> {
        if n_particles == 0 || n_particles > MAX_PARTICLES {
            return Err(Error::InvalidParameter(format!("particle count must be 1..={MAX_PARTICLES}")));
        }
        if points > u16::MAX as usize {
            return Err(Error::TooLarge(format!("{points} grid points")));
        }
        let n = n_particles;
        let binom = binomial_table(points + n, n);
        let dim = binom[points + n - 1][n];
        if dim > u32::MAX as usize / 4 {
            return Err(Error::TooLarge(format!("bosonic dimension {dim}")));
        }

        let mut states = vec![0u16; dim * n];
        let mut tuple = vec![0usize; n];
        loop {
            let r = rank(&binom, &tuple);
            for k in 0..n {
                states[r * n + k] = tuple[k] as u16;
            }
            match (0..n).rev().find(|&k| tuple[k] + 1 < points) {
                Some(k) => {
                    let v = tuple[k] + 1;
                    tuple[k..].iter_mut().for_each(|t| *t = v);
                }
                None => break,
            }
        }

        let mut multiplicity = Vec::with_capacity(dim);
        let mut pairs = Vec::with_capacity(dim);
        let factorial = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
        for s in states.chunks_exact(n) {
            let mut denom = 1.0;
            let mut p = 0usize;
            let mut run = 1usize;
            for k in 1..=n {
                if k < n && s[k] == s[k - 1] {
                    run += 1;
                } else {
                    denom *= factorial(run);
                    p += run * (run - 1) / 2;
                    run = 1;
                }
            }
            multiplicity.push(factorial(n) / denom);
            pairs.push(p as u8);
        }

        let mut hop_start = Vec::with_capacity(dim + 1);
        let mut hop_col = Vec::with_capacity(dim * 2 * n);
        let mut hop_factor = Vec::with_capacity(dim * 2 * n);
        let mut scratch = vec![0usize; n];
        hop_start.push(0u32);
        for s in states.chunks_exact(n) {
            // move one copy of each distinct occupied value up or down
            let mut k = 0;
            while k < n {
                let a = s[k] as usize;
                let mut run = 1;
                while k + run < n && s[k + run] as usize == a {
                    run += 1;
                }
                for dir in [-1isize, 1] {
                    let b = a as isize + dir;
                    if b < 0 || b >= points as isize {
                        continue;
                    }
                    let b = b as usize;
                    let target_occ = s.iter().filter(|&&x| x as usize == b).count();
                    for (dst, &src) in scratch.iter_mut().zip(s) {
                        *dst = src as usize;
                    }
                    // replace the last copy of a (keeps order for +1) or the first (for −1)
                    let pos = if dir > 0 { k + run - 1 } else { k };
                    scratch[pos] = b;
                    scratch.sort_unstable();
                    hop_col.push(rank(&binom, &scratch) as u32);
                    hop_factor.push((run * (target_occ + 1)) as u8);
                }
                k += run;
            }
            hop_start.push(hop_col.len() as u32);
        }

        Ok(Self { points, n_particles, states, multiplicity, pairs, hop_start, hop_col, hop_factor, binom })
    }

    pub fn dim(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn state(&self, index: usize) -> &[u16] {
        &self.states[index * self.n_particles..(index + 1) * self.n_particles]
    }

    pub fn multiplicity(&self, index: usize) -> f64 {
        self.multiplicity[index]
    }

    pub fn coincident_pairs(&self, index: usize) -> u8 {
        self.pairs[index]
    }

    /// Index of a sorted tuple of node indices.
    pub fn index_of(&self, sorted: &[usize]) -> usize {
        rank(&self.binom, sorted)
    }

    /// Hop targets of a state and their squared bosonic factors.
    pub(crate) fn hops(&self, index: usize) -> (&[u32], &[u8]) {
        let lo = self.hop_start[index] as usize;
        let hi = self.hop_start[index + 1] as usize;
        (&self.hop_col[lo..hi], &self.hop_factor[lo..hi])
    }

    /// Expands symmetric-sector coefficients into dense amplitudes.
    pub fn to_wavefunction(&self, grid: &Grid, coeffs: &[Complex64]) -> Result<WaveFunction> {
        self.check(grid, coeffs.len())?;
        let n = self.n_particles;
        let m = self.points;
        let len = dense_len(m, n)?;
        let scale = grid.spacing().powf(-0.5 * n as f64);
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        let mut coords = vec![0usize; n];
        let mut sorted = vec![0usize; n];
        for (idx, a) in amps.iter_mut().enumerate() {
            let mut r = idx;
            for k in (0..n).rev() {
                coords[k] = r % m;
                r /= m;
            }
            sorted.copy_from_slice(&coords);
            sorted.sort_unstable();
            let s = self.index_of(&sorted);
            *a = coeffs[s] * (scale / self.multiplicity[s].sqrt());
        }
        Ok(WaveFunction::new(*grid, n, amps)?.with_symmetry(Symmetry::Bosonic))
    }

    /// Orthogonal projection of a dense state onto the basis: `c_s = ⟨s|ψ⟩`.
    pub fn project(&self, psi: &WaveFunction) -> Result<Vec<Complex64>> {
        if psi.n_particles() != self.n_particles || psi.grid().points != self.points {
            return Err(Error::GridMismatch("wavefunction does not match basis".into()));
        }
        let n = self.n_particles;
        let m = self.points;
        let scale = psi.grid().spacing().powf(0.5 * n as f64);
        let mut c = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut sorted = vec![0usize; n];
        for (idx, a) in psi.amplitudes().iter().enumerate() {
            let mut r = idx;
            for k in (0..n).rev() {
                sorted[k] = r % m;
                r /= m;
            }
            sorted.sort_unstable();
            c[self.index_of(&sorted)] += *a;
        }
        for (s, v) in c.iter_mut().enumerate() {
            *v *= scale / self.multiplicity[s].sqrt();
        }
        Ok(c)
    }

    fn check(&self, grid: &Grid, len: usize) -> Result<()> {
        if grid.points != self.points || len != self.dim() {
            return Err(Error::GridMismatch(format!(
                "basis has {} points / dim {}, got {} points / {} coefficients",
                self.points,
                self.dim(),
                grid.points,
                len
            )));
        }
        Ok(())
    }
}

/// Colex rank of a nondecreasing tuple via the strictly increasing
/// `t_k = s_k + k`.
fn rank(binom: &[Vec<usize>], sorted: &[usize]) -> usize {
    sorted.iter().enumerate().map(|(k, &s)| binom[s + k][k + 1]).sum()
}
