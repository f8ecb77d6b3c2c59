//! Brute-force reference computations for the test suite.
//!
//! Everything here is written from the defining formulas and deliberately
//! shares no code with `catsim`: dense matrices instead of matrix-free
//! operators, an explicit permutation projector instead of a symmetric basis,
//! and a state-vector beamsplitter instead of closed-form amplitude products.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Largest dense problem accepted by [`dense_eigs`].
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    /// Every eigenvalue of the unsymmetrised Hamiltonian, ascending.
    pub all: Vec<f64>,
    /// Bosonic eigenvalues, ascending.
    pub bosonic: Vec<f64>,
    /// Bosonic eigenvectors as dense `M^N` arrays (first coordinate slowest),
    /// normalised so that `Σ|v|² = 1`.
    pub bosonic_vectors: Vec<Vec<f64>>,
    /// Largest asymmetry `|H_ij − H_ji|` of the assembled matrix.
    pub asymmetry: f64,
}

/// Sum of Gaussian wells `−Σ w_i v0 exp(−(x − c_i)²/2σ²)` sampled on `xs`.
pub fn gaussian_wells(xs: &[f64], v0: f64, sigma: f64, centers: &[f64], weights: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            centers
                .iter()
                .zip(weights)
                .map(|(&c, &w)| -w * v0 * (-(x - c) * (x - c) / (2.0 * sigma * sigma)).exp())
                .sum()
        })
        .collect()
}

/// Nodes `x_min + i h`, `i = 0..m`.
pub fn nodes(x_min: f64, x_max: f64, m: usize) -> (Vec<f64>, f64) {
    let h = (x_max - x_min) / (m - 1) as f64;
    ((0..m).map(|i| x_min + i as f64 * h).collect(), h)
}

fn index_to_coords(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    let mut c = vec![0; n];
    for k in (0..n).rev() {
        c[k] = idx % m;
        idx /= m;
    }
    c
}

fn coords_to_index(c: &[usize], m: usize) -> usize {
    c.iter().fold(0, |acc, &v| acc * m + v)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Assembles the full `M^N` Hamiltonian: second-difference kinetic term with
/// zero Dirichlet values one spacing outside the box, the sampled potential
/// for every particle, and `u0/h` for every pair on the same node.
pub fn dense_hamiltonian(potential: &[f64], h: f64, u0: f64, n: usize) -> Option<DMatrix<f64>> {
    let m = potential.len();
    let dim = m.checked_pow(n as u32)?;
    if dim > MAX_DENSE_DIM {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for row in 0..dim {
        let c = index_to_coords(row, m, n);
        let mut diag = 0.0;
        for i in 0..n {
            diag += 2.0 / (h * h) + potential[c[i]];
            for j in i + 1..n {
                if c[i] == c[j] {
                    diag += u0 / h;
                }
            }
            for step in [-1isize, 1] {
                let moved = c[i] as isize + step;
                if moved >= 0 && (moved as usize) < m {
                    let mut cc = c.clone();
                    cc[i] = moved as usize;
                    a[(row, coords_to_index(&cc, m))] += -1.0 / (h * h);
                }
            }
        }
        a[(row, row)] += diag;
    }
    Some(a)
}

/// Symmetriser `(1/N!) Σ_π P_π` as an explicit matrix.
pub fn symmetrizer(m: usize, n: usize) -> DMatrix<f64> {
    let dim = m.pow(n as u32);
    let perms = permutations(n);
    let w = 1.0 / perms.len() as f64;
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let c = index_to_coords(col, m, n);
        for perm in &perms {
            let pc: Vec<usize> = perm.iter().map(|&k| c[k]).collect();
            p[(coords_to_index(&pc, m), col)] += w;
        }
    }
    p
}

/// Full diagonalisation on a tiny grid. The bosonic sector is isolated by
/// diagonalising `P H P + λ (1 − P)` with the shift `λ` far above the
/// spectrum. Returns `None` above [`MAX_DENSE_DIM`].
pub fn dense_eigs(potential: &[f64], h: f64, u0: f64, n: usize) -> Option<DenseSpectrum> {
    let m = potential.len();
    let a = dense_hamiltonian(potential, h, u0, n)?;
    let dim = a.nrows();
    let asymmetry = (&a - a.transpose()).abs().max();

    let full = SymmetricEigen::new(a.clone());
    let mut all: Vec<f64> = full.eigenvalues.iter().cloned().collect();
    all.sort_by(|x, y| x.total_cmp(y));

    let p = symmetrizer(m, n);
    let spread = all[dim - 1] - all[0];
    let lambda = all[dim - 1] + 10.0 * spread.max(1.0);
    let eye = DMatrix::<f64>::identity(dim, dim);
    let shifted = &p * &a * &p + (&eye - &p) * lambda;
    let shifted = (&shifted + shifted.transpose()) * 0.5;
    let eig = SymmetricEigen::new(shifted);
    let cut = 0.5 * (all[dim - 1] + lambda);
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < cut)
        .map(|(j, &e)| (e, eig.eigenvectors.column(j).iter().cloned().collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (bosonic, bosonic_vectors) = pairs.into_iter().unzip();
    Some(DenseSpectrum { all, bosonic, bosonic_vectors, asymmetry })
}

/// Landau–Zener transition probability for
/// `H(t) = [[r t/2, Δ/2], [Δ/2, −r t/2]]` swept from `t = −∞` to `+∞`:
/// the diabatic levels cross at rate `r`, the adiabatic gap at closest
/// approach is `Δ`, and `P = exp(−2π (Δ/2)² / r)` (ħ = 1).
pub fn lz_analytic(gap: f64, rate: f64) -> f64 {
    (-2.0 * std::f64::consts::PI * (gap / 2.0).powi(2) / rate).exp()
}

/// Ground energy of `−∂² + v0 x²/(2σ²) − v0`, the harmonic expansion of a
/// Gaussian well of depth `v0` in units where the kinetic term is `−∂²`.
pub fn harmonic_ground_energy(v0: f64, sigma: f64) -> f64 {
    -v0 + (v0 / 2.0).sqrt() / sigma
}

/// Outcome distribution of the `N`-atom cat `α|L…L⟩ + β e^{iθ} e^{iΣφ}|R…R⟩`
/// after every atom passes a 2×2 splitter `u` (rows: output A, B; columns:
/// input L, R). Outcome bit `k` of the returned index is 1 when atom `k`
/// (most significant first) exits in B. The state vector is built in the
/// `{L,R}^N` basis and the splitter applied one atom at a time.
pub fn enumerate_interference(
    alpha: f64,
    beta: f64,
    theta: f64,
    phases: &[f64],
    u: [[Complex64; 2]; 2],
) -> Vec<f64> {
    let n = phases.len();
    let dim = 1usize << n;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    // index bit = 1 means R for atom (n-1-bitpos)
    state[0] = Complex64::new(alpha, 0.0);
    let total: f64 = theta + phases.iter().sum::<f64>();
    state[dim - 1] += Complex64::from_polar(beta, total);
    for atom in 0..n {
        let bit = 1usize << (n - 1 - atom);
        let mut next = vec![Complex64::new(0.0, 0.0); dim];
        for (idx, amp) in state.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let input = usize::from(idx & bit != 0);
            for output in 0..2 {
                let target = if output == 1 { idx | bit } else { idx & !bit };
                next[target] += u[output][input] * amp;
            }
        }
        state = next;
    }
    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter().map(|p| p / total).collect()
}

/// Parity `(−1)^{#B}` of an outcome index from [`enumerate_interference`].
pub fn outcome_product(index: usize) -> i32 {
    if index.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}
