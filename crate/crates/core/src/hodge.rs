//! Finite cochain complexes `V_0 → V_1 → … → V_m` and the spectra of their
//! Hodge Laplacians `Δ_j = A_jᴴA_j + A_{j−1}A_{j−1}ᴴ`.
//!
//! Random complexes are assembled from Gaussian-integer matrices. Each space
//! splits as `V_j = H_j ⊕ B_j ⊕ C_j`, the differential maps `C_j` onto
//! `B_{j+1}` by a nonsingular block, and a change of basis with an exact
//! dyadic inverse hides the splitting. Every entry is a short dyadic
//! rational, so `A_{j+1}A_j` evaluates to exactly zero in floating point.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{eigvalsh, CMatrix};

/// Largest space dimension accepted by the random generator.
pub const MAX_SPACE_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HodgeError {
    #[error("a complex needs at least one space")]
    Empty,
    #[error("dimensions and harmonic ranks admit no splitting")]
    InfeasibleDims,
    #[error("map {index} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch { index: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("map {index} has a non-finite entry")]
    NonFinite { index: usize },
    #[error("maps {index} and {} do not compose to zero", index + 1)]
    NotAComplex { index: usize },
}

/// `V_0 → … → V_m` with `maps[j]: V_j → V_{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteComplex {
    dims: Vec<usize>,
    maps: Vec<CMatrix>,
}

impl FiniteComplex {
    /// Checks shapes, finiteness and `A_{j+1}A_j = 0` (exactly).
    pub fn new(dims: Vec<usize>, maps: Vec<DMatrix<Complex64>>) -> Result<Self, HodgeError> {
        if dims.is_empty() {
            return Err(HodgeError::Empty);
        }
        if maps.len() + 1 != dims.len() {
            return Err(HodgeError::InfeasibleDims);
        }
        for (j, a) in maps.iter().enumerate() {
            if a.nrows() != dims[j + 1] || a.ncols() != dims[j] {
                return Err(HodgeError::ShapeMismatch {
                    index: j,
                    rows: a.nrows(),
                    cols: a.ncols(),
                    expected_rows: dims[j + 1],
                    expected_cols: dims[j],
                });
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(HodgeError::NonFinite { index: j });
            }
        }
        let c = FiniteComplex { dims, maps };
        if let Some(j) = (0..c.maps.len().saturating_sub(1)).find(|&j| c.composition_residual(j) != 0.0) {
            return Err(HodgeError::NotAComplex { index: j });
        }
        Ok(c)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[DMatrix<Complex64>] {
        &self.maps
    }

    /// Top degree `m`.
    pub fn length(&self) -> usize {
        self.dims.len() - 1
    }

    /// `max |(A_{j+1}A_j)_{ab}|`.
    pub fn composition_residual(&self, j: usize) -> f64 {
        let prod = &self.maps[j + 1] * &self.maps[j];
        prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Δ_j`.
    pub fn laplacian(&self, j: usize) -> DMatrix<Complex64> {
        let d = self.dims[j];
        let mut lap = CMatrix::zeros(d, d);
        if let Some(a) = self.maps.get(j) {
            lap += a.adjoint() * a;
        }
        if j > 0 {
            let a = &self.maps[j - 1];
            lap += a * a.adjoint();
        }
        lap
    }

    /// `Σ (−1)^j dim V_j`.
    pub fn euler_characteristic(&self) -> i64 {
        alternating(&self.dims)
    }
}

fn alternating(v: &[usize]) -> i64 {
    v.iter().enumerate().map(|(j, &x)| if j % 2 == 0 { x as i64 } else { -(x as i64) }).sum()
}

/// `c_j = rank A_j` for prescribed harmonic ranks, or random feasible ranks.
fn ranks<R: Rng>(dims: &[usize], harmonic: Option<&[usize]>, rng: &mut R) -> Result<Vec<usize>, HodgeError> {
    let m = dims.len() - 1;
    let mut c = vec![0usize; m];
    let mut prev = 0usize;
    for j in 0..m {
        let room = dims[j].checked_sub(prev).ok_or(HodgeError::InfeasibleDims)?;
        c[j] = match harmonic {
            Some(h) => room.checked_sub(h[j]).ok_or(HodgeError::InfeasibleDims)?,
            None => rng.gen_range(0..=room.min(dims[j + 1])),
        };
        if c[j] > dims[j + 1] {
            return Err(HodgeError::InfeasibleDims);
        }
        prev = c[j];
    }
    if let Some(h) = harmonic {
        if dims[m].checked_sub(prev) != Some(h[m]) {
            return Err(HodgeError::InfeasibleDims);
        }
    }
    Ok(c)
}

/// Number of pair rotations in each change of basis.
const ROTATIONS: usize = 12;

/// `(P, P⁻¹)` with `P` a product of a unit-phase diagonal and `ROTATIONS`
/// Gaussian-integer rotations `[[1, u], [−ū, 1]]` (`|u| = 1`) on random
/// coordinate pairs, with `1 + i` on the remaining diagonal. Each rotation satisfies `RᴴR = 2I`, so `P` is `2^{k/2}`
/// times a unitary and `P⁻¹ = Pᴴ / 2^k` is exact in binary floating point.
fn scaled_unitary<R: Rng>(d: usize, rng: &mut R) -> (CMatrix, CMatrix) {
    const UNITS: [Complex64; 4] =
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
    let mut p =
        CMatrix::from_fn(d, d, |i, j| if i == j { UNITS[rng.gen_range(0..4)] } else { Complex64::new(0.0, 0.0) });
    for _ in 0..ROTATIONS {
        // 1 + i on the untouched coordinates keeps RᴴR = 2I
        let mut rot = CMatrix::identity(d, d) * Complex64::new(1.0, 1.0);
        if d >= 2 {
            let a = rng.gen_range(0..d);
            let b = (a + rng.gen_range(1..d)) % d;
            let u = UNITS[rng.gen_range(0..4)];
            rot[(a, a)] = Complex64::new(1.0, 0.0);
            rot[(b, b)] = Complex64::new(1.0, 0.0);
            rot[(a, b)] = u;
            rot[(b, a)] = -u.conj();
        }
        p = rot * p;
    }
    let inv = p.adjoint() / Complex64::new(2f64.powi(ROTATIONS as i32), 0.0);
    debug_assert_eq!(&p * &inv, CMatrix::identity(d, d));
    (p, inv)
}

fn small_diagonal<R: Rng>(c: usize, rng: &mut R) -> CMatrix {
    let entries: Vec<Complex64> = (0..c).map(|_| Complex64::new(rng.gen_range(1i32..=3) as f64, 0.0)).collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries))
}

/// A nonsingular `c × c` block `D₁·Q·D₂` with diagonals in `{1, 2, 3}` and
/// `Q` a scaled unitary, so its condition number is at most 9.
fn nonsingular_block<R: Rng>(c: usize, rng: &mut R) -> CMatrix {
    let (q, _) = scaled_unitary(c, rng);
    small_diagonal(c, rng) * q * small_diagonal(c, rng)
}

/// A random complex with the given dimensions, deterministic in `seed`.
/// `harmonic` prescribes `dim ker Δ_j`; otherwise the ranks are drawn at
/// random among the feasible ones.
pub fn random_complex(dims: &[usize], harmonic: Option<&[usize]>, seed: u64) -> Result<FiniteComplex, HodgeError> {
    if dims.is_empty() {
        return Err(HodgeError::Empty);
    }
    if dims.iter().any(|&d| d == 0 || d > MAX_SPACE_DIM) {
        return Err(HodgeError::InfeasibleDims);
    }
    if harmonic.is_some_and(|h| h.len() != dims.len()) {
        return Err(HodgeError::InfeasibleDims);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = ranks(dims, harmonic, &mut rng)?;
    let m = dims.len() - 1;
    // coordinates of V_j in the adapted basis: [B_j | C_j | H_j]
    let bases: Vec<(CMatrix, CMatrix)> = dims.iter().map(|&d| scaled_unitary(d, &mut rng)).collect();
    let mut maps = Vec::with_capacity(m);
    for j in 0..m {
        let b_j = if j == 0 { 0 } else { c[j - 1] };
        let mut e = CMatrix::zeros(dims[j + 1], dims[j]);
        let block = nonsingular_block(c[j], &mut rng);
        // C_j (columns b_j..b_j+c_j) onto B_{j+1} (rows 0..c_j)
        e.view_mut((0, b_j), (c[j], c[j])).copy_from(&block);
        maps.push(&bases[j + 1].0 * e * &bases[j].1);
    }
    FiniteComplex::new(dims.to_vec(), maps)
}

/// Spectra of all `Δ_j` with the harmonic counts `h^j` and the truncated
/// counts `h^j_{≤μ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHodgeNumbers {
    /// Ascending eigenvalues of `Δ_j`.
    pub spectra: Vec<Vec<f64>>,
    pub kernel_tol: f64,
    pub h: Vec<usize>,
}

/// Eigen-solves every Laplacian. The kernel threshold is `1e−10` times the
/// largest eigenvalue over all degrees.
pub fn hodge_numbers(c: &FiniteComplex) -> TruncatedHodgeNumbers {
    let spectra: Vec<Vec<f64>> = (0..c.dims.len()).map(|j| eigvalsh(&c.laplacian(j))).collect();
    let top = spectra.iter().flatten().fold(0.0f64, |a, &x| a.max(x));
    let kernel_tol = 1e-10 * top;
    let h = spectra.iter().map(|s| s.iter().filter(|&&x| x <= kernel_tol).count()).collect();
    TruncatedHodgeNumbers { spectra, kernel_tol, h }
}

impl TruncatedHodgeNumbers {
    /// `#{λ ≤ μ}` per degree. `μ` below the kernel threshold counts as the
    /// threshold, so `h_le(0) = h`.
    pub fn h_le(&self, mu: f64) -> Vec<usize> {
        let cut = mu.max(self.kernel_tol);
        self.spectra.iter().map(|s| s.iter().filter(|&&x| x <= cut).count()).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        alternating(&self.h)
    }

    pub fn truncated_euler_characteristic(&self, mu: f64) -> i64 {
        alternating(&self.h_le(mu))
    }

    /// `(Σ_{j≤q} (−1)^{q−j} h^j, Σ_{j≤q} (−1)^{q−j} h^j_{≤μ})`, or `None`
    /// when `q` exceeds the length.
    pub fn partial_sums(&self, q: usize, mu: f64) -> Option<(i64, i64)> {
        if q >= self.h.len() {
            return None;
        }
        let le = self.h_le(mu);
        let sum = |v: &[usize]| -> i64 {
            (0..=q).map(|j| if (q - j).is_multiple_of(2) { v[j] as i64 } else { -(v[j] as i64) }).sum()
        };
        Some((sum(&self.h), sum(&le)))
    }

    pub fn truncation_holds(&self, q: usize, mu: f64) -> Option<bool> {
        self.partial_sums(q, mu).map(|(lhs, rhs)| lhs <= rhs)
    }

    /// `{0}` followed by `points` logarithmically spaced values from half the
    /// smallest nonzero eigenvalue to twice the largest.
    pub fn canonical_mu_grid(&self, points: usize) -> Vec<f64> {
        let nonzero = self.spectra.iter().flatten().copied().filter(|&x| x > self.kernel_tol);
        let (lo, hi) = nonzero.fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(x), b.max(x)));
        let mut grid = vec![0.0];
        if hi == 0.0 || points == 0 {
            return grid;
        }
        let (a, b) = ((lo / 2.0).ln(), (2.0 * hi).ln());
        if points == 1 {
            grid.push(b.exp());
            return grid;
        }
        grid.extend((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()));
        grid
    }
}

/// The alternating partial-sum inequality for `c` at degree `q` and level `μ`.
pub fn truncation_inequality_check(c: &FiniteComplex, q: usize, mu: f64) -> Option<bool> {
    hodge_numbers(c).truncation_holds(q, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
    }

    #[test]
    fn forced_acyclic_pair() {
        let c = random_complex(&[1, 1], Some(&[0, 0]), 5).unwrap();
        assert!(c.maps()[0][(0, 0)].norm() > 0.0);
        assert_eq!(hodge_numbers(&c).h, vec![0, 0]);
    }

    #[test]
    fn compositions_vanish_exactly() {
        for seed in 0..20 {
            let c = random_complex(&[2, 2, 2], None, seed).unwrap();
            assert_eq!(c.composition_residual(0), 0.0);
        }
        let c = random_complex(&[3, 7, 9, 6, 2], None, 99).unwrap();
        for j in 0..3 {
            assert_eq!(c.composition_residual(j), 0.0);
        }
    }

    #[test]
    fn prescribed_harmonic_ranks() {
        let c = random_complex(&[2, 2, 3], Some(&[1, 0, 2]), 17).unwrap();
        assert_eq!(hodge_numbers(&c).h, vec![1, 0, 2]);
    }

    #[test]
    fn infeasible_splittings() {
        assert_eq!(random_complex(&[1, 1], Some(&[1, 0]), 0), Err(HodgeError::InfeasibleDims));
        assert_eq!(random_complex(&[2, 1], Some(&[0, 0]), 0), Err(HodgeError::InfeasibleDims));
        assert_eq!(random_complex(&[], None, 0), Err(HodgeError::Empty));
        assert_eq!(random_complex(&[0, 1], None, 0), Err(HodgeError::InfeasibleDims));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = random_complex(&[4, 6, 3], None, 8).unwrap();
        let b = random_complex(&[4, 6, 3], None, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_scalar_map() {
        let eps = 0.3;
        let c = FiniteComplex::new(vec![1, 1], vec![scalar(eps)]).unwrap();
        let hn = hodge_numbers(&c);
        assert_eq!(hn.h, vec![0, 0]);
        assert!((hn.spectra[0][0] - eps * eps).abs() < 1e-15);
        assert_eq!(hn.h_le(eps * eps), vec![1, 1]);
        assert_eq!(hn.h_le(0.5 * eps * eps), vec![0, 0]);
        assert_eq!(hn.partial_sums(1, eps * eps), Some((0, 0)));
        assert_eq!(hn.truncation_holds(1, 1.0), Some(true));
        assert_eq!(hn.truncation_holds(2, 1.0), None);
    }

    #[test]
    fn zero_maps() {
        let zero = CMatrix::zeros(3, 2);
        let c = FiniteComplex::new(vec![2, 3], vec![zero]).unwrap();
        let hn = hodge_numbers(&c);
        assert_eq!(hn.h, vec![2, 3]);
        for mu in [0.0, 1.0, 1e6] {
            assert_eq!(hn.h_le(mu), vec![2, 3]);
        }
    }

    #[test]
    fn rejects_non_complexes() {
        let a = scalar(1.0);
        assert_eq!(
            FiniteComplex::new(vec![1, 1, 1], vec![a.clone(), a.clone()]),
            Err(HodgeError::NotAComplex { index: 0 })
        );
        assert!(matches!(FiniteComplex::new(vec![1, 2], vec![a]), Err(HodgeError::ShapeMismatch { index: 0, .. })));
        assert_eq!(FiniteComplex::new(vec![1, 1], vec![scalar(f64::NAN)]), Err(HodgeError::NonFinite { index: 0 }));
    }

    #[test]
    fn euler_and_truncation_on_random_complexes() {
        for seed in 0..50u64 {
            let len = 2 + (seed % 5) as usize;
            let dims: Vec<usize> = (0..len).map(|j| 1 + ((seed as usize * 7 + j * 5) % 12)).collect();
            let c = random_complex(&dims, None, seed).unwrap();
            let hn = hodge_numbers(&c);
            assert_eq!(hn.euler_characteristic(), c.euler_characteristic());
            let grid = hn.canonical_mu_grid(16);
            let mut last = vec![0; dims.len()];
            for &mu in &grid {
                let le = hn.h_le(mu);
                assert!(le.iter().zip(&last).all(|(a, b)| a >= b));
                assert!(le.iter().zip(&hn.h).all(|(a, b)| a >= b));
                assert_eq!(hn.truncated_euler_characteristic(mu), hn.euler_characteristic());
                for q in 0..dims.len() {
                    assert_eq!(hn.truncation_holds(q, mu), Some(true), "seed {seed} q {q} mu {mu}");
                }
                last = le;
            }
            assert_eq!(hn.h_le(*grid.last().unwrap()), dims);
        }
    }
}
