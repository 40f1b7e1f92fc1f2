//! Hermitian linear algebra at a point: eigenvalues of a curvature form
//! relative to a background metric, the signature class `X(q)` and the
//! relative determinant.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;

/// Default relative tolerance below which an eigenvalue counts as zero.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HermitianError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not conjugate-symmetric at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("background metric is not positive definite")]
    NonPositiveMetric,
    #[error("spectrum has an eigenvalue within tolerance of zero")]
    DegenerateSpectrum,
}

/// A complex Hermitian `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates conjugate symmetry up to `1e-12` relative to the largest
    /// entry and stores the exact Hermitian part.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, HermitianError> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(HermitianError::NotSquare { rows, cols });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HermitianError::NonFinite);
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..rows {
            for j in i..cols {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(HermitianError::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(HermitianMatrix { entries: linalg::hermitian_part(&entries) })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self, HermitianError> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix { entries: DMatrix::identity(n, n) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianMatrix { entries: linalg::real_diagonal(values) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `Sᴴ M S`.
    pub fn congruence(&self, s: &DMatrix<Complex64>) -> Result<Self, HermitianError> {
        if s.nrows() != self.dim() {
            return Err(HermitianError::DimensionMismatch { left: self.dim(), right: s.nrows() });
        }
        Self::new(s.adjoint() * &self.entries * s)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.entries)
    }
}

/// Eigenvalues of a model curvature form relative to a background metric,
/// split into the block transverse to the foliation (`lambdas`, length `r`)
/// and the leaf block (`nus`, length `n - r`). Both blocks are sorted
/// descending.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSpectrum {
    lambdas: Vec<f64>,
    nus: Vec<f64>,
    tolerance: f64,
}

/// Signature class of a point: `q` negative eigenvalues, or a zero eigenvalue
/// within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Index(usize),
    Degenerate,
}

impl CurvatureSpectrum {
    pub fn new(mut lambdas: Vec<f64>, mut nus: Vec<f64>) -> Self {
        lambdas.sort_by(|a, b| b.total_cmp(a));
        nus.sort_by(|a, b| b.total_cmp(a));
        CurvatureSpectrum { lambdas, nus, tolerance: DEFAULT_DEGENERACY_TOL }
    }

    /// Relative zero-detection tolerance (scaled by the spectral radius).
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        assert!(tolerance >= 0.0, "tolerance must be non-negative");
        self.tolerance = tolerance;
        self
    }

    /// Splits the eigenvalues of `theta` relative to `omega0` into the first
    /// `r` coordinates and the rest, diagonalizing each diagonal block
    /// separately.
    pub fn from_blocks(theta: &HermitianMatrix, omega0: &HermitianMatrix, r: usize) -> Result<Self, HermitianError> {
        let n = theta.dim();
        let block = |m: &HermitianMatrix, lo: usize, hi: usize| {
            HermitianMatrix::new(m.entries.view((lo, lo), (hi - lo, hi - lo)).into_owned())
        };
        let lambdas = eigen_rel(&block(theta, 0, r)?, &block(omega0, 0, r)?)?;
        let nus = eigen_rel(&block(theta, r, n)?, &block(omega0, r, n)?)?;
        Ok(Self::new(lambdas, nus))
    }

    pub fn n(&self) -> usize {
        self.lambdas.len() + self.nus.len()
    }

    pub fn r(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn nus(&self) -> &[f64] {
        &self.nus
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.lambdas.iter().chain(&self.nus).copied()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values().map(f64::abs).fold(0.0, f64::max)
    }

    pub fn is_degenerate_value(&self, v: f64) -> bool {
        v.abs() <= self.tolerance * self.spectral_radius()
    }

    pub fn negated(&self) -> Self {
        CurvatureSpectrum::new(self.lambdas.iter().map(|v| -v).collect(), self.nus.iter().map(|v| -v).collect())
            .with_tolerance(self.tolerance)
    }
}

/// Generalized eigenvalues of `(theta, omega0)`, sorted descending.
pub fn eigen_rel(theta: &HermitianMatrix, omega0: &HermitianMatrix) -> Result<Vec<f64>, HermitianError> {
    if theta.dim() != omega0.dim() {
        return Err(HermitianError::DimensionMismatch { left: theta.dim(), right: omega0.dim() });
    }
    if theta.dim() == 0 {
        return Ok(Vec::new());
    }
    let linv = linalg::inverse_cholesky_factor(&omega0.entries).ok_or(HermitianError::NonPositiveMetric)?;
    let reduced = &linv * &theta.entries * linv.adjoint();
    let mut values = linalg::eigvalsh(&reduced);
    values.reverse();
    Ok(values)
}

pub fn classify_point(spec: &CurvatureSpectrum) -> PointClass {
    if spec.values().any(|v| spec.is_degenerate_value(v)) {
        return PointClass::Degenerate;
    }
    PointClass::Index(spec.values().filter(|&v| v < 0.0).count())
}

/// `|det_{ω0} Θ|`: the product of the absolute eigenvalues.
pub fn det_rel(spec: &CurvatureSpectrum) -> Result<f64, HermitianError> {
    match classify_point(spec) {
        PointClass::Degenerate => Err(HermitianError::DegenerateSpectrum),
        PointClass::Index(_) => Ok(spec.values().map(f64::abs).product()),
    }
}
