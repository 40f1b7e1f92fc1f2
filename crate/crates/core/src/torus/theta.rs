//! Theta-series Bergman function of a degree-`N` line bundle on
//! `C/(Z + iZ)`.
//!
//! In the frame where the Hermitian weight is `2πN y²`, the sections are
//! `θ_j(x, y) = Σ_n exp(−πN (s + y)²) e^{2πiNsx}` with `s = n + j/N`,
//! `j = 0..N`, already multiplied by the square root of the weight. They are
//! pairwise orthogonal; the Gram diagonal is summed from error functions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::TorusError;

/// Bergman function of `L^k` on a grid of the fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    pub dim: usize,
    pub grid: usize,
    /// `B` at the cell midpoints, row-major in `(y, x)`.
    pub values: Vec<f64>,
    pub mean: f64,
    /// `∫ B` over the unit-area domain (midpoint rule).
    pub integral: f64,
    /// `(max − min) / mean` over the grid.
    pub defect: f64,
}

const TAIL: f64 = 1e-17;
const MAX_TERMS: i64 = 10_000;

/// `‖θ_j‖² = Σ_n ∫_0^1 exp(−2πN(n + j/N + y)²) dy`, summed term by term
/// outward from the peak until the terms drop below the tail tolerance.
pub fn theta_gram_diagonal(dim: usize, j: usize) -> Result<f64, TorusError> {
    let nf = dim as f64;
    let a = (2.0 * PI * nf).sqrt();
    let term = |n: i64| {
        let s = n as f64 + j as f64 / nf;
        (libm::erf(a * (s + 1.0)) - libm::erf(a * s)) / (2.0 * (2.0 * nf).sqrt())
    };
    let mut sum = term(0) + term(-1);
    for side in [1i64, -1] {
        let mut n = if side > 0 { 1 } else { -2 };
        loop {
            let t = term(n);
            sum += t;
            if t.abs() <= TAIL * sum {
                break;
            }
            n += side;
            if n.abs() > MAX_TERMS {
                return Err(TorusError::SeriesNotConverged);
            }
        }
    }
    Ok(sum)
}

/// `θ_j(x, y)`.
fn theta_value(dim: usize, j: usize, x: f64, y: f64) -> Result<Complex64, TorusError> {
    let nf = dim as f64;
    let center = (-y - j as f64 / nf).round() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut add = |n: i64| {
        let s = n as f64 + j as f64 / nf;
        let mag = (-PI * nf * (s + y) * (s + y)).exp();
        acc += Complex64::from_polar(mag, 2.0 * PI * nf * s * x);
        mag
    };
    add(center);
    for side in [1i64, -1] {
        let mut n = center + side;
        loop {
            if add(n) <= TAIL {
                break;
            }
            n += side;
            if (n - center).abs() > MAX_TERMS {
                return Err(TorusError::SeriesNotConverged);
            }
        }
    }
    Ok(acc)
}

/// `B = Σ_j |θ_j|² / ‖θ_j‖²` on the `grid × grid` midpoints, for the bundle
/// of degree `k·m`.
pub fn theta_bergman(m: u32, k: u32, grid: usize) -> Result<ThetaField, TorusError> {
    let dim = (m as usize) * (k as usize);
    if m == 0 || k == 0 || dim > 64 {
        return Err(TorusError::InvalidParameter("theta oracle needs 1 ≤ k·m ≤ 64"));
    }
    if grid == 0 {
        return Err(TorusError::InvalidParameter("grid must be positive"));
    }
    let gram: Vec<f64> = (0..dim).map(|j| theta_gram_diagonal(dim, j)).collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(grid * grid);
    for iy in 0..grid {
        let y = (iy as f64 + 0.5) / grid as f64;
        for ix in 0..grid {
            let x = (ix as f64 + 0.5) / grid as f64;
            let mut b = 0.0;
            for (j, g) in gram.iter().enumerate() {
                b += theta_value(dim, j, x, y)?.norm_sqr() / g;
            }
            values.push(b);
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(ThetaField { dim, grid, mean, integral: mean, defect: (hi - lo) / mean, values })
}

/// Ratio of the theta Bergman constant to the curvature density `∂∂̄(2πN y²)`
/// of its weight, measured by a central difference in `y`. This is the
/// one-dimensional convention constant relating `|det Θ|` in degree units
/// to the flat model kernel.
pub fn measured_kappa(field: &ThetaField) -> f64 {
    let nf = field.dim as f64;
    let phi = |y: f64| 2.0 * PI * nf * y * y;
    let h = 1e-3;
    let y = 0.3;
    // ∂∂̄ = Δ/4 and the weight does not depend on x
    let density = (phi(y + h) - 2.0 * phi(y) + phi(y - h)) / (h * h) / 4.0;
    field.mean / density
}
