//! Radial cutoffs of the model test form and their Dirichlet energies.
//!
//! The cutoff is a product `χ(w) = ∏ χ₁(|w_i| / R)` over the coordinates,
//! so for the harmonic form `β` the energy splits exactly:
//! `⟨Δ(χβ), χβ⟩ = ‖∂̄χ ∧ β‖² + ‖∂̄*(χβ)‖² = Σ_j A_j ∏_{i≠j} N_i`, with one
//! radial integral per coordinate.

use alloc::vec::Vec;

use super::{coordinate_tail_norm, model_test_form, FormError, ModelWeight};
use crate::hermitian::CurvatureSpectrum;
use crate::quad::GaussLegendre;

/// `χ₁` on `[0, ∞)`: one on `[0, inner]`, zero on `[1, ∞)`, and in between
/// the smoothstep polynomial of degree `2N + 1` with `N` continuous
/// derivatives at both junctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    inner: f64,
    smoothness: usize,
}

impl Default for CutoffProfile {
    /// The quintic bump: `N = 2`, inner fraction `1/2`.
    fn default() -> Self {
        CutoffProfile { inner: 0.5, smoothness: 2 }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CutoffProfile {
    pub fn new(inner: f64, smoothness: usize) -> Result<Self, FormError> {
        if !(inner > 0.0 && inner < 1.0) {
            return Err(FormError::InvalidParameter("inner fraction must lie in (0, 1)"));
        }
        if !(2..=20).contains(&smoothness) {
            return Err(FormError::InvalidParameter("smoothness must be between 2 and 20"));
        }
        Ok(CutoffProfile { inner, smoothness })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    fn width(&self) -> f64 {
        1.0 - self.inner
    }

    /// `S_N(x) = x^{N+1} Σ_k C(N+k, k) C(2N+1, N-k) (-x)^k` on `[0, 1]`.
    fn step(&self, x: f64) -> f64 {
        let n = self.smoothness;
        let poly: f64 = (0..=n).map(|k| binomial(n + k, k) * binomial(2 * n + 1, n - k) * (-x).powi(k as i32)).sum();
        x.powi(n as i32 + 1) * poly
    }

    /// `S_N'(x) = c_N x^N (1 - x)^N` with `c_N = (2N+1)! / (N!)²`.
    fn step_derivative(&self, x: f64) -> f64 {
        let n = self.smoothness as i32;
        self.step_slope() * x.powi(n) * (1.0 - x).powi(n)
    }

    fn step_slope(&self) -> f64 {
        let n = self.smoothness;
        (2 * n + 1) as f64 * binomial(2 * n, n)
    }

    fn coordinate(&self, s: f64) -> f64 {
        ((1.0 - s) / self.width()).clamp(0.0, 1.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.step(self.coordinate(s))
    }

    /// `dχ₁/ds`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s <= self.inner || s >= 1.0 {
            return 0.0;
        }
        -self.step_derivative(self.coordinate(s)) / self.width()
    }

    pub fn sup_derivative(&self) -> f64 {
        self.step_slope() / 4f64.powi(self.smoothness as i32) / self.width()
    }

    /// `sup |χ₁''|`, located by sampling the closed-form second derivative
    /// `c_N N x^{N-1}(1-x)^{N-1}(1-2x)`.
    pub fn sup_second_derivative(&self) -> f64 {
        let n = self.smoothness as i32;
        // the maximum sits at x = (1 ± 1/sqrt(2N - 1)) / 2
        let x = 0.5 * (1.0 - 1.0 / ((2 * n - 1) as f64).sqrt());
        let v = self.step_slope() * n as f64 * (x * (1.0 - x)).powi(n - 1) * (1.0 - 2.0 * x);
        v.abs() / (self.width() * self.width())
    }
}

/// Norm, energy and analytic energy bound of `χ(·/R) β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEnergy {
    pub radius: f64,
    pub norm: f64,
    pub energy: f64,
    pub delta_bound: f64,
}

/// Radial integrals for one coordinate with decay `c`: `(N, A)` where
/// `N = ∫ χ₁(ρ/R)² dP` and `A = ∫ |∂_{w̄} χ₁(|w|/R)|² dP` for the probability
/// density `2cρ e^{-cρ²} dρ`.
fn coordinate_integrals(c: f64, radius: f64, chi: &CutoffProfile, points: usize) -> (f64, f64) {
    let lo = chi.inner * radius;
    let rule = GaussLegendre::new(points, lo, radius);
    let density = |rho: f64| 2.0 * c * rho * (-c * rho * rho).exp();
    let core = -(-c * lo * lo).exp_m1();
    let ramp = rule.integrate(|rho| chi.eval(rho / radius).powi(2) * density(rho));
    let slope = rule.integrate(|rho| {
        let d = chi.derivative(rho / radius) / radius;
        0.25 * d * d * density(rho)
    });
    (core + ramp, slope)
}

fn energy_at(cs: &[f64], radius: f64, chi: &CutoffProfile, points: usize) -> (f64, f64) {
    let parts: Vec<(f64, f64)> = cs.iter().map(|&c| coordinate_integrals(c, radius, chi, points)).collect();
    let norm = parts.iter().map(|p| p.0).product();
    let energy = (0..parts.len())
        .map(|j| parts[j].1 * parts.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, p)| p.0).product::<f64>())
        .sum();
    (norm, energy)
}

/// `‖χβ‖²`, `⟨Δ_{γ0}(χβ), χβ⟩` and the bound
/// `sup|χ₁'|² / (4R²) · Σ_j ‖β‖²_{|w_j| ≥ inner·R}`, which dominates the
/// energy because `χ₁'` vanishes on the inner disc and `χ₁ ≤ 1`.
pub fn cutoff_energy(
    spec: &CurvatureSpectrum,
    q: usize,
    radius: f64,
    chi: &CutoffProfile,
    resolution: usize,
) -> Result<CutoffEnergy, FormError> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(FormError::InvalidParameter("cutoff radius must be at least 1"));
    }
    if resolution == 0 {
        return Err(FormError::InvalidParameter("resolution must be positive"));
    }
    let (weight, realized) = ModelWeight::negatives_first(spec)?;
    if realized != q {
        return Err(FormError::SignPatternMismatch);
    }
    let cs: Vec<f64> = weight.mu().iter().map(|m| m.abs()).collect();
    let (norm, energy) = energy_at(&cs, radius, chi, resolution);
    let (norm2, energy2) = energy_at(&cs, radius, chi, 2 * resolution);
    if (norm - norm2).abs() > 1e-10 || (energy - energy2).abs() > 1e-10 * energy2.abs() {
        return Err(FormError::QuadratureFailure);
    }
    let beta = model_test_form(&weight)?;
    let mut tails = 0.0;
    for j in 0..weight.n() {
        tails += coordinate_tail_norm(&beta, &weight, j, chi.inner * radius)?;
    }
    let s = chi.sup_derivative();
    let delta_bound = s * s / (4.0 * radius * radius) * tails;
    Ok(CutoffEnergy { radius, norm: norm2, energy: energy2, delta_bound })
}
