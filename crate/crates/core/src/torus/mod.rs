//! Products of elliptic curves `C/(Z + iZ)` carrying line bundles of known
//! degrees: cohomology by Riemann-Roch and Künneth, Morse integrals by
//! closed form or by quadrature, Bergman constants in exact arithmetic, and
//! truncated Bergman constants from the Landau-level spectrum.
//!
//! The first `r` factors carry `E` with degrees `d`, the last `n - r` carry
//! `F` with degrees `e`. The background form `ω0` gives every factor unit
//! area, so the eigenvalues of `Θ = c(E)|_{NY} ⊕ c(F)|_{TY}` relative to
//! `ω0` are the degrees themselves. In the flat model the matching weight
//! coefficients are `μ = π · degree`.

mod theta;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use thiserror::Error;

use crate::forms::{self, CutoffProfile, FormError};
use crate::hermitian::{classify_point, CurvatureSpectrum, HermitianMatrix, PointClass};
use crate::localize::ScalingPair;

pub use theta::{measured_kappa, theta_bergman, theta_gram_diagonal, ThetaField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("factor {factor} has degree zero")]
    ZeroDegreeFactor { factor: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
    #[error("operation needs the unperturbed scenario")]
    PerturbationUnsupported,
    #[error("quadrature for q = {q} moved from {coarse} to {fine} under refinement")]
    GridTooCoarse { q: usize, coarse: f64, fine: f64 },
    #[error("theta series did not converge")]
    SeriesNotConverged,
    #[error("spectral gap {galerkin} from the model disagrees with the Landau gap {landau}")]
    GapNotResolved { galerkin: f64, landau: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// One mode `a · cos(2π(kx·x + ky·y))` of the perturbation `ρ(z')`, where
/// `z_i = x_i + i y_i` on the first `r` factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMode {
    pub amplitude: f64,
    pub kx: Vec<i32>,
    pub ky: Vec<i32>,
}

/// `ρ = Σ modes`, added to the weight of `E` with amplitude `ε`; the
/// curvature of `E` becomes `diag(d) + ε · i∂∂̄ρ` relative to `ω0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub epsilon: f64,
    pub modes: Vec<FourierMode>,
}

impl Perturbation {
    /// `ρ = cos(2π x_1)`.
    pub fn cosine(epsilon: f64, r: usize) -> Self {
        let mut kx = vec![0; r];
        if r > 0 {
            kx[0] = 1;
        }
        Perturbation { epsilon, modes: vec![FourierMode { amplitude: 1.0, kx, ky: vec![0; r] }] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusScenario {
    d: Vec<i64>,
    e: Vec<i64>,
    perturbation: Option<Perturbation>,
    twist: u64,
}

impl TorusScenario {
    pub fn new(d: Vec<i64>, e: Vec<i64>) -> Result<Self, TorusError> {
        if d.len() + e.len() == 0 {
            return Err(TorusError::InvalidScenario("need at least one factor"));
        }
        if d.len() + e.len() > crate::MAX_DIM {
            return Err(TorusError::InvalidScenario("at most 8 factors"));
        }
        if let Some(factor) = d.iter().chain(&e).position(|&x| x == 0) {
            return Err(TorusError::ZeroDegreeFactor { factor });
        }
        Ok(TorusScenario { d, e, perturbation: None, twist: 1 })
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Result<Self, TorusError> {
        if !(p.epsilon >= 0.0) || !p.epsilon.is_finite() {
            return Err(TorusError::InvalidScenario("perturbation amplitude must be finite and non-negative"));
        }
        let r = self.r();
        if p.modes.iter().any(|m| m.kx.len() != r || m.ky.len() != r || !m.amplitude.is_finite()) {
            return Err(TorusError::InvalidScenario("perturbation modes must live on the first r factors"));
        }
        self.perturbation = if p.epsilon == 0.0 { None } else { Some(p) };
        Ok(self)
    }

    /// Tensors with the trivial bundle of rank `g`.
    pub fn with_twist(mut self, g: u64) -> Result<Self, TorusError> {
        if g == 0 {
            return Err(TorusError::InvalidScenario("twist rank must be positive"));
        }
        self.twist = g;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.d.len() + self.e.len()
    }

    pub fn r(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[i64] {
        &self.d
    }

    pub fn e(&self) -> &[i64] {
        &self.e
    }

    pub fn twist(&self) -> u64 {
        self.twist
    }

    pub fn perturbation(&self) -> Option<&Perturbation> {
        self.perturbation.as_ref()
    }

    pub fn is_flat(&self) -> bool {
        self.perturbation.is_none()
    }

    /// Degrees of `E^k ⊗ F^l` on each factor.
    pub fn factor_degrees(&self, k: u64, l: u64) -> Result<Vec<i128>, TorusError> {
        let scale = |x: i64, s: u64| (x as i128).checked_mul(s as i128).ok_or(TorusError::Overflow);
        let degs: Vec<i128> =
            self.d.iter().map(|&x| scale(x, k)).chain(self.e.iter().map(|&x| scale(x, l))).collect::<Result<_, _>>()?;
        if let Some(factor) = degs.iter().position(|&m| m == 0) {
            return Err(TorusError::ZeroDegreeFactor { factor });
        }
        Ok(degs)
    }

    /// The constant `Θ` spectrum of the unperturbed scenario.
    pub fn spectrum(&self) -> CurvatureSpectrum {
        CurvatureSpectrum::new(self.d.iter().map(|&x| x as f64).collect(), self.e.iter().map(|&x| x as f64).collect())
    }

    /// The flat model weight spectrum `μ = π · degree`.
    pub fn model_spectrum(&self) -> CurvatureSpectrum {
        CurvatureSpectrum::new(
            self.d.iter().map(|&x| PI * x as f64).collect(),
            self.e.iter().map(|&x| PI * x as f64).collect(),
        )
    }

    /// The realized index of the unperturbed scenario.
    pub fn realized_q(&self) -> usize {
        self.d.iter().chain(&self.e).filter(|&&x| x < 0).count()
    }
}

/// `(h⁰, h¹)` of a degree-`m` line bundle on an elliptic curve.
fn elliptic_dims(m: i128) -> [i128; 2] {
    if m > 0 {
        [m, 0]
    } else {
        [0, -m]
    }
}

/// `dim H^q(X, E^k ⊗ F^l ⊗ C^g)` for `q = 0..=n`, by Künneth convolution.
pub fn cohomology_dims(s: &TorusScenario, k: u64, l: u64) -> Result<Vec<i128>, TorusError> {
    let mut h = vec![1i128];
    for m in s.factor_degrees(k, l)? {
        let f = elliptic_dims(m);
        let mut next = vec![0i128; h.len() + 1];
        for (q, &v) in h.iter().enumerate() {
            next[q] =
                next[q].checked_add(v.checked_mul(f[0]).ok_or(TorusError::Overflow)?).ok_or(TorusError::Overflow)?;
            next[q + 1] = next[q + 1]
                .checked_add(v.checked_mul(f[1]).ok_or(TorusError::Overflow)?)
                .ok_or(TorusError::Overflow)?;
        }
        h = next;
    }
    let g = s.twist as i128;
    h.iter().map(|v| v.checked_mul(g).ok_or(TorusError::Overflow)).collect()
}

/// `k^r l^{n-r}` as an exact integer.
fn volume_factor(s: &TorusScenario, k: u64, l: u64) -> Result<i128, TorusError> {
    let kp = (k as i128).checked_pow(s.r() as u32).ok_or(TorusError::Overflow)?;
    let lp = (l as i128).checked_pow((s.n() - s.r()) as u32).ok_or(TorusError::Overflow)?;
    kp.checked_mul(lp).ok_or(TorusError::Overflow)
}

fn degree_product(s: &TorusScenario) -> Result<i128, TorusError> {
    s.d.iter().chain(&s.e).try_fold(1i128, |acc, &x| acc.checked_mul(x as i128).ok_or(TorusError::Overflow))
}

/// The signed Morse integrals `(−1)^q g k^r l^{n-r} ∫_{X(q)} det Θ_E det Θ_F`
/// of the unperturbed scenario, exactly.
pub fn morse_rhs_exact(s: &TorusScenario, k: u64, l: u64) -> Result<Vec<i128>, TorusError> {
    if !s.is_flat() {
        return Err(TorusError::PerturbationUnsupported);
    }
    let q0 = s.realized_q();
    let sign = if q0.is_multiple_of(2) { 1 } else { -1 };
    let value = volume_factor(s, k, l)?
        .checked_mul(degree_product(s)?)
        .and_then(|v| v.checked_mul(sign * s.twist as i128))
        .ok_or(TorusError::Overflow)?;
    let mut rhs = vec![0i128; s.n() + 1];
    rhs[q0] = value;
    Ok(rhs)
}

/// One sample of the curvature field on the fundamental domain of `T^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    /// `(x_1, y_1, .., x_r, y_r)` in `[0, 1)^{2r}`.
    pub point: Vec<f64>,
    pub theta_e: HermitianMatrix,
    pub spectrum: CurvatureSpectrum,
    pub class: PointClass,
}

/// `diag(d) + ε · 2(∂²ρ/∂z_i∂z̄_j)`, the `E`-block of `Θ` at `point`.
pub fn curvature_e_block(s: &TorusScenario, point: &[f64]) -> HermitianMatrix {
    let r = s.r();
    let mut m =
        DMatrix::from_fn(
            r,
            r,
            |i, j| {
                if i == j {
                    Complex64::new(s.d[i] as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        );
    if let Some(p) = &s.perturbation {
        for mode in &p.modes {
            let phase: f64 =
                (0..r).map(|i| mode.kx[i] as f64 * point[2 * i] + mode.ky[i] as f64 * point[2 * i + 1]).sum();
            // ∂_{z_i} θ = (kx_i − i ky_i)/2, so ∂_i∂̄_j cos(2πθ) = −π² cos(2πθ)(kx_i − i ky_i)(kx_j + i ky_j)
            let c = -PI * PI * (2.0 * PI * phase).cos() * mode.amplitude;
            for i in 0..r {
                for j in 0..r {
                    let a = Complex64::new(mode.kx[i] as f64, -(mode.ky[i] as f64));
                    let b = Complex64::new(mode.kx[j] as f64, mode.ky[j] as f64);
                    m[(i, j)] += a * b * (2.0 * p.epsilon * c);
                }
            }
        }
    }
    HermitianMatrix::new(m).expect("perturbed curvature is Hermitian by construction")
}

/// Midpoints of an `N^{2r}` grid on `[0, 1)^{2r}`.
fn grid_points(r: usize, grid: usize) -> Vec<Vec<f64>> {
    let dims = 2 * r;
    let total = grid.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            (0..dims)
                .map(|_| {
                    let i = idx % grid;
                    idx /= grid;
                    (i as f64 + 0.5) / grid as f64
                })
                .collect()
        })
        .collect()
}

/// The curvature field on the midpoint grid of the `E`-factors (the
/// `F`-block is constant).
pub fn curvature_field(s: &TorusScenario, grid: usize) -> Vec<CurvatureSample> {
    let e: Vec<f64> = s.e.iter().map(|&x| x as f64).collect();
    grid_points(s.r(), grid)
        .into_iter()
        .map(|point| {
            let theta_e = curvature_e_block(s, &point);
            let lambdas = theta_e.eigenvalues();
            let spectrum = CurvatureSpectrum::new(lambdas, e.clone());
            let class = classify_point(&spectrum);
            CurvatureSample { point, theta_e, spectrum, class }
        })
        .collect()
}

/// Quadrature values of the signed Morse integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseIntegrals {
    pub rhs: Vec<f64>,
    pub coarse: Vec<f64>,
    /// Measure of the cells classified as degenerate (excluded everywhere).
    pub degenerate_measure: f64,
    pub grid: usize,
}

fn integrate_classes(s: &TorusScenario, k: u64, l: u64, grid: usize) -> Result<(Vec<f64>, f64), TorusError> {
    let n = s.n();
    let cells = grid.pow(2 * s.r() as u32) as f64;
    let vol = volume_factor(s, k, l)? as f64 * s.twist as f64;
    let det_f: f64 = s.e.iter().map(|&x| x as f64).product();
    let mut acc = vec![0.0; n + 1];
    let mut degenerate = 0.0;
    for sample in curvature_field(s, grid) {
        match sample.class {
            PointClass::Degenerate => degenerate += 1.0 / cells,
            PointClass::Index(q) => {
                let det_e: f64 = sample.spectrum.lambdas().iter().product();
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                acc[q] += sign * det_e * det_f / cells;
            }
        }
    }
    Ok((acc.into_iter().map(|v| v * vol).collect(), degenerate))
}

/// `rhs_q = (−1)^q g k^r l^{n-r} ∫_{X(q)} det Θ_E det Θ_F` by the midpoint
/// rule on `grid^{2r}` cells, checked against `2·grid`.
pub fn morse_integrals(s: &TorusScenario, k: u64, l: u64, grid: usize) -> Result<MorseIntegrals, TorusError> {
    if grid < 16 {
        return Err(TorusError::InvalidParameter("grid must have at least 16 cells per real dimension"));
    }
    s.factor_degrees(k, l)?;
    let (coarse, _) = integrate_classes(s, k, l, grid)?;
    let (rhs, degenerate_measure) = integrate_classes(s, k, l, 2 * grid)?;
    let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for q in 0..rhs.len() {
        if (rhs[q] - coarse[q]).abs() > 0.01 * rhs[q].abs().max(1e-9 * scale) {
            return Err(TorusError::GridTooCoarse { q, coarse: coarse[q], fine: rhs[q] });
        }
    }
    Ok(MorseIntegrals { rhs, coarse, degenerate_measure, grid: 2 * grid })
}

pub fn morse_rhs(s: &TorusScenario, q: usize, k: u64, l: u64, grid: usize) -> Result<f64, TorusError> {
    if q > s.n() {
        return Err(TorusError::InvalidParameter("q exceeds n"));
    }
    Ok(morse_integrals(s, k, l, grid)?.rhs[q])
}

/// Relative slack of the perturbed checks, which compare against quadrature.
pub const QUADRATURE_SLACK: f64 = 1e-2;
/// Relative slack of the weak inequality.
pub const WEAK_SLACK: f64 = 1e-6;

/// Both sides of the Morse inequalities at one `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseReport {
    pub k: u64,
    pub l: u64,
    pub h: Vec<i128>,
    pub rhs: Vec<f64>,
    /// Closed-form right-hand sides (unperturbed scenarios only).
    pub rhs_exact: Option<Vec<i128>>,
    pub weak: Vec<bool>,
    pub strong: Vec<bool>,
    pub euler_h: i128,
    pub euler_rhs: f64,
    pub degenerate_measure: f64,
}

impl MorseReport {
    pub fn passed(&self) -> bool {
        self.weak.iter().chain(&self.strong).all(|&b| b)
    }
}

fn alternating_partial(values: &[f64], q: usize) -> f64 {
    (0..=q).map(|j| if (q - j).is_multiple_of(2) { values[j] } else { -values[j] }).sum()
}

fn alternating_partial_int(values: &[i128], q: usize) -> i128 {
    (0..=q).map(|j| if (q - j).is_multiple_of(2) { values[j] } else { -values[j] }).sum()
}

fn morse_report(s: &TorusScenario, k: u64, l: u64, grid: usize) -> Result<MorseReport, TorusError> {
    let h = cohomology_dims(s, k, l)?;
    let n = s.n();
    let (rhs, rhs_exact, degenerate_measure) = if s.is_flat() {
        let exact = morse_rhs_exact(s, k, l)?;
        (exact.iter().map(|&v| v as f64).collect::<Vec<_>>(), Some(exact), 0.0)
    } else {
        let m = morse_integrals(s, k, l, grid)?;
        (m.rhs, None, m.degenerate_measure)
    };
    let hf: Vec<f64> = h.iter().map(|&v| v as f64).collect();
    let scale = rhs.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let (weak, strong) = match &rhs_exact {
        Some(exact) => (
            (0..=n).map(|q| h[q] == exact[q]).collect(),
            (0..=n)
                .map(|q| {
                    let (a, b) = (alternating_partial_int(&h, q), alternating_partial_int(exact, q));
                    if q == n {
                        a == b
                    } else {
                        a <= b
                    }
                })
                .collect(),
        ),
        None => (
            (0..=n).map(|q| hf[q] <= rhs[q] * (1.0 + WEAK_SLACK) + WEAK_SLACK).collect(),
            (0..=n)
                .map(|q| {
                    let (a, b) = (alternating_partial(&hf, q), alternating_partial(&rhs, q));
                    if q == n {
                        (a - b).abs() <= QUADRATURE_SLACK * scale
                    } else {
                        a <= b + QUADRATURE_SLACK * scale
                    }
                })
                .collect(),
        ),
    };
    let euler_h = alternating_partial_int(&h, n) * if n.is_multiple_of(2) { 1 } else { -1 };
    let euler_rhs = alternating_partial(&rhs, n) * if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(MorseReport { k, l, h, rhs, rhs_exact, weak, strong, euler_h, euler_rhs, degenerate_measure })
}

/// Weak (and strong) Morse checks at every `(k, l)`. Unperturbed scenarios
/// demand exact equality at the realized degree and `0 = 0` elsewhere;
/// perturbed ones demand `h^q ≤ rhs_q` up to [`WEAK_SLACK`].
pub fn weak_morse_check(s: &TorusScenario, pairs: &[ScalingPair], grid: usize) -> Result<Vec<MorseReport>, TorusError> {
    pairs.iter().map(|p| morse_report(s, p.k, p.l, grid)).collect()
}

/// The alternating partial-sum comparison for every `q`, with equality of
/// the full sums; the same reports as [`weak_morse_check`].
pub fn strong_morse_check(
    s: &TorusScenario,
    pairs: &[ScalingPair],
    grid: usize,
) -> Result<Vec<MorseReport>, TorusError> {
    weak_morse_check(s, pairs, grid)
}

/// `g h^q / Vol_{ω_{k,l}}(X)` with `Vol = k^r l^{n-r}`, exactly.
pub fn bergman_constant(s: &TorusScenario, q: usize, k: u64, l: u64) -> Result<Ratio<i128>, TorusError> {
    if !s.is_flat() {
        return Err(TorusError::PerturbationUnsupported);
    }
    if q > s.n() {
        return Err(TorusError::InvalidParameter("q exceeds n"));
    }
    let h = cohomology_dims(s, k, l)?;
    Ok(Ratio::new(h[q], volume_factor(s, k, l)? * s.twist as i128))
}

/// `|det_{ω0} Θ|` on `X(q)` and zero elsewhere, exactly.
pub fn det_rel_exact(s: &TorusScenario, q: usize) -> Result<Ratio<i128>, TorusError> {
    if q != s.realized_q() {
        return Ok(Ratio::from_integer(0));
    }
    Ok(Ratio::from_integer(degree_product(s)?.abs()))
}

/// Level `t` of the model Laplacian in one coordinate with weight `μ`,
/// acting on functions (`in_form = false`) or on `dw̄` (`in_form = true`).
pub fn landau_level(mu: f64, in_form: bool, t: u64) -> f64 {
    let shift = u64::from((mu > 0.0) == in_form);
    mu.abs() * (t + shift) as f64
}

/// `dim` of the span of Laplacian eigenforms in degree `q` with eigenvalue
/// at most `mu`, in the rescaled units where the model weight is `π·degree`.
/// Every Landau level on a factor of degree `m` has multiplicity `|m|`.
pub fn truncated_dims(s: &TorusScenario, q: usize, k: u64, l: u64, mu: f64) -> Result<i128, TorusError> {
    if !s.is_flat() {
        return Err(TorusError::PerturbationUnsupported);
    }
    let degs = s.factor_degrees(k, l)?;
    let weights: Vec<f64> = s.d.iter().chain(&s.e).map(|&x| PI * x as f64).collect();
    let n = s.n();
    let cutoff = mu.max(0.0) * (1.0 + 1e-12);
    let mut total = 0i128;
    for idx in crate::forms::FormIndex::all(n, q) {
        // count level tuples with Σ level ≤ μ, weighted by ∏ |m_i|
        let mut stack = vec![(0usize, 0.0f64, 1i128)];
        while let Some((i, used, mult)) = stack.pop() {
            if i == n {
                total = total.checked_add(mult).ok_or(TorusError::Overflow)?;
                continue;
            }
            let mut t = 0;
            loop {
                let lvl = landau_level(weights[i], idx.contains(i), t);
                if used + lvl > cutoff {
                    break;
                }
                stack.push((i + 1, used + lvl, mult.checked_mul(degs[i].abs()).ok_or(TorusError::Overflow)?));
                t += 1;
            }
        }
    }
    total.checked_mul(s.twist as i128).ok_or(TorusError::Overflow)
}

/// `g h^q_{≤μ} / Vol_{ω_{k,l}}(X)`.
pub fn truncated_bergman_constant(
    s: &TorusScenario,
    q: usize,
    k: u64,
    l: u64,
    mu: f64,
) -> Result<Ratio<i128>, TorusError> {
    Ok(Ratio::new(truncated_dims(s, q, k, l, mu)?, volume_factor(s, k, l)? * s.twist as i128))
}

/// Smallest positive Landau level in degree `q`: the ground level of a
/// component when it is positive, else one step up in the softest factor.
pub fn landau_gap(s: &TorusScenario, q: usize) -> f64 {
    let weights: Vec<f64> = s.d.iter().chain(&s.e).map(|&x| PI * x as f64).collect();
    let softest = weights.iter().map(|w| w.abs()).fold(f64::INFINITY, f64::min);
    crate::forms::FormIndex::all(s.n(), q)
        .into_iter()
        .map(|idx| {
            let ground: f64 = weights.iter().enumerate().map(|(i, &w)| landau_level(w, idx.contains(i), 0)).sum();
            if ground > 0.0 {
                ground
            } else {
                softest
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// How the truncation level `μ_{k,l}` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    /// `√δ_{k,l}` with `δ` the cutoff energy bound at `R = r_{k,l}`.
    SqrtDeltaBound,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRow {
    pub k: u64,
    pub l: u64,
    pub radius: f64,
    /// `None` when `r_{k,l} < 1` and the cutoff bound is not defined.
    pub mu: Option<f64>,
    pub truncated: Option<Ratio<i128>>,
    pub harmonic: Ratio<i128>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedReport {
    pub q: usize,
    pub gap: f64,
    pub rows: Vec<TruncatedRow>,
    /// First `m`-index (position in the sweep) from which every row passes.
    pub first_passing: Option<usize>,
}

/// Degree of the Galerkin candidate space used to resolve the gap.
const GAP_DEGREE: usize = 4;

/// Compares `B_{≤μ_{k,l}}` with the harmonic Bergman constant along the
/// sweep, after cross-checking the Landau gap against the Galerkin spectrum
/// of the flat model.
pub fn truncated_bergman_check(
    s: &TorusScenario,
    q: usize,
    pairs: &[ScalingPair],
    rule: MuRule,
) -> Result<TruncatedReport, TorusError> {
    if !s.is_flat() {
        return Err(TorusError::PerturbationUnsupported);
    }
    if q > s.n() {
        return Err(TorusError::InvalidParameter("q exceeds n"));
    }
    let landau = landau_gap(s, q);
    let galerkin = forms::spectral_gap(&s.model_spectrum(), q, GAP_DEGREE)?.unwrap_or(f64::INFINITY);
    if (galerkin - landau).abs() > 1e-8 * landau {
        return Err(TorusError::GapNotResolved { galerkin, landau });
    }
    let model = s.model_spectrum();
    let q0 = s.realized_q();
    let chi = CutoffProfile::default();
    let mut rows = Vec::with_capacity(pairs.len());
    for p in pairs {
        let radius = p.radius();
        let harmonic = bergman_constant(s, q, p.k, p.l)?;
        let mu = match rule {
            MuRule::Fixed(v) => Some(v),
            MuRule::SqrtDeltaBound if radius >= 1.0 => {
                Some(forms::cutoff_energy(&model, q0, radius, &chi, 32)?.delta_bound.sqrt())
            }
            MuRule::SqrtDeltaBound => None,
        };
        let truncated = mu.map(|m| truncated_bergman_constant(s, q, p.k, p.l, m)).transpose()?;
        let pass = match (mu, truncated) {
            (Some(m), Some(t)) => m < landau && t == harmonic,
            _ => false,
        };
        rows.push(TruncatedRow { k: p.k, l: p.l, radius, mu, truncated, harmonic, pass });
    }
    let first_passing = (0..rows.len()).find(|&i| rows[i..].iter().all(|r| r.pass));
    Ok(TruncatedReport { q, gap: landau, rows, first_passing })
}
