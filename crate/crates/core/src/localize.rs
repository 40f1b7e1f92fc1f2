//! Anisotropic rescaling near a point where the curvature degenerates along
//! a foliation: the radius `r_{k,l}`, the scaled weights
//! `(kφ)^{(k,l)} + (lψ)^{(k,l)}`, the pulled-back metric `ω_{k,l}^{(k,l)}`,
//! and sup-norm diagnostics for how fast they approach the flat model.
//!
//! Coordinates `z = (z', z'')` split as the first `r` (transverse to the
//! leaves) and the remaining `n - r`. The scaling map substitutes
//! `z' → z'/√k`, `z'' → z''/√l`. Boxes are polydiscs `{|z_i| < r_{k,l}}` in
//! the scaled coordinates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::forms::{FormIndex, GaussPolyForm};
use crate::linalg::{self, CMatrix};
use crate::poly::{derivative_multi_indices, Monomial, Polynomial, Wirtinger};
use crate::quad::GaussLegendre;
use crate::MAX_DIM;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalizeError {
    #[error("cubic φ-term has fewer than two factors among the first r coordinates")]
    FoliationViolation,
    #[error("remainder term must be homogeneous of degree 3")]
    NotCubic,
    #[error("grid refinement changed the supremum from {coarse} to {fine}")]
    GridTooCoarse { coarse: f64, fine: f64 },
    #[error("derivative order {0} is not supported (0, 1 or 2)")]
    InvalidOrder(usize),
    #[error("scaling parameters must be positive integers")]
    InvalidScaling,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("metric block is not the identity at the origin")]
    NotIdentityAtOrigin,
    #[error("metric is not positive definite at a sample point")]
    NonPositiveMetric,
    #[error("box quadrature did not converge under refinement")]
    QuadratureFailure,
    #[error("grid resolution must be positive")]
    EmptyGrid,
}

/// `log min(k/l, l)`.
pub fn r_scale(k: u64, l: u64) -> f64 {
    assert!(k >= 1 && l >= 1, "scaling parameters must be positive");
    let (kf, lf) = (k as f64, l as f64);
    (kf / lf).min(lf).ln()
}

/// Scaling parameters `(k, l)` with their localization radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalingPair {
    pub k: u64,
    pub l: u64,
}

impl ScalingPair {
    pub fn new(k: u64, l: u64) -> Result<Self, LocalizeError> {
        if k == 0 || l == 0 {
            return Err(LocalizeError::InvalidScaling);
        }
        Ok(ScalingPair { k, l })
    }

    /// `(m^p, m)`.
    pub fn power_sequence(m: u64, p: u32) -> Result<Self, LocalizeError> {
        Self::new(m.checked_pow(p).ok_or(LocalizeError::InvalidScaling)?, m)
    }

    pub fn radius(&self) -> f64 {
        r_scale(self.k, self.l)
    }
}

/// `x^{e/2}` with integer powers kept exact when `e` is even.
fn half_power(x: f64, e: i32) -> f64 {
    if e % 2 == 0 {
        x.powi(e / 2)
    } else {
        x.sqrt().powi(e)
    }
}

/// Higher-order remainder evaluated in unscaled coordinates.
pub type Remainder = fn(&[Complex64]) -> f64;

/// Local expansions of the weights `φ` (of `E`) and `ψ` (of `F`) at a point:
///
/// - `φ = Σ_{i<r} λ_i |z_i|² + C_φ + h_φ`,
/// - `ψ = Σ_{i≥r} ν_i |z_i|² + Σ 2Re(ν_ij z_i z̄_j) + C_ψ + h_ψ`,
///
/// with cubic parts `C`, optional higher remainders `h`, and the mixed terms
/// indexed by `i < r`.
#[derive(Debug, Clone)]
pub struct WeightJet {
    n: usize,
    r: usize,
    lambdas: Vec<f64>,
    nus: Vec<f64>,
    mixed: Vec<(usize, usize, Complex64)>,
    phi_cubic: Polynomial,
    psi_cubic: Polynomial,
    phi_higher: Option<Remainder>,
    psi_higher: Option<Remainder>,
}

impl WeightJet {
    /// The diagonal quadratic jet `γ0`.
    pub fn quadratic(lambdas: Vec<f64>, nus: Vec<f64>) -> Result<Self, LocalizeError> {
        let r = lambdas.len();
        let n = r + nus.len();
        if n == 0 || n > MAX_DIM {
            return Err(LocalizeError::DimensionMismatch("need 1..=8 coordinates"));
        }
        Ok(WeightJet {
            n,
            r,
            lambdas,
            nus,
            mixed: Vec::new(),
            phi_cubic: Polynomial::zero(n),
            psi_cubic: Polynomial::zero(n),
            phi_higher: None,
            psi_higher: None,
        })
    }

    pub fn with_mixed(mut self, i: usize, j: usize, nu: Complex64) -> Result<Self, LocalizeError> {
        if i >= self.r || j >= self.n || i == j {
            return Err(LocalizeError::DimensionMismatch("mixed term needs i < r, j < n, i ≠ j"));
        }
        self.mixed.push((i, j, nu));
        Ok(self)
    }

    /// Sets the cubic part of `φ` (its real part is used). Every monomial must
    /// have degree 3 with at least two factors among `z_1..z_r, z̄_1..z̄_r`.
    pub fn with_phi_cubic(mut self, p: &Polynomial) -> Result<Self, LocalizeError> {
        self.check_cubic(p)?;
        if p.terms().any(|(m, _)| m.degree_in(0..self.r) < 2) {
            return Err(LocalizeError::FoliationViolation);
        }
        self.phi_cubic = p.real_part();
        Ok(self)
    }

    pub fn with_psi_cubic(mut self, p: &Polynomial) -> Result<Self, LocalizeError> {
        self.check_cubic(p)?;
        self.psi_cubic = p.real_part();
        Ok(self)
    }

    pub fn with_higher(mut self, phi: Option<Remainder>, psi: Option<Remainder>) -> Self {
        self.phi_higher = phi;
        self.psi_higher = psi;
        self
    }

    fn check_cubic(&self, p: &Polynomial) -> Result<(), LocalizeError> {
        if p.n() != self.n {
            return Err(LocalizeError::DimensionMismatch("cubic part lives in another dimension"));
        }
        if p.terms().any(|(m, _)| m.degree() != 3) {
            return Err(LocalizeError::NotCubic);
        }
        Ok(())
    }

    /// A jet with all quadratic coefficients and a full set of admissible
    /// cubic monomials drawn uniformly from `[-1, 1]` (complex parts too),
    /// with the quadratic diagonal bounded away from zero.
    pub fn random<R: Rng>(n: usize, r: usize, rng: &mut R) -> Result<Self, LocalizeError> {
        if r > n {
            return Err(LocalizeError::DimensionMismatch("r exceeds n"));
        }
        let diag = |rng: &mut R| {
            let v: f64 = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        };
        let lambdas = (0..r).map(|_| diag(rng)).collect();
        let nus = (r..n).map(|_| diag(rng)).collect();
        let mut jet = Self::quadratic(lambdas, nus)?;
        let coef = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for i in 0..r {
            for j in 0..n {
                if i != j {
                    let c = coef(rng);
                    jet = jet.with_mixed(i, j, c)?;
                }
            }
        }
        let mut phi = Polynomial::zero(n);
        let mut psi = Polynomial::zero(n);
        for m in cubic_monomials(n) {
            let c = coef(rng);
            psi.add_term(m, c);
            if m.degree_in(0..r) >= 2 {
                let c = coef(rng);
                phi.add_term(m, c);
            }
        }
        jet.with_phi_cubic(&phi)?.with_psi_cubic(&psi)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `γ0 = Σ λ_i |z_i|² + Σ ν_i |z_i|²`.
    pub fn gamma0(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (i, &v) in self.lambdas.iter().chain(&self.nus).enumerate() {
            p.add_term(Monomial::single(i, 1, 1), Complex64::new(v, 0.0));
        }
        p
    }

    fn phi_polynomial(&self) -> Polynomial {
        let mut p = self.phi_cubic.clone();
        for (i, &v) in self.lambdas.iter().enumerate() {
            p.add_term(Monomial::single(i, 1, 1), Complex64::new(v, 0.0));
        }
        p
    }

    fn psi_polynomial(&self) -> Polynomial {
        let mut p = self.psi_cubic.clone();
        for (i, &v) in self.nus.iter().enumerate() {
            p.add_term(Monomial::single(self.r + i, 1, 1), Complex64::new(v, 0.0));
        }
        for &(i, j, nu) in &self.mixed {
            let mut m = Monomial::ONE;
            m.holo[i] = 1;
            m.anti[j] = 1;
            p.add_term(m, nu);
            p.add_term(m.conjugate(), nu.conj());
        }
        p
    }
}

/// All monomials of degree exactly 3 in `n` variables and their conjugates.
fn cubic_monomials(n: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let slots = 2 * n;
    for a in 0..slots {
        for b in a..slots {
            for c in b..slots {
                let mut m = Monomial::ONE;
                for s in [a, b, c] {
                    if s < n {
                        m.holo[s] += 1;
                    } else {
                        m.anti[s - n] += 1;
                    }
                }
                out.push(m);
            }
        }
    }
    out
}

/// `(kφ)^{(k,l)} + (lψ)^{(k,l)}` as an exact polynomial plus the scaled
/// higher remainders.
#[derive(Debug, Clone)]
pub struct ScaledWeight {
    pair: ScalingPair,
    r: usize,
    polynomial: Polynomial,
    gamma0: Polynomial,
    phi_higher: Option<Remainder>,
    psi_higher: Option<Remainder>,
}

impl ScaledWeight {
    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    pub fn gamma0(&self) -> &Polynomial {
        &self.gamma0
    }

    /// The polynomial part of `scaled - γ0`; quadratic diagonal terms cancel
    /// exactly.
    pub fn deviation_polynomial(&self) -> Polynomial {
        let mut d = self.polynomial.clone();
        d.sub(&self.gamma0);
        d
    }

    fn unscale(&self, z: &[Complex64]) -> Vec<Complex64> {
        let (sk, sl) = ((self.pair.k as f64).sqrt(), (self.pair.l as f64).sqrt());
        z.iter().enumerate().map(|(i, w)| if i < self.r { w / sk } else { w / sl }).collect()
    }

    fn higher(&self, z: &[Complex64]) -> f64 {
        if self.phi_higher.is_none() && self.psi_higher.is_none() {
            return 0.0;
        }
        let u = self.unscale(z);
        let mut v = 0.0;
        if let Some(h) = self.phi_higher {
            v += self.pair.k as f64 * h(&u);
        }
        if let Some(h) = self.psi_higher {
            v += self.pair.l as f64 * h(&u);
        }
        v
    }

    fn has_higher(&self) -> bool {
        self.phi_higher.is_some() || self.psi_higher.is_some()
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.polynomial.eval(z).re + self.higher(z)
    }

    pub fn deviation(&self, z: &[Complex64]) -> f64 {
        self.eval(z) - self.gamma0.eval(z).re
    }
}

/// Substitutes `z' → z'/√k`, `z'' → z''/√l` into `p` and multiplies by
/// `k^{a}` `l^{b}` (given as half-powers `2a`, `2b`), monomial by monomial.
fn scale_polynomial(p: &Polynomial, r: usize, k: f64, l: f64, k_half: i32, l_half: i32) -> Polynomial {
    Polynomial::from_terms(
        p.n(),
        p.terms().map(|(m, c)| {
            let dk = m.degree_in(0..r) as i32;
            let dl = m.degree_in(r..p.n()) as i32;
            (*m, c * (half_power(k, k_half - dk) * half_power(l, l_half - dl)))
        }),
    )
}

pub fn scaled_weights(jet: &WeightJet, pair: ScalingPair) -> ScaledWeight {
    let (k, l) = (pair.k as f64, pair.l as f64);
    let mut polynomial = scale_polynomial(&jet.phi_polynomial(), jet.r, k, l, 2, 0);
    polynomial.add(&scale_polynomial(&jet.psi_polynomial(), jet.r, k, l, 0, 2));
    ScaledWeight {
        pair,
        r: jet.r,
        polynomial,
        gamma0: jet.gamma0(),
        phi_higher: jet.phi_higher,
        psi_higher: jet.psi_higher,
    }
}

/// A supremum over a grid together with the value on the grid of half the
/// resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSup {
    pub value: f64,
    pub coarse: f64,
    pub points: usize,
}

/// Polar sample points of one disc of radius `radius`: the center plus `g`
/// radii times `g` angles.
fn disc_points(radius: f64, g: usize) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for a in 1..=g {
        let rho = radius * a as f64 / g as f64;
        for b in 0..g {
            pts.push(Complex64::from_polar(rho, 2.0 * PI * b as f64 / g as f64));
        }
    }
    pts
}

/// Visits every point of the polydisc grid.
fn for_each_point(n: usize, radius: f64, g: usize, mut visit: impl FnMut(&[Complex64])) -> usize {
    let disc = disc_points(radius, g);
    let mut idx = vec![0usize; n];
    let mut z = vec![disc[0]; n];
    let mut count = 0;
    loop {
        for i in 0..n {
            z[i] = disc[idx[i]];
        }
        visit(&z);
        count += 1;
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            idx[i] += 1;
            if idx[i] < disc.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Wirtinger derivative of a function of `z` by nested central differences.
fn wirtinger_fd(f: &dyn Fn(&[Complex64]) -> Complex64, z: &[Complex64], dirs: &[Wirtinger], h: f64) -> Complex64 {
    let Some((d, rest)) = dirs.split_first() else { return f(z) };
    let inner = |w: &[Complex64]| wirtinger_fd(f, w, rest, h);
    let mut w = z.to_vec();
    let shift = |w: &mut Vec<Complex64>, delta: Complex64| {
        w[d.coord] = z[d.coord] + delta;
        let v = inner(w);
        w[d.coord] = z[d.coord];
        v
    };
    let dx = (shift(&mut w, Complex64::new(h, 0.0)) - shift(&mut w, Complex64::new(-h, 0.0))) / (2.0 * h);
    let dy = (shift(&mut w, Complex64::new(0.0, h)) - shift(&mut w, Complex64::new(0.0, -h))) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    if d.conjugate {
        (dx + i * dy) * 0.5
    } else {
        (dx - i * dy) * 0.5
    }
}

fn grid_sup(
    n: usize,
    radius: f64,
    g: usize,
    polys: &[Polynomial],
    extra: &dyn Fn(&[Complex64], usize) -> Complex64,
    with_extra: bool,
) -> (f64, usize) {
    let mut sup: f64 = 0.0;
    let count = for_each_point(n, radius, g, |z| {
        for (i, p) in polys.iter().enumerate() {
            let mut v = p.eval(z);
            if with_extra {
                v += extra(z, i);
            }
            sup = sup.max(v.norm());
        }
    });
    (sup, count)
}

fn refined_sup(
    n: usize,
    radius: f64,
    grid: usize,
    polys: &[Polynomial],
    extra: &dyn Fn(&[Complex64], usize) -> Complex64,
    with_extra: bool,
) -> Result<GridSup, LocalizeError> {
    if grid == 0 {
        return Err(LocalizeError::EmptyGrid);
    }
    let (coarse, _) = grid_sup(n, radius, grid, polys, extra, with_extra);
    let (fine, points) = grid_sup(n, radius, 2 * grid, polys, extra, with_extra);
    if (fine - coarse).abs() > 0.1 * fine {
        return Err(LocalizeError::GridTooCoarse { coarse, fine });
    }
    Ok(GridSup { value: fine, coarse, points })
}

/// `sup |∂^α((kφ)^{(k,l)} + (lψ)^{(k,l)} - γ0)|` over Wirtinger multi-indices
/// of order `order` on the grid of the polydisc of radius `r_{k,l}`.
pub fn deviation_sup(jet: &WeightJet, pair: ScalingPair, order: usize, grid: usize) -> Result<GridSup, LocalizeError> {
    if order > 2 {
        return Err(LocalizeError::InvalidOrder(order));
    }
    let scaled = scaled_weights(jet, pair);
    let dev = scaled.deviation_polynomial();
    let dirs = derivative_multi_indices(jet.n, order);
    let polys: Vec<Polynomial> =
        dirs.iter().map(|ds| ds.iter().fold(dev.clone(), |p, d| p.differentiate(*d))).collect();
    let step = 1e-3 * pair.radius().max(1.0);
    let higher = |z: &[Complex64]| Complex64::new(scaled.higher(z), 0.0);
    let extra = |z: &[Complex64], i: usize| wirtinger_fd(&higher, z, &dirs[i], step);
    refined_sup(jet.n, pair.radius().max(0.0), grid, &polys, &extra, scaled.has_higher())
}

/// The background metrics `η` (on the first `r` coordinates) and `ζ` (on the
/// rest), each the identity plus polynomial perturbations vanishing at the
/// origin. Entry `(i, j)` with `i ≤ j` is given; `(j, i)` is its conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMetric {
    n: usize,
    r: usize,
    eta: Vec<(usize, usize, Polynomial)>,
    zeta: Vec<(usize, usize, Polynomial)>,
}

impl SplitMetric {
    pub fn identity(n: usize, r: usize) -> Result<Self, LocalizeError> {
        if r > n || n == 0 || n > MAX_DIM {
            return Err(LocalizeError::DimensionMismatch("need r ≤ n ≤ 8"));
        }
        Ok(SplitMetric { n, r, eta: Vec::new(), zeta: Vec::new() })
    }

    /// Adds `p` to entry `(i, j)` of the block containing both indices
    /// (global coordinates, `i ≤ j`). Diagonal perturbations must be real.
    pub fn with_entry(mut self, i: usize, j: usize, p: Polynomial) -> Result<Self, LocalizeError> {
        if i > j || j >= self.n || p.n() != self.n {
            return Err(LocalizeError::DimensionMismatch("entry outside the metric"));
        }
        if p.coefficient(&Monomial::ONE) != Complex64::new(0.0, 0.0) {
            return Err(LocalizeError::NotIdentityAtOrigin);
        }
        let p = if i == j { p.real_part() } else { p };
        if j < self.r {
            self.eta.push((i, j, p));
        } else if i >= self.r {
            self.zeta.push((i - self.r, j - self.r, p));
        } else {
            return Err(LocalizeError::DimensionMismatch("entry straddles the two blocks"));
        }
        Ok(self)
    }

    /// Linear and quadratic real perturbations with coefficients of size
    /// `scale`, diagonal and off-diagonal in both blocks.
    pub fn random<R: Rng>(n: usize, r: usize, scale: f64, rng: &mut R) -> Result<Self, LocalizeError> {
        let mut metric = Self::identity(n, r)?;
        for (lo, hi) in [(0, r), (r, n)] {
            for i in lo..hi {
                for j in i..hi {
                    let mut p = Polynomial::zero(n);
                    for v in 0..n {
                        let c = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                        p.add_term(Monomial::single(v, 1, 0), c);
                        let c = Complex64::new(rng.gen_range(-scale..scale), 0.0);
                        p.add_term(Monomial::single(v, 1, 1), c);
                    }
                    metric = metric.with_entry(i, j, p)?;
                }
            }
        }
        Ok(metric)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    fn block_at(&self, entries: &[(usize, usize, Polynomial)], dim: usize, z: &[Complex64]) -> CMatrix {
        let mut m = CMatrix::identity(dim, dim);
        for (i, j, p) in entries {
            let v = p.eval(z);
            if i == j {
                m[(*i, *i)] += Complex64::new(v.re, 0.0);
            } else {
                m[(*i, *j)] += v;
                m[(*j, *i)] += v.conj();
            }
        }
        m
    }

    /// `(η(z), ζ(z))`.
    pub fn blocks(&self, z: &[Complex64]) -> (CMatrix, CMatrix) {
        (self.block_at(&self.eta, self.r, z), self.block_at(&self.zeta, self.n - self.r, z))
    }

    /// `η(z) ⊕ ζ(z)`.
    pub fn full(&self, z: &[Complex64]) -> CMatrix {
        let (e, f) = self.blocks(z);
        let mut m = CMatrix::zeros(self.n, self.n);
        m.view_mut((0, 0), (self.r, self.r)).copy_from(&e);
        m.view_mut((self.r, self.r), (self.n - self.r, self.n - self.r)).copy_from(&f);
        m
    }

    /// Coefficients of `ω_{k,l}^{(k,l)}`: `h(z'/√k, z''/√l)`.
    pub fn pulled_back(&self, pair: ScalingPair) -> SplitMetric {
        let (k, l) = (pair.k as f64, pair.l as f64);
        let scale = |v: &[(usize, usize, Polynomial)]| {
            v.iter().map(|(i, j, p)| (*i, *j, scale_polynomial(p, self.r, k, l, 0, 0))).collect()
        };
        SplitMetric { n: self.n, r: self.r, eta: scale(&self.eta), zeta: scale(&self.zeta) }
    }

    fn perturbations(&self) -> impl Iterator<Item = &Polynomial> {
        self.eta.iter().chain(&self.zeta).map(|(_, _, p)| p)
    }
}

/// `sup |∂^α(h_ij(z'/√k, z''/√l) - δ_ij)|` over all entries on the polydisc
/// grid of radius `r_{k,l}`.
pub fn metric_deviation_sup(
    metric: &SplitMetric,
    pair: ScalingPair,
    order: usize,
    grid: usize,
) -> Result<GridSup, LocalizeError> {
    if order > 2 {
        return Err(LocalizeError::InvalidOrder(order));
    }
    let pulled = metric.pulled_back(pair);
    let dirs = derivative_multi_indices(metric.n, order);
    let polys: Vec<Polynomial> = pulled
        .perturbations()
        .flat_map(|p| dirs.iter().map(move |ds| ds.iter().fold(p.clone(), |q, d| q.differentiate(*d))))
        .collect();
    let none = |_: &[Complex64], _: usize| Complex64::new(0.0, 0.0);
    refined_sup(metric.n, pair.radius().max(0.0), grid, &polys, &none, false)
}

/// Largest relative error of `det(kη ⊕ lζ) = k^r l^{n-r} det(η ⊕ ζ)` over the
/// sample points, with the left side evaluated as a full determinant.
pub fn volume_identity_check(
    metric: &SplitMetric,
    pair: ScalingPair,
    points: &[Vec<Complex64>],
) -> Result<f64, LocalizeError> {
    let (k, l) = (pair.k as f64, pair.l as f64);
    let factor = k.powi(metric.r as i32) * l.powi((metric.n - metric.r) as i32);
    let mut worst: f64 = 0.0;
    for z in points {
        if z.len() != metric.n {
            return Err(LocalizeError::DimensionMismatch("sample point has the wrong dimension"));
        }
        let h = metric.full(z);
        if linalg::eigvalsh(&h).first().is_some_and(|&v| v <= 0.0) {
            return Err(LocalizeError::NonPositiveMetric);
        }
        let scaled = DMatrix::from_fn(metric.n, metric.n, |i, j| {
            let s = if i < metric.r && j < metric.r {
                k
            } else if i >= metric.r && j >= metric.r {
                l
            } else {
                0.0
            };
            h[(i, j)] * s
        });
        let lhs = linalg::determinant(&scaled);
        let rhs = linalg::determinant(&h) * factor;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(worst)
}

/// Pointwise `|α|²_h`: the Gram form of the `(0,q)` components under the
/// metric induced by `h` (minors of `h^{-1}`).
fn form_norm_sq(values: &[(FormIndex, Complex64)], hinv: &CMatrix) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, a) in values {
        for (j, b) in values {
            let rows: Vec<usize> = i.coords().collect();
            let cols: Vec<usize> = j.coords().collect();
            let minor = if rows.is_empty() {
                Complex64::new(1.0, 0.0)
            } else {
                linalg::determinant(&DMatrix::from_fn(rows.len(), cols.len(), |p, q| hinv[(cols[q], rows[p])]))
            };
            acc += a * b.conj() * minor;
        }
    }
    acc.re
}

/// Polar product rule on the polydisc: Gauss-Legendre in each radius and the
/// trapezoid rule in each angle.
fn box_integral(n: usize, radius: f64, points: usize, f: &mut dyn FnMut(&[Complex64]) -> f64) -> f64 {
    let rule = GaussLegendre::new(points, 0.0, radius);
    let angles = 2 * points;
    let mut disc: Vec<(Complex64, f64)> = Vec::with_capacity(points * angles);
    for (rho, w) in rule.nodes.iter().zip(&rule.weights) {
        for b in 0..angles {
            let z = Complex64::from_polar(*rho, 2.0 * PI * b as f64 / angles as f64);
            disc.push((z, w * rho * 2.0 * PI / angles as f64));
        }
    }
    let mut idx = vec![0usize; n];
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for i in 0..n {
            z[i] = disc[idx[i]].0;
            w *= disc[idx[i]].1;
        }
        total += w * f(&z);
        let mut i = 0;
        loop {
            if i == n {
                return total;
            }
            idx[i] += 1;
            if idx[i] < disc.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `∫_B |α|²_{h^{(k,l)}} e^{-scaled} det h^{(k,l)} dm / ∫_B |α|² e^{-γ0} dm`
/// on the polydisc of radius `r_{k,l}`, where `h^{(k,l)}` is the pulled-back
/// metric.
pub fn norm_localization_ratio(
    form: &GaussPolyForm,
    jet: &WeightJet,
    metric: &SplitMetric,
    pair: ScalingPair,
    resolution: usize,
) -> Result<f64, LocalizeError> {
    if form.n() != jet.n || metric.n != jet.n || metric.r != jet.r {
        return Err(LocalizeError::DimensionMismatch("form, jet and metric must share (n, r)"));
    }
    if resolution == 0 {
        return Err(LocalizeError::EmptyGrid);
    }
    let radius = pair.radius();
    if !(radius > 0.0) {
        return Err(LocalizeError::InvalidScaling);
    }
    let scaled = scaled_weights(jet, pair);
    let pulled = metric.pulled_back(pair);
    let gamma0 = jet.gamma0();
    let ratio = |points: usize| -> Result<f64, LocalizeError> {
        let mut failed = false;
        let mut num = |z: &[Complex64]| {
            let h = pulled.full(z);
            let Some(linv) = linalg::inverse_cholesky_factor(&h) else {
                failed = true;
                return 0.0;
            };
            let hinv = linv.adjoint() * &linv;
            let det = linalg::determinant(&h).re;
            let values: Vec<(FormIndex, Complex64)> = form.eval(z).into_iter().collect();
            form_norm_sq(&values, &hinv) * (-scaled.eval(z)).exp() * det
        };
        let top = box_integral(jet.n, radius, points, &mut num);
        if failed {
            return Err(LocalizeError::NonPositiveMetric);
        }
        let mut den = |z: &[Complex64]| {
            let s: f64 = form.eval(z).values().map(|v| v.norm_sqr()).sum();
            s * (-gamma0.eval(z).re).exp()
        };
        Ok(top / box_integral(jet.n, radius, points, &mut den))
    };
    let coarse = ratio(resolution)?;
    let fine = ratio(2 * resolution)?;
    if (fine - coarse).abs() > 1e-6 * fine.abs() {
        return Err(LocalizeError::QuadratureFailure);
    }
    Ok(fine)
}
