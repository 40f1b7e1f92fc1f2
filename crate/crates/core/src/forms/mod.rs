//! Exact algebra of `(0,q)`-forms on `C^n` whose coefficients are
//! polynomials in `w, w̄` times a fixed diagonal Gaussian
//! `exp(Σ a_i |w_i|²)`, under the weight `exp(-Σ μ_i |w_i|²)`.
//!
//! Conventions: Lebesgue measure on `C^n`, `{dw̄_I}` pointwise orthonormal,
//! and `dw̄_j ∧ dw̄_I = (-1)^{#{i ∈ I : i < j}} dw̄_{I ∪ {j}}`. The class is
//! closed under `∂̄`, the weighted adjoint `∂̄*` and the Laplacian, and inner
//! products reduce to the Gaussian moments
//! `∫ |w|^{2p} e^{-c|w|²} dm = π p! / c^{p+1}`.

mod cutoff;
mod galerkin;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::hermitian::{classify_point, CurvatureSpectrum, PointClass};
use crate::poly::Monomial;
use crate::MAX_DIM;

pub use cutoff::{cutoff_energy, CutoffEnergy, CutoffProfile};
pub use galerkin::{
    galerkin_extremal, model_spectrum, sandwich_check, spectral_gap, ExtremalValues, SandwichReport,
    DEFAULT_HARMONIC_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("∂̄ of a top-degree form")]
    TopDegree,
    #[error("∂̄* of a degree-0 form")]
    BottomDegree,
    #[error("Gaussian is not integrable against the weight in coordinate {coord}")]
    NonIntegrable { coord: usize },
    #[error("forms live in different spaces: (n, q) = {left:?} vs {right:?}")]
    DegreeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("forms carry different Gaussian exponents")]
    ExponentMismatch,
    #[error("weight has {weight} coordinates, form has {form}")]
    DimensionMismatch { weight: usize, form: usize },
    #[error("weight coefficient {coord} is zero or not finite")]
    ZeroWeight { coord: usize },
    #[error("expected the negative weights first and positive ones after")]
    SignPatternMismatch,
    #[error("spectrum has an eigenvalue within tolerance of zero")]
    DegenerateSpectrum,
    #[error("the Galerkin candidate space is empty")]
    EmptySpace,
    #[error("the Galerkin Gram matrix is numerically singular")]
    IllConditionedGram,
    #[error("radial quadrature did not converge under refinement")]
    QuadratureFailure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Coefficients `μ_i` of the quadratic weight `γ0(w) = Σ μ_i |w_i|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeight {
    mu: Vec<f64>,
}

impl ModelWeight {
    pub fn new(mu: Vec<f64>) -> Result<Self, FormError> {
        if mu.len() > MAX_DIM {
            return Err(FormError::InvalidParameter("too many coordinates"));
        }
        if let Some(coord) = mu.iter().position(|m| *m == 0.0 || !m.is_finite()) {
            return Err(FormError::ZeroWeight { coord });
        }
        Ok(ModelWeight { mu })
    }

    /// The spectrum reordered so that negative eigenvalues come first, with
    /// the number of negatives.
    pub fn negatives_first(spec: &CurvatureSpectrum) -> Result<(Self, usize), FormError> {
        let q = match classify_point(spec) {
            PointClass::Degenerate => return Err(FormError::DegenerateSpectrum),
            PointClass::Index(q) => q,
        };
        let mut mu: Vec<f64> = spec.values().filter(|v| *v < 0.0).collect();
        mu.extend(spec.values().filter(|v| *v > 0.0));
        Ok((Self::new(mu)?, q))
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn eval(&self, w: &[Complex64]) -> f64 {
        self.mu.iter().zip(w).map(|(m, z)| m * z.norm_sqr()).sum()
    }
}

/// A set `I ⊂ {0..n}` of antiholomorphic differentials, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FormIndex(u32);

impl FormIndex {
    pub const EMPTY: FormIndex = FormIndex(0);

    pub fn from_coords(coords: &[usize]) -> Self {
        FormIndex(coords.iter().fold(0, |acc, &c| acc | (1 << c)))
    }

    /// `{0, .., q-1}`.
    pub fn leading(q: usize) -> Self {
        FormIndex(((1u64 << q) - 1) as u32)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0 & (1 << j) != 0
    }

    pub fn coords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(|&j| self.contains(j))
    }

    fn below(&self, j: usize) -> u32 {
        (self.0 & ((1u32 << j) - 1)).count_ones()
    }

    /// `dw̄_j ∧ dw̄_I` as `(sign, I ∪ {j})`, or `None` if `j ∈ I`.
    pub fn wedge(&self, j: usize) -> Option<(f64, FormIndex)> {
        if self.contains(j) {
            return None;
        }
        let sign = if self.below(j).is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((sign, FormIndex(self.0 | (1 << j))))
    }

    /// Contraction removing `j`: `(sign, I \ {j})`, or `None` if `j ∉ I`.
    pub fn contract(&self, j: usize) -> Option<(f64, FormIndex)> {
        if !self.contains(j) {
            return None;
        }
        let sign = if self.below(j).is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((sign, FormIndex(self.0 & !(1 << j))))
    }

    /// All index sets of size `q` in `n` coordinates, in increasing bitmask
    /// order.
    pub fn all(n: usize, q: usize) -> Vec<FormIndex> {
        (0u32..(1u32 << n)).filter(|m| m.count_ones() as usize == q).map(FormIndex).collect()
    }
}

type TermKey = (FormIndex, Monomial);

/// `Σ_I Σ c · w^α w̄^γ · exp(Σ a_i |w_i|²) dw̄_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPolyForm {
    n: usize,
    q: usize,
    exponent: Vec<f64>,
    terms: BTreeMap<TermKey, Complex64>,
}

impl GaussPolyForm {
    pub fn zero(n: usize, q: usize, exponent: Vec<f64>) -> Self {
        assert!(n <= MAX_DIM, "at most {MAX_DIM} coordinates");
        assert!(q <= n, "form degree exceeds dimension");
        assert_eq!(exponent.len(), n, "one Gaussian exponent per coordinate");
        GaussPolyForm { n, q, exponent, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn exponent(&self) -> &[f64] {
        &self.exponent
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (FormIndex, Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(&(i, m), &c)| (i, m, c))
    }

    pub fn coefficient(&self, index: FormIndex, m: Monomial) -> Complex64 {
        self.terms.get(&(index, m)).copied().unwrap_or_default()
    }

    /// Adds `c · m · dw̄_index`. Coefficients that cancel to exactly zero are
    /// dropped.
    pub fn add_term(&mut self, index: FormIndex, m: Monomial, c: Complex64) {
        assert_eq!(index.len(), self.q, "index set has the wrong size");
        if c == Complex64::default() {
            return;
        }
        let entry = self.terms.entry((index, m)).or_default();
        *entry += c;
        if *entry == Complex64::default() {
            self.terms.remove(&(index, m));
        }
    }

    pub fn add(&mut self, other: &GaussPolyForm) -> Result<(), FormError> {
        self.check_same_space(other)?;
        if self.exponent != other.exponent {
            return Err(FormError::ExponentMismatch);
        }
        for (&(i, m), &c) in &other.terms {
            self.add_term(i, m, c);
        }
        Ok(())
    }

    pub fn scaled(&self, s: Complex64) -> GaussPolyForm {
        let mut out = GaussPolyForm::zero(self.n, self.q, self.exponent.clone());
        for (&(i, m), &c) in &self.terms {
            out.add_term(i, m, c * s);
        }
        out
    }

    /// Component values `f_I(w)` including the Gaussian factor.
    pub fn eval(&self, w: &[Complex64]) -> BTreeMap<FormIndex, Complex64> {
        let gauss: f64 = self.exponent.iter().zip(w).map(|(a, z)| a * z.norm_sqr()).sum::<f64>().exp();
        let mut out = BTreeMap::new();
        for (&(i, m), &c) in &self.terms {
            *out.entry(i).or_insert(Complex64::default()) += c * m.eval(w) * gauss;
        }
        out
    }

    /// Component values at the origin: the constant coefficients.
    pub fn value_at_origin(&self) -> BTreeMap<FormIndex, Complex64> {
        self.terms.iter().filter(|((_, m), _)| m.is_constant()).map(|(&(i, _), &c)| (i, c)).collect()
    }

    /// `|f(w)|² e^{-γ0(w)}`.
    pub fn pointwise_norm_sq(&self, w: &[Complex64], weight: &ModelWeight) -> f64 {
        let s: f64 = self.eval(w).values().map(|v| v.norm_sqr()).sum();
        s * (-weight.eval(w)).exp()
    }

    fn check_same_space(&self, other: &GaussPolyForm) -> Result<(), FormError> {
        if self.n != other.n || self.q != other.q {
            return Err(FormError::DegreeMismatch { left: (self.n, self.q), right: (other.n, other.q) });
        }
        Ok(())
    }

    fn check_weight(&self, weight: &ModelWeight) -> Result<(), FormError> {
        if weight.n() != self.n {
            return Err(FormError::DimensionMismatch { weight: weight.n(), form: self.n });
        }
        Ok(())
    }

    /// `2 a_i - μ_i < 0` for every coordinate.
    pub fn check_integrable(&self, weight: &ModelWeight) -> Result<(), FormError> {
        self.check_weight(weight)?;
        match (0..self.n).find(|&i| 2.0 * self.exponent[i] - weight.mu[i] >= 0.0) {
            Some(coord) => Err(FormError::NonIntegrable { coord }),
            None => Ok(()),
        }
    }

    fn grouped(&self) -> BTreeMap<FormIndex, Vec<(Monomial, Complex64)>> {
        let mut groups: BTreeMap<FormIndex, Vec<(Monomial, Complex64)>> = BTreeMap::new();
        for (&(i, m), &c) in &self.terms {
            groups.entry(i).or_default().push((m, c));
        }
        groups
    }

    fn max_exponent(&self) -> usize {
        self.terms.keys().flat_map(|(_, m)| m.holo.iter().chain(&m.anti).copied()).max().unwrap_or(0) as usize
    }
}

/// `∂̄f`, a `(q+1)`-form with the same Gaussian exponent.
pub fn dbar(f: &GaussPolyForm) -> Result<GaussPolyForm, FormError> {
    if f.q == f.n {
        return Err(FormError::TopDegree);
    }
    let mut out = GaussPolyForm::zero(f.n, f.q + 1, f.exponent.clone());
    for (&(index, m), &c) in &f.terms {
        for j in 0..f.n {
            let Some((sign, target)) = index.wedge(j) else { continue };
            // ∂/∂w̄_j (w^α w̄^γ e^{a|w|²}) = γ_j w^α w̄^{γ-1} + a_j w^{α+1} w̄^γ
            if m.anti[j] > 0 {
                let mut lowered = m;
                lowered.anti[j] -= 1;
                out.add_term(target, lowered, c * (sign * m.anti[j] as f64));
            }
            let a = f.exponent[j];
            if a != 0.0 {
                let mut raised = m;
                raised.holo[j] += 1;
                out.add_term(target, raised, c * (sign * a));
            }
        }
    }
    Ok(out)
}

/// The formal adjoint of `∂̄` in `L²(e^{-γ0})`: componentwise
/// `δ_j = -∂/∂w_j + μ_j w̄_j` contracted against `dw̄_j`.
pub fn dbar_star(f: &GaussPolyForm, weight: &ModelWeight) -> Result<GaussPolyForm, FormError> {
    if f.q == 0 {
        return Err(FormError::BottomDegree);
    }
    f.check_integrable(weight)?;
    let mut out = GaussPolyForm::zero(f.n, f.q - 1, f.exponent.clone());
    for (&(index, m), &c) in &f.terms {
        for j in index.coords().collect::<Vec<_>>() {
            let (sign, target) = index.contract(j).expect("j is in the index set");
            if m.holo[j] > 0 {
                let mut lowered = m;
                lowered.holo[j] -= 1;
                out.add_term(target, lowered, c * (-sign * m.holo[j] as f64));
            }
            let shift = weight.mu[j] - f.exponent[j];
            if shift != 0.0 {
                let mut raised = m;
                raised.anti[j] += 1;
                out.add_term(target, raised, c * (sign * shift));
            }
        }
    }
    Ok(out)
}

/// `∂̄∂̄* + ∂̄*∂̄`, composed symbolically.
pub fn laplacian(f: &GaussPolyForm, weight: &ModelWeight) -> Result<GaussPolyForm, FormError> {
    f.check_integrable(weight)?;
    let mut out = GaussPolyForm::zero(f.n, f.q, f.exponent.clone());
    if f.q < f.n {
        out.add(&dbar_star(&dbar(f)?, weight)?)?;
    }
    if f.q > 0 {
        out.add(&dbar(&dbar_star(f, weight)?)?)?;
    }
    Ok(out)
}

/// Per-coordinate decay rates `μ_i - a_i - b_i` of `f ḡ e^{-γ0}`.
fn pair_rates(f: &GaussPolyForm, g: &GaussPolyForm, weight: &ModelWeight) -> Result<Vec<f64>, FormError> {
    f.check_same_space(g)?;
    f.check_integrable(weight)?;
    g.check_integrable(weight)?;
    let rates: Vec<f64> = (0..f.n).map(|i| weight.mu[i] - f.exponent[i] - g.exponent[i]).collect();
    match rates.iter().position(|&c| c <= 0.0) {
        Some(coord) => Err(FormError::NonIntegrable { coord }),
        None => Ok(rates),
    }
}

/// `π p! / c^{p+1}` for `p = 0..=max`.
fn moment_table(c: f64, max: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(max + 1);
    let mut v = PI / c;
    for p in 0..=max {
        t.push(v);
        v *= (p + 1) as f64 / c;
    }
    t
}

/// Visits every pair of terms whose product survives angular integration,
/// passing the per-coordinate radial exponents `p_i` and `c_f · conj(c_g)`.
fn for_each_radial_pair(f: &GaussPolyForm, g: &GaussPolyForm, mut visit: impl FnMut(&[usize], Complex64)) {
    let fg = f.grouped();
    let gg = g.grouped();
    let mut p = [0usize; MAX_DIM];
    for (index, fterms) in &fg {
        let Some(gterms) = gg.get(index) else { continue };
        for (mf, cf) in fterms {
            'pairs: for (mg, cg) in gterms {
                for i in 0..f.n {
                    let up = mf.holo[i] as usize + mg.anti[i] as usize;
                    let down = mf.anti[i] as usize + mg.holo[i] as usize;
                    if up != down {
                        continue 'pairs;
                    }
                    p[i] = up;
                }
                visit(&p[..f.n], cf * cg.conj());
            }
        }
    }
}

/// `⟨f, g⟩ = Σ_I ∫ f_I ḡ_I e^{-γ0} dm`, exactly.
pub fn inner_product(f: &GaussPolyForm, g: &GaussPolyForm, weight: &ModelWeight) -> Result<Complex64, FormError> {
    let rates = pair_rates(f, g, weight)?;
    let max = 2 * (f.max_exponent().max(g.max_exponent())) + 2;
    let tables: Vec<Vec<f64>> = rates.iter().map(|&c| moment_table(c, max)).collect();
    let mut acc = Complex64::default();
    for_each_radial_pair(f, g, |p, c| {
        let m: f64 = p.iter().enumerate().map(|(i, &pi)| tables[i][pi]).product();
        acc += c * m;
    });
    Ok(acc)
}

pub fn norm_sq(f: &GaussPolyForm, weight: &ModelWeight) -> Result<f64, FormError> {
    Ok(inner_product(f, f, weight)?.re)
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))` for integer
/// `a ≥ 1`, each computed without cancellation.
pub fn regularized_gamma(a: usize, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let af = a as f64;
    if x < af + 1.0 {
        // P = e^{-x} Σ_{k ≥ a} x^k / k!
        let mut term = (-x).exp();
        for k in 1..=a {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = a;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            k += 1;
            term *= x / k as f64;
            if term == 0.0 {
                break;
            }
        }
        (sum, 1.0 - sum)
    } else {
        // Q = e^{-x} Σ_{k < a} x^k / k!
        let mut term = (-x).exp();
        let mut sum = 0.0;
        for k in 0..a {
            sum += term;
            term *= x / (k + 1) as f64;
        }
        (1.0 - sum, sum)
    }
}

/// `‖f‖²` over the complement of the polydisc `{|w_i| < radius for all i}`,
/// computed from per-coordinate incomplete gamma factors.
pub fn tail_norm(f: &GaussPolyForm, weight: &ModelWeight, radius: f64) -> Result<f64, FormError> {
    region_norm(f, weight, radius, None)
}

/// `‖f‖²` over `{|w_coord| ≥ radius}`.
pub fn coordinate_tail_norm(
    f: &GaussPolyForm,
    weight: &ModelWeight,
    coord: usize,
    radius: f64,
) -> Result<f64, FormError> {
    if coord >= f.n {
        return Err(FormError::InvalidParameter("coordinate out of range"));
    }
    region_norm(f, weight, radius, Some(coord))
}

fn region_norm(f: &GaussPolyForm, weight: &ModelWeight, radius: f64, coord: Option<usize>) -> Result<f64, FormError> {
    if !(radius >= 0.0) {
        return Err(FormError::InvalidParameter("radius must be non-negative"));
    }
    let rates = pair_rates(f, f, weight)?;
    let mut acc = Complex64::default();
    for_each_radial_pair(f, f, |p, c| {
        // full_i = inside_i + outside_i per coordinate
        let parts: Vec<(f64, f64)> = p
            .iter()
            .zip(&rates)
            .map(|(&pi, &ci)| {
                let full = moment_table(ci, pi)[pi];
                let (lower, upper) = regularized_gamma(pi + 1, ci * radius * radius);
                (full * lower, full * upper)
            })
            .collect();
        let value = match coord {
            Some(j) => parts.iter().enumerate().map(|(i, &(lo, up))| if i == j { up } else { lo + up }).product(),
            None => {
                // union of {|w_i| ≥ R} split by the first coordinate leaving the disc
                let mut total = 0.0;
                for i in 0..parts.len() {
                    let before: f64 = parts[..i].iter().map(|&(lo, _)| lo).product();
                    let after: f64 = parts[i + 1..].iter().map(|&(lo, up)| lo + up).product();
                    total += before * parts[i].1 * after;
                }
                total
            }
        };
        acc += c * value;
    });
    Ok(acc.re.max(0.0))
}

/// The normalized harmonic model form
/// `β = (∏|μ_i| / π^n)^{1/2} exp(Σ_{i<q} μ_i |w_i|²) dw̄_0 ∧ .. ∧ dw̄_{q-1}`
/// for a weight whose first `q` coefficients are negative and the rest
/// positive.
pub fn model_test_form(weight: &ModelWeight) -> Result<GaussPolyForm, FormError> {
    let n = weight.n();
    let q = weight.mu.iter().take_while(|m| **m < 0.0).count();
    if weight.mu[q..].iter().any(|m| *m < 0.0) {
        return Err(FormError::SignPatternMismatch);
    }
    let exponent: Vec<f64> = weight.mu.iter().map(|&m| if m < 0.0 { m } else { 0.0 }).collect();
    let amplitude = (weight.mu.iter().map(|m| m.abs()).product::<f64>() / PI.powi(n as i32)).sqrt();
    let mut beta = GaussPolyForm::zero(n, q, exponent);
    beta.add_term(FormIndex::leading(q), Monomial::ONE, Complex64::new(amplitude, 0.0));
    Ok(beta)
}

/// Bergman kernel of the model space at the origin in degree `q`:
/// `∏|μ_i| / π^n` on the matching signature class, zero otherwise.
pub fn model_bergman(spec: &CurvatureSpectrum, q: usize) -> Result<f64, FormError> {
    match classify_point(spec) {
        PointClass::Degenerate => Err(FormError::DegenerateSpectrum),
        PointClass::Index(p) if p != q => Ok(0.0),
        PointClass::Index(_) => {
            let n = spec.n() as i32;
            Ok(spec.values().map(f64::abs).product::<f64>() / PI.powi(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dbar_of_constant_vanishes() {
        let mut f = GaussPolyForm::zero(2, 0, vec![0.0, 0.0]);
        f.add_term(FormIndex::EMPTY, Monomial::ONE, c(1.0));
        assert!(dbar(&f).unwrap().is_zero());
    }

    #[test]
    fn dbar_of_wbar() {
        let mut f = GaussPolyForm::zero(2, 0, vec![0.0, 0.0]);
        f.add_term(FormIndex::EMPTY, Monomial::single(0, 0, 1), c(1.0));
        let d = dbar(&f).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.coefficient(FormIndex::from_coords(&[0]), Monomial::ONE), c(1.0));
    }

    #[test]
    fn dbar_of_gaussian() {
        let lambda = -1.7;
        let mut f = GaussPolyForm::zero(1, 0, vec![lambda]);
        f.add_term(FormIndex::EMPTY, Monomial::ONE, c(1.0));
        let d = dbar(&f).unwrap();
        assert_eq!(d.coefficient(FormIndex::from_coords(&[0]), Monomial::single(0, 1, 0)), c(lambda));
        assert_eq!(d.exponent(), &[lambda]);
    }

    #[test]
    fn degree_errors() {
        let f = GaussPolyForm::zero(1, 1, vec![0.0]);
        assert_eq!(dbar(&f), Err(FormError::TopDegree));
        let g = GaussPolyForm::zero(1, 0, vec![0.0]);
        let w = ModelWeight::new(vec![1.0]).unwrap();
        assert_eq!(dbar_star(&g, &w), Err(FormError::BottomDegree));
    }

    #[test]
    fn non_integrable_rejected() {
        let f = GaussPolyForm::zero(1, 1, vec![0.0]);
        let w = ModelWeight::new(vec![-1.0]).unwrap();
        assert_eq!(dbar_star(&f, &w), Err(FormError::NonIntegrable { coord: 0 }));
        assert_eq!(inner_product(&f, &f, &w), Err(FormError::NonIntegrable { coord: 0 }));
    }

    #[test]
    fn laplacian_of_wbar_function() {
        let mu = [2.5, 0.75];
        let w = ModelWeight::new(mu.to_vec()).unwrap();
        let mut f = GaussPolyForm::zero(2, 0, vec![0.0, 0.0]);
        f.add_term(FormIndex::EMPTY, Monomial::single(0, 0, 1), c(1.0));
        let lf = laplacian(&f, &w).unwrap();
        assert_eq!(lf.len(), 1);
        assert_eq!(lf.coefficient(FormIndex::EMPTY, Monomial::single(0, 0, 1)), c(mu[0]));
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let w = ModelWeight::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut f = GaussPolyForm::zero(3, 0, vec![0.0; 3]);
        f.add_term(FormIndex::EMPTY, Monomial::ONE, c(4.0));
        assert!(laplacian(&f, &w).unwrap().is_zero());
    }

    #[test]
    fn components_are_orthogonal() {
        let w = ModelWeight::new(vec![1.0, 1.0]).unwrap();
        let mut f = GaussPolyForm::zero(2, 1, vec![0.0, 0.0]);
        f.add_term(FormIndex::from_coords(&[0]), Monomial::single(0, 0, 1), c(1.0));
        let mut g = GaussPolyForm::zero(2, 1, vec![0.0, 0.0]);
        g.add_term(FormIndex::from_coords(&[1]), Monomial::ONE, c(1.0));
        assert_eq!(inner_product(&f, &g, &w).unwrap(), Complex64::default());
    }

    #[test]
    fn degree_mismatch_rejected() {
        let w = ModelWeight::new(vec![1.0, 1.0]).unwrap();
        let f = GaussPolyForm::zero(2, 1, vec![0.0, 0.0]);
        let g = GaussPolyForm::zero(2, 0, vec![0.0, 0.0]);
        assert!(matches!(inner_product(&f, &g, &w), Err(FormError::DegreeMismatch { .. })));
    }

    #[test]
    fn test_form_one_dimensional() {
        let w = ModelWeight::new(vec![-1.0]).unwrap();
        let beta = model_test_form(&w).unwrap();
        assert_eq!(beta.q(), 1);
        let amp = beta.coefficient(FormIndex::leading(1), Monomial::ONE).re;
        assert!((amp - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((norm_sq(&beta, &w).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn test_form_value_at_origin() {
        let w = ModelWeight::new(vec![-1.0, 2.0]).unwrap();
        let beta = model_test_form(&w).unwrap();
        let v: f64 = beta.value_at_origin().values().map(|z| z.norm_sqr()).sum();
        assert!((v - 2.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn test_form_sign_pattern() {
        let w = ModelWeight::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(model_test_form(&w), Err(FormError::SignPatternMismatch));
    }

    #[test]
    fn test_form_is_harmonic_exactly() {
        let w = ModelWeight::new(vec![-2.0, -0.5, 3.0]).unwrap();
        let beta = model_test_form(&w).unwrap();
        assert!(dbar(&beta).unwrap().is_zero());
        assert!(dbar_star(&beta, &w).unwrap().is_zero());
        assert!(laplacian(&beta, &w).unwrap().is_zero());
    }

    #[test]
    fn model_bergman_examples() {
        let s = CurvatureSpectrum::new(vec![-1.0], vec![2.0]);
        assert_eq!(model_bergman(&s, 0), Ok(0.0));
        assert!((model_bergman(&s, 1).unwrap() - 2.0 / (PI * PI)).abs() < 1e-15);
        let s = CurvatureSpectrum::new(vec![], vec![PI]);
        assert!((model_bergman(&s, 0).unwrap() - 1.0).abs() < 1e-15);
        let s = CurvatureSpectrum::new(vec![0.0], vec![PI]);
        assert_eq!(model_bergman(&s, 0), Err(FormError::DegenerateSpectrum));
    }

    #[test]
    fn tail_of_test_form() {
        let w = ModelWeight::new(vec![-1.5, 2.0]).unwrap();
        let beta = model_test_form(&w).unwrap();
        assert!((tail_norm(&beta, &w, 0.0).unwrap() - 1.0).abs() < 1e-14);
        // |β|² is a product of exponentials: tail = 1 - ∏(1 - e^{-c R²})
        let r: f64 = 0.8;
        let expected = 1.0 - (1.0 - (-1.5 * r * r).exp()) * (1.0 - (-2.0 * r * r).exp());
        assert!((tail_norm(&beta, &w, r).unwrap() - expected).abs() < 1e-14);
        let one = coordinate_tail_norm(&beta, &w, 1, r).unwrap();
        assert!((one - (-2.0 * r * r).exp()).abs() < 1e-14);
    }

    #[test]
    fn tail_ratio_decays_like_gaussian() {
        let w = ModelWeight::new(vec![-1.0, 0.6]).unwrap();
        let beta = model_test_form(&w).unwrap();
        let cmin: f64 = 0.6;
        let mut prev = tail_norm(&beta, &w, 2.0).unwrap();
        for k in 3..8 {
            let t = tail_norm(&beta, &w, k as f64).unwrap();
            assert!(t < prev);
            assert!(t / prev <= (-cmin).exp(), "R={k}: ratio {}", t / prev);
            prev = t;
        }
        assert!(tail_norm(&beta, &w, 40.0).unwrap() < 1e-300);
    }

    #[test]
    fn incomplete_gamma_consistency() {
        for a in 1..12 {
            for &x in &[0.01, 0.5, 3.0, 11.0, 40.0] {
                let (p, q) = regularized_gamma(a, x);
                assert!((p + q - 1.0).abs() < 1e-14, "a={a} x={x}");
                assert!(p >= 0.0 && q >= 0.0);
            }
        }
        // P(1, x) = 1 - e^{-x}
        let (p, _) = regularized_gamma(1, 1e-6);
        assert!((p - (-(-1e-6f64).exp_m1())).abs() < 1e-20);
    }
}
