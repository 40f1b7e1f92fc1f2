//! Finite-dimensional Galerkin approximation of the model harmonic space and
//! its Bergman and extremal kernels at the origin.
//!
//! For a diagonal weight the Laplacian acts on each component `f_I dw̄_I`
//! separately as `Σ_j L_j + Σ_{j ∈ I} μ_j`, and commutes with the rotations
//! `w_j ↦ e^{iθ} w_j`. Only the rotation-invariant block (`α = γ`) can be
//! nonzero at the origin, so the kernels are computed on that block. Within
//! it the candidate space `{|w|^{2t} e^{Σ_{μ_i<0} μ_i|w_i|²} dw̄_I : 2|t| ≤ d}`
//! is spanned by products of Laguerre functions, which keeps the Gram matrix
//! close to the identity.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{inner_product, laplacian, FormError, FormIndex, GaussPolyForm, ModelWeight};
use crate::hermitian::CurvatureSpectrum;
use crate::linalg::{self, CMatrix};
use crate::poly::Monomial;

/// Rayleigh quotients at most this fraction of the largest one count as
/// harmonic.
pub const DEFAULT_HARMONIC_TOL: f64 = 1e-8;

/// Kernels at the origin computed from the approximate harmonic space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalValues {
    pub q: usize,
    pub degree: usize,
    /// Extremal function `sup |α(0)|² / ‖α‖²`.
    pub s: f64,
    /// Per-component extremal functions `sup |α_I(0)|² / ‖α‖²`, indexed in
    /// the negatives-first coordinate order.
    pub components: Vec<(FormIndex, f64)>,
    /// Bergman kernel `Σ_k |α_k(0)|²` over an orthonormal harmonic basis.
    pub b: f64,
    pub harmonic_dim: usize,
    pub threshold: f64,
    /// All generalized Rayleigh quotients, ascending.
    pub quotients: Vec<f64>,
    /// Values at the origin of the orthonormal harmonic basis, one row per
    /// component and one column per basis vector.
    pub values: CMatrix,
}

/// One radial coordinate factor: Laguerre functions `φ_t`, `t ≤ tmax`.
struct Factor {
    gram: Vec<Vec<f64>>,
    /// `⟨Δφ_s, φ_t⟩` for the coordinate as a 0-form and as a 1-form.
    lap: [Vec<Vec<f64>>; 2],
    origin: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sqrt(c/π) L_t(c|w|²) e^{a|w|²}` as an `n = 1` form of degree `q`.
fn laguerre_form(t: usize, c: f64, a: f64, q: usize) -> GaussPolyForm {
    let mut f = GaussPolyForm::zero(1, q, vec![a]);
    let amp = (c / PI).sqrt();
    let mut ck = 1.0;
    let mut fact = 1.0;
    for k in 0..=t {
        if k > 0 {
            ck *= c;
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coef = amp * sign * binomial(t, k) * ck / fact;
        f.add_term(FormIndex::leading(q), Monomial::single(0, k as u8, k as u8), Complex64::new(coef, 0.0));
    }
    f
}

impl Factor {
    fn new(mu: f64, tmax: usize) -> Result<Self, FormError> {
        let c = mu.abs();
        let a = if mu < 0.0 { mu } else { 0.0 };
        let weight = ModelWeight::new(vec![mu])?;
        let size = tmax + 1;
        let mut gram = vec![vec![0.0; size]; size];
        let mut lap = [vec![vec![0.0; size]; size], vec![vec![0.0; size]; size]];
        for (q, lap_q) in lap.iter_mut().enumerate() {
            let basis: Vec<GaussPolyForm> = (0..size).map(|t| laguerre_form(t, c, a, q)).collect();
            let images: Vec<GaussPolyForm> = basis.iter().map(|f| laplacian(f, &weight)).collect::<Result<_, _>>()?;
            for s in 0..size {
                for t in 0..size {
                    lap_q[s][t] = inner_product(&images[t], &basis[s], &weight)?.re;
                    if q == 0 {
                        gram[s][t] = inner_product(&basis[t], &basis[s], &weight)?.re;
                    }
                }
            }
        }
        Ok(Factor { gram, lap, origin: vec![(c / PI).sqrt(); size] })
    }
}

/// Multi-indices `t ∈ N^n` with `2|t| ≤ d`, in lexicographic order.
fn radial_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for t in 0..=left {
            cur.push(t);
            rec(n, left - t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d / 2, &mut Vec::new(), &mut out);
    out
}

struct Assembly {
    /// Per component: generalized eigenvalues and `G`-orthonormal vectors.
    blocks: Vec<(FormIndex, Vec<f64>, CMatrix)>,
    origin: Vec<f64>,
}

fn assemble(weight: &ModelWeight, q: usize, d: usize) -> Result<Assembly, FormError> {
    let n = weight.n();
    if q > n {
        return Err(FormError::EmptySpace);
    }
    let factors: Vec<Factor> = weight.mu().iter().map(|&m| Factor::new(m, d / 2)).collect::<Result<_, _>>()?;
    let idx = radial_indices(n, d);
    let size = idx.len();
    let origin: Vec<f64> =
        idx.iter().map(|t| t.iter().enumerate().map(|(j, &tj)| factors[j].origin[tj]).product()).collect();
    let mut blocks = Vec::new();
    for comp in FormIndex::all(n, q) {
        let mut g = CMatrix::zeros(size, size);
        let mut a = CMatrix::zeros(size, size);
        for (r, ta) in idx.iter().enumerate() {
            for (s, tb) in idx.iter().enumerate() {
                let pieces: Vec<f64> = (0..n).map(|j| factors[j].gram[ta[j]][tb[j]]).collect();
                g[(r, s)] = Complex64::new(pieces.iter().product(), 0.0);
                let mut lap = 0.0;
                for j in 0..n {
                    let deg = usize::from(comp.contains(j));
                    let others: f64 = (0..n).filter(|&i| i != j).map(|i| pieces[i]).product();
                    lap += factors[j].lap[deg][ta[j]][tb[j]] * others;
                }
                a[(r, s)] = Complex64::new(lap, 0.0);
            }
        }
        let gev = linalg::eigvalsh(&g);
        let (lo, hi) = (gev[0], gev[size - 1]);
        if !(lo > 1e-12 * hi) {
            return Err(FormError::IllConditionedGram);
        }
        let (vals, vecs) = linalg::generalized_eigh(&a, &g).ok_or(FormError::IllConditionedGram)?;
        blocks.push((comp, vals, vecs));
    }
    Ok(Assembly { blocks, origin })
}

fn harmonic_threshold(asm: &Assembly, harmonic_tol: f64) -> f64 {
    let max = asm.blocks.iter().flat_map(|(_, v, _)| v.iter().copied()).fold(0.0, f64::max);
    harmonic_tol * max
}

/// Galerkin approximation of the harmonic `(0,q)`-forms for the model weight
/// of `spec` at polynomial degree `d`, with the kernels at the origin.
pub fn galerkin_extremal(
    spec: &CurvatureSpectrum,
    q: usize,
    d: usize,
    harmonic_tol: f64,
) -> Result<ExtremalValues, FormError> {
    let (weight, _) = ModelWeight::negatives_first(spec)?;
    let asm = assemble(&weight, q, d)?;
    let threshold = harmonic_threshold(&asm, harmonic_tol);
    let comps: Vec<FormIndex> = asm.blocks.iter().map(|(c, _, _)| *c).collect();
    let mut columns: Vec<(usize, Complex64)> = Vec::new();
    let mut quotients = Vec::new();
    for (row, (_, vals, vecs)) in asm.blocks.iter().enumerate() {
        quotients.extend(vals.iter().copied());
        for (k, &v) in vals.iter().enumerate() {
            if v <= threshold {
                let value: Complex64 = (0..asm.origin.len()).map(|b| vecs[(b, k)] * asm.origin[b]).sum();
                columns.push((row, value));
            }
        }
    }
    quotients.sort_by(f64::total_cmp);
    let mut values = CMatrix::zeros(comps.len(), columns.len());
    for (col, (row, v)) in columns.iter().enumerate() {
        values[(*row, col)] = *v;
    }
    let (s, components, b) = kernels(&values, &comps);
    Ok(ExtremalValues { q, degree: d, s, components, b, harmonic_dim: columns.len(), threshold, quotients, values })
}

/// `(S, [S_I], B)` from the origin values `E` of an orthonormal basis:
/// `S = λ_max(E Eᴴ)`, `S_I = ‖row_I‖²`, `B = ‖E‖²`.
fn kernels(values: &CMatrix, comps: &[FormIndex]) -> (f64, Vec<(FormIndex, f64)>, f64) {
    let per: Vec<(FormIndex, f64)> =
        comps.iter().enumerate().map(|(i, c)| (*c, values.row(i).iter().map(|z| z.norm_sqr()).sum())).collect();
    let b = per.iter().map(|(_, v)| v).sum();
    let s = if values.ncols() == 0 || values.nrows() == 0 {
        0.0
    } else {
        linalg::eigvalsh(&(values * values.adjoint())).last().copied().unwrap_or(0.0).max(0.0)
    };
    (s, per, b)
}

/// Outcome of comparing `S ≤ B ≤ Σ_I S_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub s: f64,
    pub b: f64,
    pub component_sum: f64,
    pub basis_size: usize,
    pub holds: bool,
}

/// Checks the kernel sandwich on the Galerkin harmonic space, optionally
/// restricted to the span of its first `sample` basis vectors.
pub fn sandwich_check(
    spec: &CurvatureSpectrum,
    q: usize,
    d: usize,
    sample: Option<usize>,
) -> Result<SandwichReport, FormError> {
    let ev = galerkin_extremal(spec, q, d, DEFAULT_HARMONIC_TOL)?;
    let keep = sample.map_or(ev.values.ncols(), |k| k.min(ev.values.ncols()));
    let sub = ev.values.columns(0, keep).into_owned();
    let comps: Vec<FormIndex> = ev.components.iter().map(|(c, _)| *c).collect();
    let (s, per, b) = kernels(&sub, &comps);
    let component_sum: f64 = per.iter().map(|(_, v)| v).sum();
    let slack = 1e-9 * b.max(1.0);
    Ok(SandwichReport { s, b, component_sum, basis_size: keep, holds: s <= b + slack && b <= component_sum + slack })
}

/// Galerkin Rayleigh quotients on the rotation-invariant block, ascending.
pub fn model_spectrum(spec: &CurvatureSpectrum, q: usize, d: usize) -> Result<Vec<f64>, FormError> {
    Ok(galerkin_extremal(spec, q, d, DEFAULT_HARMONIC_TOL)?.quotients)
}

/// Smallest Rayleigh quotient above the harmonic threshold, if any.
pub fn spectral_gap(spec: &CurvatureSpectrum, q: usize, d: usize) -> Result<Option<f64>, FormError> {
    let ev = galerkin_extremal(spec, q, d, DEFAULT_HARMONIC_TOL)?;
    Ok(ev.quotients.iter().copied().find(|&v| v > ev.threshold))
}
