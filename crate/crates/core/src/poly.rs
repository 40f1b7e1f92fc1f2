//! Polynomials in `z` and `z̄` with complex coefficients.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::MAX_DIM;

/// `z^holo · z̄^anti`, one exponent pair per complex coordinate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    pub holo: [u8; MAX_DIM],
    pub anti: [u8; MAX_DIM],
}

/// A Wirtinger derivative direction: `∂/∂z_i` or `∂/∂z̄_i`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Wirtinger {
    pub coord: usize,
    pub conjugate: bool,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { holo: [0; MAX_DIM], anti: [0; MAX_DIM] };

    pub fn new(holo: &[u8], anti: &[u8]) -> Self {
        assert!(holo.len() <= MAX_DIM && anti.len() <= MAX_DIM);
        let mut m = Monomial::ONE;
        m.holo[..holo.len()].copy_from_slice(holo);
        m.anti[..anti.len()].copy_from_slice(anti);
        m
    }

    /// `z_i^a z̄_i^b` in a single coordinate.
    pub fn single(coord: usize, a: u8, b: u8) -> Self {
        let mut m = Monomial::ONE;
        m.holo[coord] = a;
        m.anti[coord] = b;
        m
    }

    pub fn degree(&self) -> u32 {
        self.holo.iter().chain(&self.anti).map(|&e| e as u32).sum()
    }

    /// Total degree in the coordinates `coords` (both `z` and `z̄`).
    pub fn degree_in(&self, coords: core::ops::Range<usize>) -> u32 {
        coords.map(|i| self.holo[i] as u32 + self.anti[i] as u32).sum()
    }

    pub fn is_constant(&self) -> bool {
        *self == Monomial::ONE
    }

    pub fn conjugate(&self) -> Monomial {
        Monomial { holo: self.anti, anti: self.holo }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for i in 0..MAX_DIM {
            m.holo[i] += other.holo[i];
            m.anti[i] += other.anti[i];
        }
        m
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (i, zi) in z.iter().enumerate() {
            if self.holo[i] > 0 {
                acc *= zi.powu(self.holo[i] as u32);
            }
            if self.anti[i] > 0 {
                acc *= zi.conj().powu(self.anti[i] as u32);
            }
        }
        acc
    }

    /// Applies a Wirtinger derivative: returns the multiplicity factor and the
    /// lowered monomial, or `None` when the derivative vanishes.
    pub fn differentiate(&self, d: Wirtinger) -> Option<(f64, Monomial)> {
        let mut m = *self;
        let slot = if d.conjugate { &mut m.anti[d.coord] } else { &mut m.holo[d.coord] };
        if *slot == 0 {
            return None;
        }
        let factor = *slot as f64;
        *slot -= 1;
        Some((factor, m))
    }
}

/// A finite sum of monomials in `n` complex variables and their conjugates.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_DIM, "at most {MAX_DIM} complex variables");
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Complex64)>) -> Self {
        let mut p = Polynomial::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        debug_assert!(m.holo[self.n..].iter().chain(&m.anti[self.n..]).all(|&e| e == 0));
        let entry = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn add(&mut self, other: &Polynomial) {
        for (m, c) in &other.terms {
            self.add_term(*m, *c);
        }
    }

    pub fn sub(&mut self, other: &Polynomial) {
        for (m, c) in &other.terms {
            self.add_term(*m, -*c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * m.eval(z)).sum()
    }

    /// The polynomial whose values are the complex conjugates of this one.
    pub fn conjugate(&self) -> Polynomial {
        Polynomial::from_terms(self.n, self.terms.iter().map(|(m, c)| (m.conjugate(), c.conj())))
    }

    /// `(P + P̄)/2`, a real-valued polynomial with the same real part.
    pub fn real_part(&self) -> Polynomial {
        let mut p = self.clone();
        p.add(&self.conjugate());
        p.scale(0.5);
        p
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    }

    pub fn differentiate(&self, d: Wirtinger) -> Polynomial {
        Polynomial::from_terms(
            self.n,
            self.terms.iter().filter_map(|(m, c)| m.differentiate(d).map(|(f, m2)| (m2, c * f))),
        )
    }

    /// Substitutes `z_i -> s_i z_i` for real scale factors `s`.
    pub fn rescale_variables(&self, s: &[f64]) -> Polynomial {
        Polynomial::from_terms(
            self.n,
            self.terms.iter().map(|(m, c)| {
                let f: f64 = (0..self.n).map(|i| powi_exact(s[i], m.holo[i] as i32 + m.anti[i] as i32)).product();
                (*m, c * f)
            }),
        )
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }
}

fn powi_exact(x: f64, e: i32) -> f64 {
    if e == 0 {
        1.0
    } else {
        num_traits::Float::powi(x, e)
    }
}

/// All Wirtinger multi-derivatives of total order `order` in `n` variables,
/// as non-decreasing sequences of directions.
pub fn derivative_multi_indices(n: usize, order: usize) -> Vec<Vec<Wirtinger>> {
    let dirs: Vec<Wirtinger> = (0..n)
        .flat_map(|coord| [Wirtinger { coord, conjugate: false }, Wirtinger { coord, conjugate: true }])
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(dirs: &[Wirtinger], start: usize, left: usize, cur: &mut Vec<Wirtinger>, out: &mut Vec<Vec<Wirtinger>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dirs.len() {
            cur.push(dirs[i]);
            rec(dirs, i, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(&dirs, 0, order, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_part_of_z_zbar_is_real() {
        let p = Polynomial::from_terms(2, [(Monomial::new(&[1, 0], &[0, 1]), c(2.0, 1.0))]);
        let re = p.real_part();
        let z = [c(0.3, -0.7), c(1.1, 0.4)];
        let v = re.eval(&z);
        assert!(v.im.abs() < 1e-15);
        assert!((v.re - p.eval(&z).re).abs() < 1e-15);
    }

    #[test]
    fn wirtinger_derivative_of_modulus_squared() {
        let p = Polynomial::from_terms(1, [(Monomial::single(0, 2, 1), c(1.0, 0.0))]);
        let d = p.differentiate(Wirtinger { coord: 0, conjugate: false });
        assert_eq!(d.coefficient(&Monomial::single(0, 1, 1)), c(2.0, 0.0));
        let dd = d.differentiate(Wirtinger { coord: 0, conjugate: true });
        assert_eq!(dd.coefficient(&Monomial::single(0, 1, 0)), c(2.0, 0.0));
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = Polynomial::from_terms(1, [(Monomial::single(0, 1, 0), c(1.5, 0.0))]);
        p.add_term(Monomial::single(0, 1, 0), c(-1.5, 0.0));
        assert!(p.is_zero());
    }

    #[test]
    fn multi_index_counts() {
        // combinations with repetition of 2n directions
        assert_eq!(derivative_multi_indices(2, 0).len(), 1);
        assert_eq!(derivative_multi_indices(2, 1).len(), 4);
        assert_eq!(derivative_multi_indices(2, 2).len(), 10);
        assert_eq!(derivative_multi_indices(3, 2).len(), 21);
    }
}
