//! Gauss-Legendre rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes.push(mid - half * x);
            weights.push(half * 2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let dpn = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, dpn)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` split at `breaks`.
pub fn integrate_piecewise(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], points: usize) -> f64 {
    let mut cuts = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.windows(2).map(|w| GaussLegendre::new(points, w[0], w[1]).integrate(&mut *f)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(5, -1.0, 2.0);
        // x^9 integrates to (2^10 - 1)/10 on [-1, 2]
        let got = rule.integrate(|x| x.powi(9));
        assert!((got - 1023.0 / 10.0).abs() < 1e-11);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 7, 40, 128] {
            let rule = GaussLegendre::new(n, 0.5, 3.0);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.5).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let got = integrate_piecewise(&mut |x: f64| (-x * x).exp(), -8.0, 8.0, &[0.0], 40);
        assert!((got - PI.sqrt()).abs() < 1e-13);
    }
}
