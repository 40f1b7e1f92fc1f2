use std::f64::consts::PI;

use morse_core::hermitian::det_rel;
use morse_core::localize::ScalingPair;
use morse_core::torus::{
    bergman_constant, cohomology_dims, det_rel_exact, landau_gap, measured_kappa, morse_integrals, morse_rhs_exact,
    theta_bergman, truncated_bergman_check, truncated_dims, weak_morse_check, MuRule, Perturbation, TorusScenario,
};
use num_rational::Ratio;

fn sweep(ms: std::ops::RangeInclusive<u64>) -> Vec<ScalingPair> {
    ms.map(|m| ScalingPair::power_sequence(m, 3).unwrap()).collect()
}

fn scenarios() -> Vec<TorusScenario> {
    [(vec![1], vec![1]), (vec![-1], vec![2]), (vec![-2], vec![1, 3])]
        .into_iter()
        .map(|(d, e)| TorusScenario::new(d, e).unwrap())
        .collect()
}

/// `h^q` as a sum over the `q`-element sets of factors contributing `H¹`.
fn direct_dims(degrees: &[i128], g: i128) -> Vec<i128> {
    let n = degrees.len();
    let mut h = vec![0i128; n + 1];
    for mask in 0u32..(1 << n) {
        let term: i128 = degrees
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let in_h1 = mask & (1 << i) != 0;
                match (in_h1, m > 0) {
                    (false, true) => m,
                    (true, false) => -m,
                    _ => 0,
                }
            })
            .product();
        h[mask.count_ones() as usize] += term * g;
    }
    h
}

#[test]
fn kunneth_matches_direct_enumeration() {
    let cases =
        [(vec![1, -2], vec![3]), (vec![-1, -1], vec![2, -5]), (vec![4], vec![-1, -1, -1]), (vec![-3, 2, 1], vec![1])];
    for (d, e) in cases {
        for g in [1, 3] {
            let s = TorusScenario::new(d.clone(), e.clone()).unwrap().with_twist(g).unwrap();
            for (k, l) in [(1, 1), (8, 2), (27, 3), (125, 5)] {
                let degs = s.factor_degrees(k, l).unwrap();
                assert_eq!(cohomology_dims(&s, k, l).unwrap(), direct_dims(&degs, g as i128));
            }
        }
    }
}

#[test]
fn riemann_roch_euler_characteristic() {
    let s = TorusScenario::new(vec![-2, 3], vec![1, -4]).unwrap();
    for (k, l) in [(1, 1), (8, 2), (64, 4)] {
        let h = cohomology_dims(&s, k, l).unwrap();
        let chi: i128 = h.iter().enumerate().map(|(q, v)| if q % 2 == 0 { *v } else { -v }).sum();
        let degs = s.factor_degrees(k, l).unwrap();
        assert_eq!(chi, degs.iter().product::<i128>());
    }
}

#[test]
fn exact_morse_equality_on_flat_scenarios() {
    for s in scenarios() {
        let q0 = s.realized_q();
        for r in weak_morse_check(&s, &sweep(2..=12), 16).unwrap() {
            assert!(r.passed());
            let exact = r.rhs_exact.as_ref().unwrap();
            for q in 0..=s.n() {
                assert_eq!(r.h[q], exact[q]);
                if q != q0 {
                    assert_eq!(r.h[q], 0);
                }
            }
            assert_eq!(morse_rhs_exact(&s, r.k, r.l).unwrap(), *exact);
        }
    }
}

#[test]
fn bergman_constant_equals_det_rel() {
    for s in scenarios() {
        let q0 = s.realized_q();
        let float_det = det_rel(&s.spectrum()).unwrap();
        for p in sweep(2..=12) {
            for q in 0..=s.n() {
                let b = bergman_constant(&s, q, p.k, p.l).unwrap();
                assert_eq!(b, det_rel_exact(&s, q).unwrap());
                if q == q0 {
                    assert_eq!(b, Ratio::from_integer(float_det as i128));
                }
            }
        }
    }
}

#[test]
fn perturbed_weak_inequalities() {
    let base = TorusScenario::new(vec![-1], vec![2]).unwrap();
    let s = base.clone().with_perturbation(Perturbation::cosine(0.1, 1)).unwrap();
    let flat = weak_morse_check(&base, &sweep(2..=5), 16).unwrap();
    let bent = weak_morse_check(&s, &sweep(2..=5), 32).unwrap();
    for (f, b) in flat.iter().zip(&bent) {
        assert!(b.passed(), "{b:?}");
        assert_eq!(f.h, b.h);
        assert!((b.euler_rhs - f.euler_rhs).abs() <= 1e-2 * f.euler_rhs.abs());
    }
    // the bump flips the sign of Θ_E on part of the torus
    let m = morse_integrals(&s, 8, 2, 32).unwrap();
    assert!(m.rhs[0] > 0.0 && m.rhs[1] > 0.0);
}

#[test]
fn truncation_below_the_gap_recovers_cohomology() {
    for s in scenarios() {
        let q0 = s.realized_q();
        let gap = landau_gap(&s, q0);
        for (k, l) in [(8, 2), (27, 3)] {
            let h = cohomology_dims(&s, k, l).unwrap();
            assert_eq!(truncated_dims(&s, q0, k, l, 0.0).unwrap(), h[q0]);
            assert_eq!(truncated_dims(&s, q0, k, l, 0.999 * gap).unwrap(), h[q0]);
            assert!(truncated_dims(&s, q0, k, l, 1.001 * gap).unwrap() > h[q0]);
        }
    }
}

#[test]
fn truncated_kernels_settle() {
    for s in scenarios() {
        let rep = truncated_bergman_check(&s, s.realized_q(), &sweep(4..=20), MuRule::SqrtDeltaBound).unwrap();
        let first = rep.first_passing.expect("sweep never settles");
        for row in &rep.rows[first..] {
            assert_eq!(row.truncated, Some(row.harmonic));
        }
    }
}

#[test]
fn theta_oracle_fixes_the_convention_constant() {
    for k in [1, 3, 8] {
        let f = theta_bergman(1, k, 31).unwrap();
        assert!((f.integral - k as f64).abs() < 1e-6);
        assert!((measured_kappa(&f) - 1.0 / PI).abs() < 1e-6);
    }
}
