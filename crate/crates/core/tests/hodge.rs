use morse_core::hodge::{hodge_numbers, random_complex, truncation_inequality_check, FiniteComplex, HodgeError};
use morse_core::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Numerical rank from singular values, a different factorization from the
/// Laplacian eigen-solve.
fn rank(a: &DMatrix<Complex64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |m, &x| m.max(x));
    sv.iter().filter(|&&x| x > 1e-9 * top).count()
}

fn random_dims(rng: &mut impl Rng) -> Vec<usize> {
    let len = rng.gen_range(1..=6);
    (0..len).map(|_| rng.gen_range(1..=12)).collect()
}

#[test]
fn harmonic_ranks_match_rank_nullity() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for seed in 0..200 {
        let dims = random_dims(&mut rng);
        let c = random_complex(&dims, None, seed).unwrap();
        let ranks: Vec<usize> = c.maps().iter().map(rank).collect();
        let want: Vec<usize> = (0..dims.len())
            .map(|j| dims[j] - ranks.get(j).copied().unwrap_or(0) - if j > 0 { ranks[j - 1] } else { 0 })
            .collect();
        assert_eq!(hodge_numbers(&c).h, want, "dims {dims:?}");
    }
}

#[test]
fn prescribed_ranks_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for seed in 0..100 {
        let dims = random_dims(&mut rng);
        let free = random_complex(&dims, None, seed).unwrap();
        let h = hodge_numbers(&free).h;
        let again = random_complex(&dims, Some(&h), seed + 1000).unwrap();
        assert_eq!(hodge_numbers(&again).h, h);
    }
}

#[test]
fn truncation_inequality_and_full_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for seed in 0..200 {
        let dims = random_dims(&mut rng);
        let c = random_complex(&dims, None, seed).unwrap();
        for j in 0..c.length().saturating_sub(1) {
            assert_eq!(c.composition_residual(j), 0.0);
        }
        let hn = hodge_numbers(&c);
        for mu in hn.canonical_mu_grid(24) {
            for q in 0..dims.len() {
                assert_eq!(hn.truncation_holds(q, mu), Some(true));
            }
            assert_eq!(hn.truncated_euler_characteristic(mu), c.euler_characteristic());
        }
    }
}

#[test]
fn one_by_one_complex() {
    let eps = 0.25;
    let a = DMatrix::from_element(1, 1, Complex64::new(eps, 0.0));
    let c = FiniteComplex::new(vec![1, 1], vec![a]).unwrap();
    assert_eq!(truncation_inequality_check(&c, 1, eps * eps), Some(true));
    assert_eq!(truncation_inequality_check(&c, 0, 0.0), Some(true));
    assert_eq!(hodge_numbers(&c).partial_sums(1, 0.0), Some((0, 0)));
    assert_eq!(hodge_numbers(&c).partial_sums(0, 1.0), Some((0, 1)));
    assert_eq!(random_complex(&[3, 1], Some(&[0, 0]), 0).unwrap_err(), HodgeError::InfeasibleDims);
}
