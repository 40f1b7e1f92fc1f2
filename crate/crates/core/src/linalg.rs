use alloc::vec::Vec;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending with
/// eigenvectors in matching columns.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Inverse of the lower Cholesky factor of a positive-definite matrix, or
/// `None` when the factorization breaks down.
pub(crate) fn inverse_cholesky_factor(b: &CMatrix) -> Option<CMatrix> {
    let chol = hermitian_part(b).cholesky()?;
    let l = chol.l();
    let n = l.nrows();
    // the complex factorization takes square roots of negative pivots silently
    if (0..n).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return None;
    }
    l.solve_lower_triangular(&CMatrix::identity(n, n))
}

/// Generalized eigenproblem `A x = t B x` for Hermitian `A` and positive
/// definite `B`. Eigenvalues ascending; eigenvectors are `B`-orthonormal.
pub(crate) fn generalized_eigh(a: &CMatrix, b: &CMatrix) -> Option<(Vec<f64>, CMatrix)> {
    let linv = inverse_cholesky_factor(b)?;
    let reduced = &linv * a * linv.adjoint();
    let (values, y) = eigh(&reduced);
    Some((values, linv.adjoint() * y))
}

pub(crate) fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) })
}

pub(crate) fn determinant(m: &CMatrix) -> Complex64 {
    m.clone().determinant()
}
