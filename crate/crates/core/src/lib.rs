//! Numerics for Bergman kernels and holomorphic Morse inequalities of line
//! bundles whose curvature degenerates along a foliation.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation on immutable inputs:
//!
//! - [`hermitian`]: relative eigenvalues of a curvature form against a
//!   background metric, signature classes `X(q)` and the relative determinant.
//! - [`forms`]: exact algebra of polynomial-times-Gaussian `(0,q)`-forms on
//!   `C^n` under a quadratic weight, the model Bergman kernel, a Galerkin
//!   oracle for it, and cutoff energies of the model test form.
//! - [`localize`]: anisotropic rescaling of local weights and metrics and the
//!   convergence diagnostics that go with it.
//! - [`torus`]: products of elliptic curves where cohomology, Morse integrals
//!   and Bergman constants are known exactly, plus a theta-series oracle.
//! - [`hodge`]: finite cochain complexes and truncated Hodge numbers.
#![no_std]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

mod linalg;
pub mod poly;
pub mod quad;

pub mod forms;
pub mod hermitian;
pub mod hodge;
pub mod localize;
pub mod torus;

pub use num_complex::Complex64;

/// Largest complex dimension supported by the fixed-width monomial keys.
pub const MAX_DIM: usize = 8;
