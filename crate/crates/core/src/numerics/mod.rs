//! Dense linear algebra kernels.
//!
//! Everything here works on small dense matrices (a few hundred rows at
//! most) and is written for clarity over blocking or SIMD.

mod eigen;
mod lu;
mod matrix;
mod svd;

pub use eigen::{eigenvalues, lambda_min_pair, lambda_min_sym, spectral_radius, symmetric_eigenvalues};
pub use lu::{factor_solve, LuFactor};
pub use matrix::DenseMatrix;
pub use svd::{kernel_basis, right_singular, KERNEL_RANK_TOL};

use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scaled<T: Real>(alpha: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&x| alpha * x).collect()
}
