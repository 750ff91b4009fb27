use crate::scalar::Real;

use super::DenseMatrix;

/// Singular values below this fraction of the largest count as zero.
pub const KERNEL_RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) and right singular vectors (as columns) via one-sided Jacobi.
pub fn right_singular<T: Real>(m: &DenseMatrix<T>) -> (Vec<T>, DenseMatrix<T>) {
    let n = m.cols();
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = super::dot(&cols[p], &cols[p]);
                let beta = super::dot(&cols[q], &cols[q]);
                let gamma = super::dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(T, usize)> = cols.iter().enumerate().map(|(j, c)| (super::norm2(c), j)).collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite singular values").then(a.1.cmp(&b.1)));
    let sigma = order.iter().map(|&(s, _)| s).collect();
    let vs: Vec<Vec<T>> = order.iter().map(|&(_, j)| v[j].clone()).collect();
    (sigma, DenseMatrix::from_columns(n, &vs))
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    for (a, b) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Orthonormal splitting pair `(V, W)` with `W` spanning the numerical kernel of `e`.
pub fn kernel_basis<T: Real>(e: &DenseMatrix<T>) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = e.cols();
    let (sigma, vecs) = right_singular(e);
    let smax = sigma.first().copied().unwrap_or(T::zero());
    let cut = T::lit(KERNEL_RANK_TOL) * smax;
    let rank = sigma.iter().filter(|&&s| smax > T::zero() && s > cut).count();
    (vecs.block(0, n, 0, rank), vecs.block(0, n, rank, n))
}
