use crate::error::{Error, Result};
use crate::scalar::Real;

use super::DenseMatrix;

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Clone, Debug)]
pub struct LuFactor<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> LuFactor<T> {
    pub fn new(m: &DenseMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let scale = m.max_abs();
        let threshold = T::lit(PIVOT_TOL) * scale;
        let mut lu = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= threshold || best == T::zero() {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: best.to_f64_lossy(),
                    threshold: threshold.to_f64_lossy(),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::Dimension(format!(
                "rhs of length {} for {n}x{n} system",
                rhs.len()
            )));
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `M X = R` column by column.
    pub fn solve_matrix(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if rhs.rows() != self.n {
            return Err(Error::Dimension("solve_matrix row mismatch".into()));
        }
        let cols: Result<Vec<Vec<T>>> = (0..rhs.cols())
            .map(|j| self.solve(&rhs.column(j)))
            .collect();
        Ok(DenseMatrix::from_columns(self.n, &cols?))
    }

    /// `ln |det M|`, safe against overflow for large dimensions.
    pub fn log_abs_det(&self) -> T {
        (0..self.n).map(|i| self.lu[i * self.n + i].abs().ln()).sum()
    }

    pub fn determinant(&self) -> T {
        (0..self.n).fold(self.sign, |d, i| d * self.lu[i * self.n + i])
    }
}

/// Solves `M x = rhs` with a fresh factorization.
pub fn factor_solve<T: Real>(m: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    LuFactor::new(m)?.solve(rhs)
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[Vec<f64>]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_diagonal_permutation() {
        assert_eq!(factor_solve(&DenseMatrix::identity(2), &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(factor_solve(&m(&[vec![2.0, 0.0], vec![0.0, 4.0]]), &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(factor_solve(&m(&[vec![0.0, 1.0], vec![1.0, 0.0]]), &[5.0, 7.0]).unwrap(), vec![7.0, 5.0]);
    }

    #[test]
    fn singular_is_reported() {
        let s = m(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(factor_solve(&s, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
        assert!(matches!(factor_solve(&DenseMatrix::<f64>::zeros(2, 2), &[0.0, 0.0]), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn determinant_sign() {
        let p = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_relative_eq!(LuFactor::new(&p).unwrap().determinant(), -1.0);
        let a = m(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_relative_eq!(LuFactor::new(&a).unwrap().determinant(), -2.0, epsilon = 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let a = DenseMatrix::<f32>::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = factor_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-6 && (x[1] - 7.0 / 11.0).abs() < 1e-6);
    }
}
