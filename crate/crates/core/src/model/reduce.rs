use crate::error::{Error, Result};
use crate::numerics::{self, kernel_basis, lambda_min_sym, DenseMatrix, LuFactor};
use crate::scalar::Real;

use super::input::{InputSignal, Moments, Quadrature};
use super::system::PhDaeSystem;

/// Schur-reduced ODE `E11 x1' = -S x1 + F(t)` in the differential coordinates.
///
/// With the splitting pair `(V, W)`, the full state is recovered as
/// `x = V x1 + W x̂2` where `x̂2 = -A22⁻¹(A21 x1 + B2 u)`.
#[derive(Clone, Debug)]
pub struct ReducedSystem<T> {
    n: usize,
    r: usize,
    v: DenseMatrix<T>,
    w: DenseMatrix<T>,
    basis_lu: LuFactor<T>,
    e11: DenseMatrix<T>,
    a11: DenseMatrix<T>,
    a12: DenseMatrix<T>,
    a21: DenseMatrix<T>,
    a22: DenseMatrix<T>,
    b1: Vec<T>,
    b2: Vec<T>,
    s: DenseMatrix<T>,
    s_tilde: DenseMatrix<T>,
    alpha: T,
    f_vec: Vec<T>,
    a22inv_a21: DenseMatrix<T>,
    a22inv_b2: Vec<T>,
    q: DenseMatrix<T>,
    r_mat: DenseMatrix<T>,
    // g(x1, u) = x1ᵀ kxx x1 + u cxᵀ x1 + cu u²
    kxx: DenseMatrix<T>,
    cx: Vec<T>,
    cu: T,
    input: InputSignal,
    horizon: T,
    quadrature: Quadrature,
}

/// Reduces with the SVD splitting pair of `E`.
pub fn reduce<T: Real>(sys: &PhDaeSystem<T>) -> Result<ReducedSystem<T>> {
    let (v, w) = kernel_basis(&sys.e);
    reduce_with_basis(sys, v, w)
}

/// Reduces with a caller-supplied splitting pair (`E W = 0`, `(V, W)` nonsingular).
pub fn reduce_with_basis<T: Real>(
    sys: &PhDaeSystem<T>,
    v: DenseMatrix<T>,
    w: DenseMatrix<T>,
) -> Result<ReducedSystem<T>> {
    let n = sys.dim();
    let r = v.cols();
    if v.rows() != n || w.rows() != n || r + w.cols() != n {
        return Err(Error::Dimension("splitting pair does not match the state dimension".into()));
    }
    if r == 0 {
        return Err(Error::InvalidModel("E vanishes, no differential variables".into()));
    }
    let ew = sys.e.matmul(&w)?;
    let tol = T::lit(1e-10) * sys.e.max_abs().max(T::min_positive_value()) * w.max_abs().max(T::one());
    if ew.max_abs() > tol {
        return Err(Error::InvalidModel("W does not span a subspace of ker E".into()));
    }
    let basis = v.hstack(&w)?;
    let basis_lu = LuFactor::new(&basis)
        .map_err(|_| Error::InvalidModel("splitting pair (V, W) is singular".into()))?;

    let qt = sys.q.transpose();
    let e11 = v.transpose().matmul(&qt)?.matmul(&sys.e)?.matmul(&v)?.symmetric_part();
    let e11_min = lambda_min_sym(&e11)?;
    if !(e11_min > T::lit(1e-12) * e11.max_abs()) {
        return Err(Error::InvalidModel("E11 is not positive definite".into()));
    }
    let a_full = basis.transpose().matmul(&qt)?.matmul(&sys.drift())?.matmul(&basis)?;
    let a11 = a_full.block(0, r, 0, r);
    let a12 = a_full.block(0, r, r, n);
    let a21 = a_full.block(r, n, 0, r);
    let a22 = a_full.block(r, n, r, n);
    let bt = basis.transpose().matmul(&qt)?.matmul(&sys.b)?.column(0);
    let b1 = bt[..r].to_vec();
    let b2 = bt[r..].to_vec();

    let a22_lu = LuFactor::new(&a22).map_err(|_| Error::IndexTooHigh)?;
    let a22inv_a21 = a22_lu.solve_matrix(&a21)?;
    let a22inv_b2 = a22_lu.solve(&b2)?;

    let s = a11.sub(&a12.matmul(&a22inv_a21)?)?.neg();
    let s_tilde = s.symmetric_part();
    let alpha = lambda_min_sym(&s_tilde)?;
    let f_vec = numerics::sub(&b1, &a12.mul_vec(&a22inv_b2));

    let px = v.sub(&w.matmul(&a22inv_a21)?)?;
    let pu: Vec<T> = w.mul_vec(&a22inv_b2).into_iter().map(|x| -x).collect();

    let m = qt.matmul(&sys.r)?.matmul(&sys.q)?;
    let bq = qt.mul_vec(&sys.b.column(0));
    let kxx = px.transpose().matmul(&m)?.matmul(&px)?.symmetric_part();
    let m_pu = m.mul_vec(&pu);
    let two = T::lit(2.0);
    let cx = numerics::sub(&numerics::scaled(two, &px.tr_mul_vec(&m_pu)), &px.tr_mul_vec(&bq));
    let cu = numerics::dot(&pu, &m_pu) - numerics::dot(&bq, &pu);

    Ok(ReducedSystem {
        n,
        r,
        v,
        w,
        basis_lu,
        e11,
        a11,
        a12,
        a21,
        a22,
        b1,
        b2,
        s,
        s_tilde,
        alpha,
        f_vec,
        a22inv_a21,
        a22inv_b2,
        q: sys.q.clone(),
        r_mat: sys.r.clone(),
        kxx,
        cx,
        cu,
        input: sys.input.clone(),
        horizon: sys.horizon,
        quadrature: Quadrature::default(),
    })
}

impl<T: Real> ReducedSystem<T> {
    /// Same reduction with a different interval quadrature rule.
    pub fn with_quadrature(mut self, rule: Quadrature) -> Self {
        self.quadrature = rule;
        self
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn full_dim(&self) -> usize {
        self.n
    }

    /// Number of differential variables.
    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn v(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn w(&self) -> &DenseMatrix<T> {
        &self.w
    }

    pub fn e11(&self) -> &DenseMatrix<T> {
        &self.e11
    }

    pub fn a11(&self) -> &DenseMatrix<T> {
        &self.a11
    }

    pub fn a12(&self) -> &DenseMatrix<T> {
        &self.a12
    }

    pub fn a21(&self) -> &DenseMatrix<T> {
        &self.a21
    }

    pub fn a22(&self) -> &DenseMatrix<T> {
        &self.a22
    }

    pub fn b1(&self) -> &[T] {
        &self.b1
    }

    pub fn b2(&self) -> &[T] {
        &self.b2
    }

    /// Schur complement `S = -(A11 - A12 A22⁻¹ A21)`.
    pub fn s(&self) -> &DenseMatrix<T> {
        &self.s
    }

    /// Symmetric part of `S`.
    pub fn s_tilde(&self) -> &DenseMatrix<T> {
        &self.s_tilde
    }

    /// `λmin(S̃)`.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Column `B1 - A12 A22⁻¹ B2`, so that `F(t) = f_vec u(t)`.
    pub fn forcing_vector(&self) -> &[T] {
        &self.f_vec
    }

    pub fn input(&self) -> &InputSignal {
        &self.input
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn u(&self, t: T) -> T {
        T::lit(self.input.eval(t.to_f64_lossy()))
    }

    /// `(∫u, ∫u²)` over `(a, b)` under the configured rule.
    pub fn moments(&self, a: T, b: T) -> (T, T) {
        let Moments { first, second } = self.input.moments(a.to_f64_lossy(), b.to_f64_lossy(), self.quadrature);
        (T::lit(first), T::lit(second))
    }

    /// Differential coordinates of a full state in the `(V, W)` basis.
    pub fn project_initial(&self, x0: &[T]) -> Result<Vec<T>> {
        if x0.len() != self.n {
            return Err(Error::Dimension("initial state length".into()));
        }
        let c = self.basis_lu.solve(x0)?;
        Ok(c[..self.r].to_vec())
    }

    /// Algebraic residual `A21 x1 + A22 x2 + B2 u(0)` of a full state and the scale it is measured against.
    pub fn consistency_residual(&self, x0: &[T]) -> (T, T) {
        let c = match self.basis_lu.solve(x0) {
            Ok(c) => c,
            Err(_) => return (T::infinity(), T::one()),
        };
        let (x1, x2) = c.split_at(self.r);
        let u0 = self.u(T::zero());
        let t1 = self.a21.mul_vec(x1);
        let t2 = self.a22.mul_vec(x2);
        let t3 = numerics::scaled(u0, &self.b2);
        let res: Vec<T> = (0..t1.len()).map(|i| t1[i] + t2[i] + t3[i]).collect();
        let scale = numerics::norm2(&t1) + numerics::norm2(&t2) + numerics::norm2(&t3);
        (numerics::norm2(&res), scale)
    }

    /// `x̂2 = -A22⁻¹(A21 x1 + B2 u(t))`.
    pub fn algebraic_reconstruction(&self, x1: &[T], t: T) -> Vec<T> {
        let u = self.u(t);
        self.a22inv_a21
            .mul_vec(x1)
            .iter()
            .zip(&self.a22inv_b2)
            .map(|(&a, &b)| -(a + b * u))
            .collect()
    }

    /// `V x1 + W x̂2`.
    pub fn full_state(&self, x1: &[T], t: T) -> Vec<T> {
        numerics::add(&self.v.mul_vec(x1), &self.w.mul_vec(&self.algebraic_reconstruction(x1, t)))
    }

    /// `F(t) = (B1 - A12 A22⁻¹ B2) u(t)`.
    pub fn forcing(&self, t: T) -> Vec<T> {
        numerics::scaled(self.u(t), &self.f_vec)
    }

    /// `H = ½ x1ᵀ E11 x1`.
    pub fn reduced_hamiltonian(&self, x1: &[T]) -> T {
        T::lit(0.5) * self.e11.quad_form(x1)
    }

    pub fn hamiltonian_grad(&self, x1: &[T]) -> Vec<T> {
        self.e11.mul_vec(x1)
    }

    /// Reduced output `ŷ = B1ᵀ x1 + B2ᵀ x̂2`.
    pub fn output(&self, x1: &[T], t: T) -> T {
        numerics::dot(&self.b1, x1) + numerics::dot(&self.b2, &self.algebraic_reconstruction(x1, t))
    }

    /// Power imbalance `g = -ŷ u + d̂` and its gradient in `x1`.
    pub fn power_imbalance(&self, t: T, x1: &[T]) -> (T, Vec<T>) {
        let u = self.u(t);
        let x = self.full_state(x1, t);
        let qx = self.q.mul_vec(&x);
        let d = self.r_mat.quad_form(&qx);
        let g = -self.output(x1, t) * u + d;
        let mut grad = numerics::scaled(T::lit(2.0), &self.kxx.mul_vec(x1));
        numerics::axpy(u, &self.cx, &mut grad);
        (g, grad)
    }

    /// `(∫ g(t, x1) dt, ∫ ∇g(t, x1) dt)` over `(a, b)` for a constant `x1`.
    pub fn imbalance_integral(&self, a: T, b: T, x1: &[T]) -> (T, Vec<T>) {
        let (m1, m2) = self.moments(a, b);
        self.imbalance_from_moments(b - a, m1, m2, x1)
    }

    pub(crate) fn imbalance_from_moments(&self, k: T, m1: T, m2: T, x1: &[T]) -> (T, Vec<T>) {
        let kx = self.kxx.mul_vec(x1);
        let g = k * numerics::dot(x1, &kx) + m1 * numerics::dot(&self.cx, x1) + self.cu * m2;
        let mut grad = numerics::scaled(T::lit(2.0) * k, &kx);
        numerics::axpy(m1, &self.cx, &mut grad);
        (g, grad)
    }
}
