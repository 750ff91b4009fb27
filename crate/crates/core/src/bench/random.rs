use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{InputSignal, PhDaeSystem};
use crate::numerics::{self, DenseMatrix};
use crate::scalar::Real;

/// Random orthogonal matrix by Gram-Schmidt on Gaussian-like columns.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for c in &cols {
            let p = numerics::dot(c, &v);
            numerics::axpy(-p, c, &mut v);
        }
        let nv = numerics::norm2(&v);
        if nv > 1e-3 {
            cols.push(numerics::scaled(1.0 / nv, &v));
        }
    }
    DenseMatrix::from_columns(n, &cols)
}

/// Random dissipative index-1 system with `r` differential and `m` algebraic states on `[0, 1]`.
///
/// `E = P diag(d, 0) Pᵀ` for a random orthogonal `P`, `J` skew, `R` positive definite, `Q = I`.
/// The initial value is made consistent.
pub fn random_system<T: Real>(seed: u64, r: usize, m: usize) -> PhDaeSystem<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = r + m;
    let p = random_orthogonal(&mut rng, n);
    let d: Vec<f64> = (0..n).map(|i| if i < r { rng.gen_range(0.5..2.0) } else { 0.0 }).collect();
    let e = p.matmul(&DenseMatrix::from_diag(&d)).and_then(|a| a.matmul(&p.transpose())).expect("square");
    let k = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let j = k.sub(&k.transpose()).expect("square");
    let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
    let r_mat = g
        .matmul(&g.transpose())
        .expect("square")
        .add(&DenseMatrix::identity(n).scale(0.1))
        .expect("square")
        .symmetric_part();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let input = InputSignal::SineBurst {
        amplitude: rng.gen_range(0.5..2.0),
        frequency: 1.0,
        cutoff: 0.5,
    };
    let sys = PhDaeSystem::new(
        e.symmetric_part(),
        j,
        r_mat,
        DenseMatrix::identity(n),
        DenseMatrix::column_vector(&b),
        input,
        x0,
        1.0,
    )
    .expect("dimensions agree");
    sys.with_consistent_x0().expect("random system reduces").cast()
}
