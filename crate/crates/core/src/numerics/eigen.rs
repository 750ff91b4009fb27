use crate::error::{Error, Result};
use crate::scalar::Real;

use super::DenseMatrix;

/// Relative asymmetry accepted by the symmetric routines.
pub const SYMMETRY_TOL: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 100;

fn check_symmetric<T: Real>(m: &DenseMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenproblem needs a square matrix".into()));
    }
    let asym = m.asymmetry();
    if asym > T::lit(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(asym.to_f64_lossy()));
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    check_symmetric(m)?;
    let n = m.rows();
    let mut a = m.symmetric_part().to_rows();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[i][i] * a[i][i];
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min_sym<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    if m.rows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    Ok(symmetric_eigenvalues(m)?[0])
}

fn cholesky<T: Real>(b: &DenseMatrix<T>) -> Result<Vec<Vec<T>>> {
    let n = b.rows();
    let mut l = vec![vec![T::zero(); n]; n];
    let tol = T::epsilon() * b.max_abs() * T::from_usize_lossy(n.max(1));
    for j in 0..n {
        let mut d = b[(j, j)];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= tol {
            return Err(Error::NotSpd(j));
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in (j + 1)..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    Ok(l)
}

/// Smallest `mu` with `A v = mu B v`, for symmetric `A` and symmetric positive definite `B`.
pub fn lambda_min_pair<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<T> {
    check_symmetric(a)?;
    check_symmetric(b)?;
    if a.rows() != b.rows() {
        return Err(Error::Dimension("pencil size mismatch".into()));
    }
    let n = a.rows();
    let l = cholesky(b)?;
    // Y = L^{-1} A, then C = L^{-1} Yᵀ = L^{-1} A L^{-T}.
    let forward = |col: Vec<T>| -> Vec<T> {
        let mut y = col;
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        y
    };
    let y_cols: Vec<Vec<T>> = (0..n).map(|j| forward(a.column(j))).collect();
    let y = DenseMatrix::from_columns(n, &y_cols);
    let c_cols: Vec<Vec<T>> = (0..n).map(|j| forward(y.row(j).to_vec())).collect();
    let c = DenseMatrix::from_columns(n, &c_cols).symmetric_part();
    lambda_min_sym(&c)
}

/// Eigenvalues `(re, im)` of a general square matrix.
pub fn eigenvalues<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<(T, T)>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.to_rows();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(T::zero(), T::max))
}

fn balance<T: Real>(a: &mut [Vec<T>]) {
    let n = a.len();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let g = T::one() / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity).
fn hessenberg<T: Real>(a: &mut [Vec<T>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let alpha_sq: T = ((k + 1)..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq == T::zero() {
            continue;
        }
        let x0 = a[k + 1][k];
        let alpha = if x0 >= T::zero() { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v: Vec<T> = ((k + 1)..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm_sq: T = v.iter().map(|&x| x * x).sum();
        if vnorm_sq == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        // A <- H A
        for j in 0..n {
            let s: T = v.iter().enumerate().map(|(idx, &vi)| vi * a[k + 1 + idx][j]).sum();
            let f = two * s / vnorm_sq;
            for (idx, &vi) in v.iter().enumerate() {
                a[k + 1 + idx][j] -= f * vi;
            }
        }
        // A <- A H
        for row in a.iter_mut() {
            let s: T = v.iter().enumerate().map(|(idx, &vi)| vi * row[k + 1 + idx]).sum();
            let f = two * s / vnorm_sq;
            for (idx, &vi) in v.iter().enumerate() {
                row[k + 1 + idx] -= f * vi;
            }
        }
        for i in (k + 2)..n {
            a[i][k] = T::zero();
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
fn hqr<T: Real>(a: &mut [Vec<T>]) -> Result<Vec<(T, T)>> {
    let n = a.len();
    let mut wr = vec![T::zero(); n];
    let mut wi = vec![T::zero(); n];
    let eps = T::epsilon();
    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let half = T::lit(0.5);
    let mut nn = n as isize - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 1 {
                let lu = l as usize;
                let mut s = a[lu - 1][lu - 1].abs() + a[lu][lu].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[lu][lu - 1].abs() <= eps * s {
                    a[lu][lu - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            let nu = nn as usize;
            x = a[nu][nu];
            if l == nn {
                wr[nu] = x + t;
                wi[nu] = T::zero();
                nn -= 1;
                break;
            }
            y = a[nu - 1][nu - 1];
            w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nn - 1 {
                p = half * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + if p >= T::zero() { z } else { -z };
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != T::zero() {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = T::zero();
                    wi[nu] = T::zero();
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its >= 60 * n.max(1) {
                return Err(Error::NoConvergence);
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            while m >= l {
                let mu = m as usize;
                z = a[mu][mu];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[mu + 1][mu] + a[mu][mu + 1];
                q = a[mu + 1][mu + 1] - z - r - s;
                r = a[mu + 2][mu + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[mu][mu - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[mu - 1][mu - 1].abs() + z.abs() + a[mu + 1][mu + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in (mu + 2)..=nu {
                a[i][i - 2] = T::zero();
                if i != mu + 2 {
                    a[i][i - 3] = T::zero();
                }
            }
            let mut k = mu;
            while k + 1 <= nu {
                if k != mu {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = T::zero();
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let norm = (p * p + q * q + r * r).sqrt();
                let s = if p >= T::zero() { norm } else { -norm };
                if s != T::zero() {
                    if k == mu {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l as usize) {
                        p = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k + 1] -= p * q;
                        row[k] -= p;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}
