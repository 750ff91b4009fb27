use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kernel_basis, lambda_min_sym, DenseMatrix, LuFactor};
use crate::scalar::Real;

use super::input::InputSignal;

/// Relative tolerance for the structural symmetry checks.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Relative tolerance on the algebraic residual of the initial value.
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Number of random sample points for the pencil regularity check.
pub const PENCIL_SAMPLES: usize = 5;
pub const DEFAULT_PENCIL_SEED: u64 = 0x5eed_2024;

/// Linear port-Hamiltonian DAE `E x' = (J - R) Q x + B u`, `y = Bᵀ Q x`.
#[derive(Clone, Debug)]
pub struct PhDaeSystem<T> {
    pub e: DenseMatrix<T>,
    pub j: DenseMatrix<T>,
    pub r: DenseMatrix<T>,
    pub q: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub input: InputSignal,
    pub x0: Vec<T>,
    pub horizon: T,
}

impl<T: Real> PhDaeSystem<T> {
    /// Checks dimensions only; structural properties are reported by [`validate_structure`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e: DenseMatrix<T>,
        j: DenseMatrix<T>,
        r: DenseMatrix<T>,
        q: DenseMatrix<T>,
        b: DenseMatrix<T>,
        input: InputSignal,
        x0: Vec<T>,
        horizon: T,
    ) -> Result<Self> {
        let n = e.rows();
        for (name, m) in [("E", &e), ("J", &j), ("R", &r), ("Q", &q)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if b.rows() != n {
            return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.rows())));
        }
        if b.cols() != 1 {
            return Err(Error::Dimension(format!(
                "only single-input systems are supported, B has {} columns",
                b.cols()
            )));
        }
        if x0.len() != n {
            return Err(Error::Dimension(format!("x0 has length {}, expected {n}", x0.len())));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("x0"));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidParameter("horizon must be positive and finite".into()));
        }
        input.validate()?;
        Ok(Self {
            e,
            j,
            r,
            q,
            b,
            input,
            x0,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.e.rows()
    }

    /// `(J - R) Q`.
    pub fn drift(&self) -> DenseMatrix<T> {
        self.j
            .sub(&self.r)
            .and_then(|a| a.matmul(&self.q))
            .expect("dimensions checked on construction")
    }

    pub fn input_at(&self, t: T) -> T {
        T::lit(self.input.eval(t.to_f64_lossy()))
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> PhDaeSystem<U> {
        PhDaeSystem {
            e: self.e.cast(),
            j: self.j.cast(),
            r: self.r.cast(),
            q: self.q.cast(),
            b: self.b.cast(),
            input: self.input.clone(),
            x0: self.x0.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
            horizon: U::lit(self.horizon.to_f64_lossy()),
        }
    }

    /// Same system with `x0` replaced by the consistent state sharing its differential coordinates.
    pub fn with_consistent_x0(&self) -> Result<Self> {
        let red = super::reduce(self)?;
        let x1 = red.project_initial(&self.x0)?;
        let mut out = self.clone();
        out.x0 = red.full_state(&x1, T::zero());
        Ok(out)
    }
}

/// One structural check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_structure`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `Err(InvalidModel)` naming every failed check.
    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let msg = self
            .failures()
            .iter()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidModel(msg))
    }
}

pub const CHECK_RANK: &str = "rank_deficient_e";
pub const CHECK_Q: &str = "q_nonsingular";
pub const CHECK_EQ: &str = "etq_symmetric_positive";
pub const CHECK_J: &str = "j_skew";
pub const CHECK_R: &str = "r_psd";
pub const CHECK_PENCIL: &str = "pencil_regular";
pub const CHECK_INDEX: &str = "index_one";
pub const CHECK_X0: &str = "x0_consistent";

/// Structural checks on a system, with the default pencil seed.
pub fn validate_structure<T: Real>(sys: &PhDaeSystem<T>) -> ValidationReport {
    validate_structure_seeded(sys, DEFAULT_PENCIL_SEED)
}

pub fn validate_structure_seeded<T: Real>(sys: &PhDaeSystem<T>, seed: u64) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };
    let n = sys.dim();
    let tol = T::lit(STRUCTURE_TOL);

    let (v, w) = kernel_basis(&sys.e);
    let rank = v.cols();
    push(
        CHECK_RANK,
        rank > 0,
        format!("rank E = {rank} of {n}, kernel dimension {}", w.cols()),
    );

    let q_lu = LuFactor::new(&sys.q);
    push(
        CHECK_Q,
        q_lu.is_ok(),
        match &q_lu {
            Ok(_) => "Q nonsingular".into(),
            Err(e) => e.to_string(),
        },
    );

    let etq = sys.e.transpose().matmul(&sys.q).expect("square");
    let asym = etq.asymmetry();
    let e11 = v.transpose().matmul(&etq).and_then(|m| m.matmul(&v)).expect("shapes");
    let eq_detail;
    let eq_ok = if asym > tol {
        eq_detail = format!("EᵀQ asymmetry {:e}", asym.to_f64_lossy());
        false
    } else if rank == 0 {
        eq_detail = "no differential part".into();
        false
    } else {
        match lambda_min_sym(&e11.symmetric_part()) {
            Ok(lmin) => {
                let scale = e11.max_abs();
                eq_detail = format!("λmin(VᵀEᵀQV) = {:e}", lmin.to_f64_lossy());
                lmin > T::lit(1e-12) * scale
            }
            Err(e) => {
                eq_detail = e.to_string();
                false
            }
        }
    };
    push(CHECK_EQ, eq_ok, eq_detail);

    let skew = sys.j.add(&sys.j.transpose()).expect("square");
    let jscale = sys.j.max_abs();
    let skew_err = if jscale == T::zero() { T::zero() } else { skew.max_abs() / jscale };
    push(
        CHECK_J,
        skew_err <= tol,
        format!("max|J + Jᵀ| / max|J| = {:e}", skew_err.to_f64_lossy()),
    );

    let r_asym = sys.r.asymmetry();
    let r_detail;
    let r_ok = if r_asym > tol {
        r_detail = format!("R asymmetry {:e}", r_asym.to_f64_lossy());
        false
    } else if n == 0 {
        r_detail = "empty".into();
        true
    } else {
        match lambda_min_sym(&sys.r.symmetric_part()) {
            Ok(lmin) => {
                r_detail = format!("λmin(R) = {:e}", lmin.to_f64_lossy());
                lmin >= -tol * sys.r.max_abs().max(T::one())
            }
            Err(e) => {
                r_detail = e.to_string();
                false
            }
        }
    };
    push(CHECK_R, r_ok, r_detail);

    let (regular, pencil_detail) = pencil_regular(sys, seed);
    push(CHECK_PENCIL, regular, pencil_detail);

    match super::reduce::reduce_with_basis(sys, v, w) {
        Ok(red) => {
            push(CHECK_INDEX, true, "algebraic block A22 invertible".into());
            let (res, scale) = red.consistency_residual(&sys.x0);
            let ok = res <= T::lit(CONSISTENCY_TOL) * scale.max(T::one());
            push(
                CHECK_X0,
                ok,
                format!("algebraic residual at t = 0: {:e}", res.to_f64_lossy()),
            );
        }
        Err(e) => {
            push(CHECK_INDEX, false, e.to_string());
            push(CHECK_X0, false, "not evaluated, reduction failed".into());
        }
    }

    ValidationReport { checks }
}

/// `det(sE - (J-R)Q) ≠ 0` at some random `s`: every LU pivot above `1e-12` of the largest entry.
fn pencil_regular<T: Real>(sys: &PhDaeSystem<T>, seed: u64) -> (bool, String) {
    let a = sys.drift();
    let n = sys.dim();
    if n == 0 {
        return (true, "empty system".into());
    }
    let e_scale = sys.e.max_abs();
    let a_scale = a.max_abs();
    let unit = if e_scale > T::zero() && a_scale > T::zero() {
        a_scale / e_scale
    } else {
        T::one()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..PENCIL_SAMPLES {
        let s = T::lit(rng.gen_range(0.1..10.0)) * unit;
        let m = sys.e.scale(s).sub(&a).expect("square");
        if let Ok(lu) = LuFactor::new(&m) {
            let log10_det = lu.log_abs_det().to_f64_lossy() / std::f64::consts::LN_10;
            return (
                true,
                format!("s = {:e}: log10|det| = {log10_det:.3}", s.to_f64_lossy()),
            );
        }
    }
    (false, format!("sE - (J-R)Q singular at all {PENCIL_SAMPLES} samples"))
}
