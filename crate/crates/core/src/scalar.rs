//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Everything user-facing (model files,
/// CSV export, the CLI) works in `f64`; the generic path exists so the
/// kernels can be exercised in reduced precision as well.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only if the value is not representable.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Error function, evaluated in double precision.
    fn erf(self) -> Self {
        Self::lit(libm::erf(self.to_f64_lossy()))
    }

    /// Complementary error function, evaluated in double precision.
    fn erfc(self) -> Self {
        Self::lit(libm::erfc(self.to_f64_lossy()))
    }

    /// Key used to share factorizations between intervals of identical length.
    fn cache_key(self) -> u64 {
        self.to_f64_lossy().to_bits()
    }
}

impl Real for f32 {}
impl Real for f64 {}
