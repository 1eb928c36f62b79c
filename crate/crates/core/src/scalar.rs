//! The floating-point scalar the whole crate is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type: `f32` or `f64`.
///
/// All matrix kernels work over `Complex<R>`. Default tolerances are scaled
/// to the precision of the type, so the same algorithm can be exercised at
/// single precision for sanity checks while `f64` carries the accuracy
/// contracts.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + std::fmt::LowerExp + Send + Sync + 'static
{
    /// Relative PSD slack used by [`crate::Tolerances::default`].
    const DEFAULT_PSD_TOL: f64;
    /// Relative equality slack.
    const DEFAULT_EQ_TOL: f64;
    /// Relative singular-value cutoff.
    const DEFAULT_RANK_TOL: f64;

    /// Converts an `f64` literal. Panics only for values that do not fit,
    /// which never happens for the constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEFAULT_PSD_TOL: f64 = 1e-8;
    const DEFAULT_EQ_TOL: f64 = 1e-8;
    const DEFAULT_RANK_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const DEFAULT_PSD_TOL: f64 = 1e-3;
    const DEFAULT_EQ_TOL: f64 = 1e-3;
    const DEFAULT_RANK_TOL: f64 = 1e-5;
}

/// Shorthand for the complex scalar over `R`.
pub type C<R> = Complex<R>;

#[inline]
pub(crate) fn czero<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::zero())
}

#[inline]
pub(crate) fn cone<R: Real>() -> C<R> {
    Complex::new(R::one(), R::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn unit_phase<R: Real>(theta: R) -> C<R> {
    Complex::new(theta.cos(), theta.sin())
}
