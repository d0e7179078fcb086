//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same kernels run in `f32` or `f64`. The default tolerances shipped with
//! the crate (quadrature and root tolerances near 1e-10 .. 1e-12) are
//! calibrated for `f64`; `f32` users must loosen them.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solvers.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    /// Lifts an `f64` constant into the scalar type.
    ///
    /// Panics only if the type cannot represent ordinary finite constants,
    /// which no implementor of this trait does.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant must be representable")
    }

    /// Lossy view as `f64`, used for diagnostics and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
