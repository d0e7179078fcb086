//! Relative-entropy machinery for one-dimensional scalar conservation laws
//! with strictly convex flux.
//!
//! The crate provides, for the equation `u_t + A(u)_x = 0`:
//!
//! - flux/entropy models with the relative entropy `eta(a|b)`, relative
//!   entropy flux `q(a;b)`, shock dissipation, and the shift velocity
//!   `V_eps` ([`flux_entropy`]);
//! - classical solutions of nondecreasing Lipschitz data by the method of
//!   characteristics ([`classical`]);
//! - exact piecewise-constant weak solutions by wavefront tracking,
//!   together with entropy-inequality residuals ([`front_tracking`]);
//! - Lipschitz shift paths that follow the Filippov differential inclusion
//!   `h' = V_eps(u(h, t), v1(h, t), v2(h, t))` with certified dissipation
//!   ([`shift`]);
//! - approximation by Lipschitz-with-downward-jumps functions and their
//!   monotone layer decomposition ([`liwas`]);
//! - the gluing pipeline that assembles an entropy-certified approximation
//!   `psi` of a weak solution at a target time ([`pipeline`]).
//!
//! Everything is generic over the floating-point scalar through
//! [`scalar::Real`]; the `*64` aliases at the crate root fix `f64`, which
//! is what the shipped tolerances are calibrated for.

pub mod classical;
pub mod error;
pub mod flux_entropy;
pub mod front_tracking;
pub mod liwas;
pub mod piecewise;
pub mod pipeline;
pub mod quad;
pub mod scalar;
pub mod shift;

pub use classical::ClassicalSolution;
pub use error::{Error, Result};
pub use flux_entropy::{DerivedConstants, FluxEntropyModel, SmoothTriple};
pub use front_tracking::{FrontSolution, TentTestFn, Wave};
pub use liwas::LiwasFn;
pub use piecewise::{MonotoneLipschitzFn, SampleGrid};
pub use pipeline::PsiResult;
pub use scalar::Real;
pub use shift::ShiftPath;

/// `f64` specialization of [`FluxEntropyModel`].
pub type Model64 = FluxEntropyModel<f64>;
/// `f64` specialization of [`DerivedConstants`].
pub type Constants64 = DerivedConstants<f64>;
/// `f64` specialization of [`MonotoneLipschitzFn`].
pub type Monotone64 = MonotoneLipschitzFn<f64>;
/// `f64` specialization of [`ClassicalSolution`].
pub type Classical64 = ClassicalSolution<f64>;
/// `f64` specialization of [`FrontSolution`].
pub type Fronts64 = FrontSolution<f64>;
/// `f64` specialization of [`ShiftPath`].
pub type ShiftPath64 = ShiftPath<f64>;
/// `f64` specialization of [`LiwasFn`].
pub type Liwas64 = LiwasFn<f64>;
/// `f64` specialization of [`PsiResult`].
pub type Psi64 = PsiResult<f64>;
