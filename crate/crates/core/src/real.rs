//! Scalar abstraction for the numerical core.
//!
//! All physics and fitting routines are generic over [`Real`] so the same
//! code runs in `f32` or `f64`. The crate root exports concrete `f64`
//! aliases for the common types; `f64` is what the CLI and the file formats
//! use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the numerical core.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Widening (for `f32`) or identity (for `f64`) conversion to `f64`.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    fn as_f64(self) -> f64 {
        self
    }
}
