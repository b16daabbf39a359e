use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::Serialize;

/// Floating-point scalar used for amplitudes and probabilities.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + Serialize + 'static
{
    /// Absolute tolerance for amplitude and probability comparisons.
    fn tolerance() -> Self;

    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to every Real")
    }

    fn count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize converts to every Real")
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}
