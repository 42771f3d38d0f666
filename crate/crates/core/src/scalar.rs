use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used for traversal costs, distances, and world
/// coordinates. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` value into the scalar type, panicking on inputs the
/// target type cannot represent (never the case for finite desk-scale data
/// or infinities).
pub(crate) fn cast<S: Real>(v: f64) -> S {
    S::from(v).expect("f64 value representable in scalar type")
}
