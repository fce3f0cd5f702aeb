//! Floating-point scalar abstraction for the numeric kernel.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Scalar type the models, controller, and integrator are generic over.
///
/// `f64` is the working precision for everything shipped in this crate;
/// `f32` is supported for consumers that trade accuracy for footprint.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + LowerExp + Default + 'static
{
    /// Lossless embedding of an `f64` constant (panics only if the target
    /// type cannot represent any nearby value, which cannot happen for
    /// IEEE floats).
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_embed() {
        assert_eq!(f64::c(0.25), 0.25);
        assert_eq!(f32::c(0.25), 0.25f32);
    }
}
