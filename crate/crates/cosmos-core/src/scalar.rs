//! Scalar abstraction: every kernel in this crate is written once, generic
//! over the floating-point element type.

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point element type of all dense kernels: `f32` or `f64`.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant (hyperparameters, tolerances).
    fn from_f64_const(x: f64) -> Self {
        Self::from(x).expect("f64 constant not representable in scalar type")
    }

    /// Conversion from a dimension count ("sqrt(m)" style factors).
    fn from_dim(n: usize) -> Self {
        Self::from(n).expect("dimension not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
