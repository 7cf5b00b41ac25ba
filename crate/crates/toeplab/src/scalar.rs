use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use rustfft::FftNum;

/// Real floating-point type the numeric kernels are generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + FftNum + Default + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable")
    }

    /// Conversion to `f64`.
    fn to_f64_lossless(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
