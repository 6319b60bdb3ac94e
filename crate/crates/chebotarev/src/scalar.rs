use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// Field element used by the evaluation routines: exact rationals or floats.
pub trait Scalar: Num + Signed + Clone + Debug + PartialOrd + Send + Sync {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(&BigInt::from(v), &BigInt::from(1))
    }

    fn to_f64(&self) -> f64;

    /// Slack allowed when checking identities such as Σ weights = 1.
    fn tolerance() -> Self;
}

impl Scalar for BigRational {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        BigRational::from_integer(0.into())
    }
}

impl Scalar for f64 {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
            .to_f32()
            .unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn tolerance() -> Self {
        1e-5
    }
}

/// Converts an exact rational into any scalar type.
pub fn cast<T: Scalar>(r: &BigRational) -> T {
    T::from_ratio(r.numer(), r.denom())
}
