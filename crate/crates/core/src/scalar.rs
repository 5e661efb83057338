//! Scalar abstraction for objective arithmetic.
//!
//! Timetables are integer minutes. Penalties mix integers with the
//! early-arrival weight, so they are evaluated in a scalar `S` that is
//! either a float (`f32`/`f64`) or an exact rational (`Rational64`).

use std::fmt::Debug;
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, ToPrimitive};

use crate::model::Minutes;

/// Numeric type usable for penalty and objective values.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Sum + Debug + Send + Sync + 'static
{
    fn from_minutes(m: Minutes) -> Self {
        Self::from_i64(m).expect("minute value representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `numerator / denominator` computed in this scalar type.
    fn ratio(numerator: i64, denominator: i64) -> Self {
        Self::from_i64(numerator).expect("representable") / Self::from_i64(denominator).expect("representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Rational64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let r = <Rational64 as Scalar>::ratio(3, 10);
        assert_eq!(r, Rational64::new(3, 10));
        assert_eq!(<f64 as Scalar>::ratio(3, 10), 0.3);
    }
}
