use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating-point scalar used by the solvers and bound evaluators.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    fn of_u64(x: u64) -> Self {
        Self::from_u64(x).expect("u64 is representable in every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Solver tolerance floor for this precision.
    fn default_tolerance() -> Self;
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        2e-5
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-10
    }
}

/// Ordered field with exact floor/ceil, so exponent bookkeeping (⌊q⌋, {q},
/// ⌈p⌉) can run over rationals as well as floats.
pub trait Real: Num + PartialOrd + Copy + Debug + Display + FromPrimitive {
    fn floor(self) -> Self;
    fn ceil(self) -> Self;

    fn frac(self) -> Self {
        self - self.floor()
    }

    fn int(x: i64) -> Self {
        <Self as FromPrimitive>::from_i64(x).expect("small integers are representable")
    }

    fn to_i64_floor(self) -> i64;
}

impl Real for f32 {
    fn floor(self) -> Self {
        f32::floor(self)
    }
    fn ceil(self) -> Self {
        f32::ceil(self)
    }
    fn to_i64_floor(self) -> i64 {
        f32::floor(self) as i64
    }
}

impl Real for f64 {
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn ceil(self) -> Self {
        f64::ceil(self)
    }
    fn to_i64_floor(self) -> i64 {
        f64::floor(self) as i64
    }
}

impl Real for Ratio<i64> {
    fn floor(self) -> Self {
        Ratio::floor(&self)
    }
    fn ceil(self) -> Self {
        Ratio::ceil(&self)
    }
    fn to_i64_floor(self) -> i64 {
        Ratio::floor(&self).to_integer()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_floor_and_frac_are_exact() {
        let q = Ratio::new(7i64, 2);
        assert_eq!(Real::floor(q), Ratio::from_integer(3));
        assert_eq!(q.frac(), Ratio::new(1, 2));
        assert_eq!(Real::ceil(Ratio::new(-7i64, 2)), Ratio::from_integer(-3));
    }

    #[test]
    fn float_frac() {
        assert_eq!(2.75f64.frac(), 0.75);
        assert_eq!(Real::to_i64_floor(-0.5f64), -1);
    }
}
