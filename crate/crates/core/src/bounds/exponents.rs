use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// α(p), h(d), h*(p) and b(q) evaluated together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents<R> {
    pub alpha: R,
    pub h: R,
    pub h_star: R,
    pub b: R,
}

/// 1 for p < 3, otherwise 1 − p/(⌊p⌋ + 1).
pub fn alpha<R: Real>(p: R) -> R {
    if p < R::int(3) {
        R::one()
    } else {
        R::one() - p / (p.floor() + R::one())
    }
}

/// h(d) = 1 + d(d − 1)/2 for d ≥ 1 and h(0) = 0.
pub fn h(d: u64) -> u64 {
    if d == 0 {
        0
    } else {
        1 + d * (d - 1) / 2
    }
}

/// h*(p) = h(⌈p⌉ − 1) for p > 0.
pub fn h_star<R: Real>(p: R) -> Result<u64> {
    if !(p > R::zero()) {
        return Err(Error::DomainError(format!("h* needs p > 0, got {p}")));
    }
    Ok(h((p.ceil().to_i64_floor() - 1) as u64))
}

/// b(q) = q on [0, 3] ∪ {4}, otherwise max{d ∈ ℕ : h(d − 1) ≤ q}.
pub fn b<R: Real>(q: R) -> Result<R> {
    if q < R::zero() {
        return Err(Error::DomainError(format!("b needs q ≥ 0, got {q}")));
    }
    if q <= R::int(3) || q == R::int(4) {
        return Ok(q);
    }
    let mut d = 1u64;
    while R::int(h(d) as i64) <= q {
        d += 1;
    }
    Ok(R::int(d as i64))
}

pub fn exponent_functions<R: Real>(p: R, q: R, d: u64) -> Result<Exponents<R>> {
    if !(p > R::one()) {
        return Err(Error::DomainError(format!("p = {p} must exceed 1")));
    }
    Ok(Exponents {
        alpha: alpha(p),
        h: R::int(h(d) as i64),
        h_star: R::int(h_star(p)? as i64),
        b: b(q)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn table_values() {
        assert_eq!(alpha(2.0), 1.0);
        assert_eq!(alpha(Ratio::from_integer(3i64)), Ratio::new(1, 4));
        assert_eq!(h(3), 4);
        assert_eq!(h(4), 7);
        assert_eq!(h(0), 0);
        assert_eq!(b(Ratio::new(7i64, 2)).unwrap(), Ratio::from_integer(3));
        assert_eq!(b(5.0).unwrap(), 4.0);
        assert_eq!(b(4.0).unwrap(), 4.0);
        assert_eq!(b(2.5).unwrap(), 2.5);
    }

    #[test]
    fn h_star_steps() {
        assert_eq!(h_star(2.0).unwrap(), 1);
        assert_eq!(h_star(2.5).unwrap(), 2);
        assert_eq!(h_star(3.5).unwrap(), 4);
        assert!(h_star(0.0).is_err());
    }

    #[test]
    fn rational_and_float_agree() {
        for (num, den) in [(3i64, 2i64), (5, 2), (7, 2), (9, 2), (11, 3), (13, 2)] {
            let r = exponent_functions(Ratio::new(num, den), Ratio::new(num + 1, den), 4).unwrap();
            let f = exponent_functions(num as f64 / den as f64, (num + 1) as f64 / den as f64, 4).unwrap();
            assert!((*r.alpha.numer() as f64 / *r.alpha.denom() as f64 - f.alpha).abs() < 1e-12);
            assert_eq!(*r.h_star.numer() as f64, f.h_star);
            assert!((*r.b.numer() as f64 / *r.b.denom() as f64 - f.b).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(exponent_functions(1.0, 2.0, 1).is_err());
        assert!(b(-1.0).is_err());
    }
}
