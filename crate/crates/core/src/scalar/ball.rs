//! Midpoint-radius enclosures of real numbers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};
use super::ScalarError;

/// Bits kept in the radius mantissa. Radii are always rounded up.
const RADIUS_BITS: u32 = 64;

/// A rigorous enclosure `[mid - rad, mid + rad]` of a real number.
///
/// Every operation rounds the midpoint to `prec` bits and folds the rounding
/// error into the radius, so the true value is never lost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

fn rad_up(x: Dyadic) -> Dyadic {
    x.round(RADIUS_BITS, Round::Up)
}

impl Ball {
    pub fn exact(mid: Dyadic, prec: u32) -> Self {
        Ball {
            mid,
            rad: Dyadic::zero(),
            prec,
        }
    }

    /// Builds a ball, rounding `mid` to `prec` bits and widening `rad` accordingly.
    pub fn new(mid: Dyadic, rad: Dyadic, prec: u32) -> Self {
        assert!(!rad.is_negative(), "negative radius");
        let rounded = mid.round(prec, Round::Nearest);
        let err = rounded.sub(&mid).abs();
        Ball {
            mid: rounded,
            rad: rad_up(rad.add(&err)),
            prec,
        }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Ball::new(Dyadic::from_int(v), Dyadic::zero(), prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let num = Dyadic::from_int(r.numer().clone());
        let den = Dyadic::from_int(r.denom().clone());
        let lo = num.div(&den, prec, Round::Down);
        let hi = num.div(&den, prec, Round::Up);
        if lo == hi {
            return Ball::exact(lo, prec);
        }
        Ball::from_endpoints(&lo, &hi, prec)
    }

    /// Smallest ball (up to rounding) containing `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "inverted endpoints");
        let mid = lo.add(hi).mul_pow2(-1);
        let rad = hi.sub(lo).mul_pow2(-1);
        Ball::new(mid, rad, prec)
    }

    /// Encloses a rational interval `[lo, hi]`.
    pub fn from_rational_endpoints(lo: &BigRational, hi: &BigRational, prec: u32) -> Self {
        let l = Dyadic::from_rational(lo, prec + 8, Round::Down);
        let h = Dyadic::from_rational(hi, prec + 8, Round::Up);
        Ball::from_endpoints(&l, &h, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.prec = prec;
        self
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.mid.sub(x).abs() <= self.rad
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        let d = self.mid.to_rational() - x;
        num_traits::Signed::abs(&d) <= self.rad.to_rational()
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.mid.sub(&other.mid).abs() <= self.rad.add(&other.rad)
    }

    /// Certified ordering; `None` when the enclosures cannot be separated.
    pub fn compare(&self, other: &Ball) -> Option<Ordering> {
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if self.lower() > other.upper() {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.mid == other.mid {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified `self <= other`.
    pub fn certainly_le(&self, other: &Ball) -> bool {
        self.upper() <= other.lower()
    }

    pub fn neg(&self) -> Ball {
        Ball {
            mid: self.mid.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Ball {
        if self.mid.abs() >= self.rad {
            Ball {
                mid: self.mid.abs(),
                rad: self.rad.clone(),
                prec: self.prec,
            }
        } else {
            let half = self.mid.abs().add(&self.rad).mul_pow2(-1);
            Ball {
                mid: half.clone(),
                rad: rad_up(half),
                prec: self.prec,
            }
        }
    }

    pub fn add(&self, other: &Ball) -> Ball {
        Ball::new(
            self.mid.add(&other.mid),
            self.rad.add(&other.rad),
            self.prec.max(other.prec),
        )
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let mid = self.mid.mul(&other.mid);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Ball::new(mid, rad_up(rad), self.prec.max(other.prec))
    }

    pub fn mul_pow2(&self, e: i64) -> Ball {
        Ball {
            mid: self.mid.mul_pow2(e),
            rad: self.rad.mul_pow2(e),
            prec: self.prec,
        }
    }

    /// `1 / self`; fails when the enclosure contains zero.
    pub fn recip(&self) -> Result<Ball, ScalarError> {
        if self.contains_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let m = &self.mid;
        let one = Dyadic::from_int(1);
        let q = one.div(m, self.prec, Round::Nearest);
        // |1/m - q| <= one ulp of q
        let ulp = Dyadic::pow2(q.magnitude().unwrap_or(0) - self.prec as i64 + 1);
        let mut rad = ulp;
        if !self.rad.is_zero() {
            let am = m.abs();
            let den = am.mul(&am.sub(&self.rad));
            rad = rad.add(&self.rad.div(&den, RADIUS_BITS, Round::Up));
        }
        Ok(Ball {
            mid: q,
            rad: rad_up(rad),
            prec: self.prec,
        })
    }

    pub fn div(&self, other: &Ball) -> Result<Ball, ScalarError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, mut e: u64) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::from_int(1, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Adds `[0, width]` to the enclosure (a one-sided truncation tail).
    pub fn add_tail(&self, width: &Dyadic) -> Ball {
        let half = width.mul_pow2(-1);
        Ball::new(self.mid.add(&half), self.rad.add(&half), self.prec)
    }

    /// Hull of two enclosures.
    pub fn union(&self, other: &Ball) -> Ball {
        let lo = self.lower().min(other.lower());
        let hi = self.upper().max(other.upper());
        Ball::from_endpoints(&lo, &hi, self.prec.max(other.prec))
    }

    pub fn mid_rational(&self) -> BigRational {
        self.mid.to_rational()
    }

    pub fn rad_rational(&self) -> BigRational {
        self.rad.to_rational()
    }

    /// Radius is at most `tol`.
    pub fn rad_le(&self, tol: &BigRational) -> bool {
        self.rad.to_rational() <= *tol
    }

    pub fn mid_int_part(&self) -> BigInt {
        self.mid.to_rational().floor().to_integer()
    }

    pub fn is_zero_exact(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(
            f,
            "{} ± {}",
            super::decimal::format_significant(&self.mid_rational(), digits),
            super::decimal::format_radius(&self.rad_rational())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_enclosure_contains_value() {
        let b = Ball::from_rational(&rat(1, 3), 64);
        assert!(b.contains_rational(&rat(1, 3)));
        assert!(b.rad() <= &Dyadic::pow2(-64));
        let exact = Ball::from_rational(&rat(3, 8), 64);
        assert!(exact.is_exact());
    }

    #[test]
    fn arithmetic_keeps_true_value() {
        let third = Ball::from_rational(&rat(1, 3), 80);
        let seventh = Ball::from_rational(&rat(1, 7), 80);
        let prod = third.mul(&seventh);
        assert!(prod.contains_rational(&rat(1, 21)));
        let sum = third.add(&seventh);
        assert!(sum.contains_rational(&rat(10, 21)));
        let q = third.div(&seventh).unwrap();
        assert!(q.contains_rational(&rat(7, 3)));
        let r = seventh.recip().unwrap();
        assert!(r.contains_rational(&rat(7, 1)));
        assert!(third.pow(5).contains_rational(&rat(1, 243)));
    }

    #[test]
    fn recip_of_zero_enclosure_fails() {
        let z = Ball::from_endpoints(&Dyadic::from_int(-1), &Dyadic::from_int(1), 32);
        assert!(z.recip().is_err());
    }

    #[test]
    fn certified_comparisons() {
        let a = Ball::from_rational(&rat(1, 3), 64);
        let b = Ball::from_rational(&rat(1, 2), 64);
        assert_eq!(a.compare(&b), Some(Ordering::Less));
        assert_eq!(a.compare(&a.clone()), None);
        let one = Ball::from_int(1, 64);
        assert_eq!(one.compare(&Ball::from_int(1, 128)), Some(Ordering::Equal));
    }

    #[test]
    fn abs_of_straddling_ball() {
        let x = Ball::from_endpoints(&Dyadic::from_int(-1), &Dyadic::from_int(3), 32);
        let a = x.abs();
        assert!(a.lower() <= Dyadic::zero());
        assert!(a.upper() >= Dyadic::from_int(3));
    }

    #[test]
    fn tail_is_one_sided() {
        let x = Ball::from_int(1, 64).add_tail(&Dyadic::pow2(-10));
        assert!(x.contains(&Dyadic::from_int(1)));
        assert!(x.contains(&Dyadic::from_int(1).add(&Dyadic::pow2(-10))));
        assert!(!x.contains(&Dyadic::from_int(1).sub(&Dyadic::pow2(-9))));
    }
}
