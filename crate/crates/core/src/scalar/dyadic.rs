//! Exact binary floating values `mantissa * 2^exponent`.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Rounding direction used when a dyadic value is shortened.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
    Nearest,
}

/// An exact dyadic rational `man * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        Dyadic { man, exp }.normalized()
    }

    pub fn zero() -> Self {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            man: BigInt::one(),
            exp: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    fn normalized(mut self) -> Self {
        if self.man.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.man.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.man >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Ordering {
        match self.man.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// Exponent of the leading bit, i.e. `floor(log2 |self|)`; `None` for zero.
    pub fn magnitude(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.man.bits() as i64 - 1)
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            man: -&self.man,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            man: self.man.abs(),
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exp <= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (hi.exp - lo.exp) as u64;
        Dyadic::new(&lo.man + (&hi.man << shift), lo.exp)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            man: self.man.clone(),
            exp: self.exp + e,
        }
    }

    /// Shortens the mantissa to at most `prec` bits in the given direction.
    pub fn round(&self, prec: u32, mode: Round) -> Self {
        let bits = self.man.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let divisor = BigInt::one() << shift;
        let man = divide(&self.man, &divisor, mode);
        Dyadic::new(man, self.exp + shift as i64)
    }

    /// Quotient `self / other` with `prec` significant bits, rounded in `mode`.
    pub fn div(&self, other: &Self, prec: u32, mode: Round) -> Self {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let s = prec as i64 + other.man.bits() as i64 - self.man.bits() as i64 + 1;
        let (num, den) = if s >= 0 {
            (&self.man << (s as u64), other.man.clone())
        } else {
            (self.man.clone(), &other.man << ((-s) as u64))
        };
        let q = divide(&num, &den, mode);
        Dyadic::new(q, self.exp - other.exp - s)
    }

    /// Nearest-direction dyadic approximation of a rational with `prec` bits.
    pub fn from_rational(r: &BigRational, prec: u32, mode: Round) -> Self {
        Dyadic::from_int(r.numer().clone()).div(&Dyadic::from_int(r.denom().clone()), prec, mode)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << (self.exp as u64))
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Lossy conversion, used only for cutoff estimates.
    pub fn to_f64(&self) -> f64 {
        let bits = self.man.bits() as i64;
        let keep = 60.min(bits);
        let shifted: BigInt = &self.man >> ((bits - keep) as u64);
        let m: i64 = shifted.try_into().unwrap_or(0);
        (m as f64) * 2f64.powi((self.exp + bits - keep).clamp(-2000, 2000) as i32)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn divide(num: &BigInt, den: &BigInt, mode: Round) -> BigInt {
    match mode {
        Round::Down => num.div_floor(den),
        Round::Up => num.div_ceil(den),
        Round::Nearest => {
            let twice: BigInt = num << 1u32;
            (twice + den).div_floor(&(den << 1u32))
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.sign(), other.sign()) {
            (a, b) if a != b => a.cmp(&b),
            _ => self.sub(other).sign(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(d(3, -1).add(&d(1, 2)), d(11, -1));
        assert_eq!(d(3, -1).mul(&d(5, -2)), d(15, -3));
        assert_eq!(d(12, 0), d(3, 2));
        assert!(d(-1, 10) < d(1, -10));
    }

    #[test]
    fn rounding_directions() {
        let x = d(0b10111, 0);
        assert_eq!(x.round(3, Round::Down), d(0b101, 2));
        assert_eq!(x.round(3, Round::Up), d(0b110, 2));
        assert_eq!(x.round(3, Round::Nearest), d(0b110, 2));
        assert_eq!(x.neg().round(3, Round::Down), d(-0b110, 2));
    }

    #[test]
    fn division_brackets_quotient() {
        let one = Dyadic::from_int(1);
        let three = Dyadic::from_int(3);
        let lo = one.div(&three, 40, Round::Down);
        let hi = one.div(&three, 40, Round::Up);
        let third = BigRational::new(1.into(), 3.into());
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(hi.sub(&lo) <= Dyadic::pow2(-40));
    }

    #[test]
    fn magnitude_and_float() {
        assert_eq!(d(5, 3).magnitude(), Some(5));
        assert!((d(3, -2).to_f64() - 0.75).abs() < 1e-15);
    }
}
