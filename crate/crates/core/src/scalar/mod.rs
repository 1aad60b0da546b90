//! Arithmetic substrate: exact rationals, rigorous enclosures and the named
//! algebraic bases.

mod ball;
pub mod decimal;
mod dyadic;
mod roots;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ball::Ball;
pub use dyadic::{Dyadic, Round};
pub use roots::{bisect_bracket, bisect_root, eval_poly_ball, RootBracket};

/// Exact rational in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Rigorous real: a midpoint-radius enclosure.
pub type RigorousReal = Ball;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("polynomial has the same sign at both bracket endpoints")]
    Bracket,
    #[error("division by an enclosure containing zero")]
    DivisionByZero,
    #[error("comparison undecidable at {bits} bits")]
    Undecidable { bits: u32 },
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Bits needed so that `2^-bits <= tol`.
pub fn bits_for_tolerance(tol: &BigRational) -> u32 {
    assert!(tol.is_positive());
    let mut bits = (tol.denom().bits() as i64 - tol.numer().bits() as i64).max(0) as u32;
    while Dyadic::pow2(-(bits as i64)).to_rational() > *tol {
        bits += 1;
    }
    bits
}

/// Starting working precision for a target tolerance: `max(64, 4 * digits)`.
pub fn initial_precision(tol: &BigRational) -> u32 {
    let digits = (bits_for_tolerance(tol) as f64 * std::f64::consts::LOG10_2).ceil() as u32;
    (4 * digits).max(64)
}

/// Which arithmetic produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Rigorous,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Rigorous => "rigorous",
        })
    }
}

/// Field operations shared by exact rationals and enclosures, so the
/// symmetric-function and inversion code is written once.
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    const BACKEND: Backend;

    /// An integer in the same arithmetic (and precision) as `self`.
    fn from_int_like(&self, v: i64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn recip(&self) -> Result<Self, ScalarError>;
    /// Certified ordering, `None` if undecidable.
    fn compare(&self, rhs: &Self) -> Option<Ordering>;

    fn zero_like(&self) -> Self {
        self.from_int_like(0)
    }

    fn one_like(&self) -> Self {
        self.from_int_like(1)
    }

    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&rhs.recip()?))
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
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

    /// Larger of two values; for enclosures, the hull of all possible maxima.
    fn max_with(&self, rhs: &Self) -> Self;

    fn signum(&self) -> Option<Ordering> {
        self.compare(&self.zero_like())
    }

    /// Agreement as far as the arithmetic can tell: equality for exact
    /// values, overlapping enclosures otherwise.
    fn agrees(&self, rhs: &Self) -> bool;

    fn to_real(&self) -> Real;
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn from_int_like(&self, v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn recip(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(BigRational::recip(self))
        }
    }
    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        if rhs.is_zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn compare(&self, rhs: &Self) -> Option<Ordering> {
        Some(self.cmp(rhs))
    }
    fn agrees(&self, rhs: &Self) -> bool {
        self == rhs
    }
    fn max_with(&self, rhs: &Self) -> Self {
        if self >= rhs {
            self.clone()
        } else {
            rhs.clone()
        }
    }
    fn to_real(&self) -> Real {
        Real::Exact(self.clone())
    }
}

impl Scalar for Ball {
    const BACKEND: Backend = Backend::Rigorous;

    fn from_int_like(&self, v: i64) -> Self {
        Ball::from_int(v, self.precision())
    }
    fn add(&self, rhs: &Self) -> Self {
        Ball::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Ball::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Ball::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Ball::neg(self)
    }
    fn abs(&self) -> Self {
        Ball::abs(self)
    }
    fn recip(&self) -> Result<Self, ScalarError> {
        Ball::recip(self)
    }
    fn pow(&self, e: u64) -> Self {
        Ball::pow(self, e)
    }
    fn compare(&self, rhs: &Self) -> Option<Ordering> {
        Ball::compare(self, rhs)
    }
    fn agrees(&self, rhs: &Self) -> bool {
        self.overlaps(rhs)
    }
    fn max_with(&self, rhs: &Self) -> Self {
        let lo = self.lower().max(rhs.lower());
        let hi = self.upper().max(rhs.upper());
        Ball::from_endpoints(&lo, &hi, self.precision().max(rhs.precision()))
    }
    fn to_real(&self) -> Real {
        Real::Enclosure(self.clone())
    }
}

/// A value produced by either backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Real {
    Exact(BigRational),
    Enclosure(Ball),
}

impl Real {
    pub fn backend(&self) -> Backend {
        match self {
            Real::Exact(_) => Backend::Exact,
            Real::Enclosure(_) => Backend::Rigorous,
        }
    }

    pub fn to_ball(&self, prec: u32) -> Ball {
        match self {
            Real::Exact(r) => Ball::from_rational(r, prec),
            Real::Enclosure(b) => b.clone(),
        }
    }

    pub fn midpoint(&self) -> BigRational {
        match self {
            Real::Exact(r) => r.clone(),
            Real::Enclosure(b) => b.mid_rational(),
        }
    }

    pub fn radius(&self) -> BigRational {
        match self {
            Real::Exact(_) => BigRational::zero(),
            Real::Enclosure(b) => b.rad_rational(),
        }
    }

    fn as_balls(&self, other: &Real) -> (Ball, Ball) {
        let prec = match (self, other) {
            (Real::Enclosure(b), _) | (_, Real::Enclosure(b)) => b.precision(),
            _ => 64,
        };
        (self.to_ball(prec), other.to_ball(prec))
    }

    pub fn compare(&self, other: &Real) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Some(a.cmp(b)),
            _ => {
                let (a, b) = self.as_balls(other);
                a.compare(&b)
            }
        }
    }

    /// Certified `self <= other`.
    pub fn certainly_le(&self, other: &Real) -> bool {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a <= b,
            _ => {
                let (a, b) = self.as_balls(other);
                a.certainly_le(&b)
            }
        }
    }

    pub fn agrees(&self, other: &Real) -> bool {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a == b,
            _ => {
                let (a, b) = self.as_balls(other);
                a.overlaps(&b)
            }
        }
    }

    /// Decimal rendering: `"p/q"` for exact values, midpoint digits otherwise.
    pub fn render(&self, digits: usize) -> String {
        match self {
            Real::Exact(r) => decimal::format_fraction(r),
            Real::Enclosure(b) => decimal::format_significant(&b.mid_rational(), digits),
        }
    }

    /// Decimal digits for both backends (exact values are rounded).
    pub fn render_decimal(&self, digits: usize) -> String {
        decimal::format_significant(&self.midpoint(), digits)
    }
}

/// The algebraic constants that may serve as a base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedConstant {
    /// Golden ratio, root of x² − x − 1 in [1, 2].
    Tau,
    /// Real root of x³ − 3x² + 2x − 1 in [2, 3].
    Alpha,
}

impl NamedConstant {
    /// Minimal polynomial, ascending coefficients.
    pub fn minimal_polynomial(self) -> Vec<BigRational> {
        let c = |v: i64| rat(v, 1);
        match self {
            NamedConstant::Tau => vec![c(-1), c(-1), c(1)],
            NamedConstant::Alpha => vec![c(-1), c(2), c(-3), c(1)],
        }
    }

    /// Isolating interval for the intended root.
    pub fn bracket(self) -> (BigRational, BigRational) {
        match self {
            NamedConstant::Tau => (rat(1, 1), rat(2, 1)),
            NamedConstant::Alpha => (rat(2, 1), rat(3, 1)),
        }
    }

    /// Enclosure with radius at most `2^(2 - bits)`, by bisection.
    pub fn enclose(self, bits: u32) -> Ball {
        let (lo, hi) = self.bracket();
        let tol = Dyadic::pow2(-(bits as i64) + 1).to_rational();
        let br = bisect_bracket(&self.minimal_polynomial(), &lo, &hi, &tol)
            .expect("minimal polynomial changes sign on its isolating interval");
        Ball::from_rational_endpoints(&br.lo, &br.hi, bits)
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedConstant::Tau => "tau",
            NamedConstant::Alpha => "alpha",
        }
    }
}

/// How a base is given on input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseSpec {
    Rational(BigRational),
    Decimal(String),
    Constant(NamedConstant),
}

impl BaseSpec {
    pub fn rational(num: i64, den: i64) -> Self {
        BaseSpec::Rational(rat(num, den))
    }

    pub fn tau() -> Self {
        BaseSpec::Constant(NamedConstant::Tau)
    }

    pub fn alpha() -> Self {
        BaseSpec::Constant(NamedConstant::Alpha)
    }

    /// Exact value for rational and decimal specs.
    pub fn exact(&self) -> Result<Option<BigRational>, ScalarError> {
        match self {
            BaseSpec::Rational(r) => Ok(Some(r.clone())),
            BaseSpec::Decimal(s) => decimal::parse_rational(s).map(Some),
            BaseSpec::Constant(_) => Ok(None),
        }
    }

    /// Resolves the spec to a value, checking `b > 1`.
    pub fn value(&self) -> Result<BaseValue, ScalarError> {
        let v = match self {
            BaseSpec::Constant(c) => BaseValue::Constant(*c),
            _ => BaseValue::Exact(self.exact()?.expect("rational spec")),
        };
        if let BaseValue::Exact(r) = &v {
            if *r <= BigRational::one() {
                return Err(ScalarError::Domain(format!(
                    "base must exceed 1, got {}",
                    decimal::format_fraction(r)
                )));
            }
        }
        Ok(v)
    }
}

impl FromStr for BaseSpec {
    type Err = ScalarError;

    /// Accepts `"p/q"`, integers, finite decimals, `"tau"` and `"alpha"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "tau" | "phi" | "τ" => return Ok(BaseSpec::tau()),
            "alpha" | "α" => return Ok(BaseSpec::alpha()),
            _ => {}
        }
        if t.contains('/') || !(t.contains('.') || t.contains(['e', 'E'])) {
            decimal::parse_rational(t).map(BaseSpec::Rational)
        } else {
            decimal::parse_rational(t)?;
            Ok(BaseSpec::Decimal(t.to_string()))
        }
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSpec::Rational(r) => f.write_str(&decimal::format_fraction(r)),
            BaseSpec::Decimal(s) => f.write_str(s),
            BaseSpec::Constant(c) => f.write_str(c.name()),
        }
    }
}

/// A validated base `b > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseValue {
    Exact(BigRational),
    Constant(NamedConstant),
}

impl BaseValue {
    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            BaseValue::Exact(r) => Some(r),
            BaseValue::Constant(_) => None,
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            BaseValue::Exact(_) => Backend::Exact,
            BaseValue::Constant(_) => Backend::Rigorous,
        }
    }

    /// Enclosure of `b` with radius at most `2^(2 - bits)`.
    pub fn enclose(&self, bits: u32) -> Ball {
        match self {
            BaseValue::Exact(r) => Ball::from_rational(r, bits),
            BaseValue::Constant(c) => c.enclose(bits),
        }
    }

    /// Enclosure of `1 / b`.
    pub fn enclose_recip(&self, bits: u32) -> Ball {
        match self {
            BaseValue::Exact(r) => Ball::from_rational(&r.recip(), bits),
            BaseValue::Constant(c) => c
                .enclose(bits + 4)
                .recip()
                .expect("base exceeds 1")
                .with_precision(bits),
        }
    }

    /// Sign of `b² − b − 1`, i.e. the position of `b` relative to τ.
    /// Exact for rationals and for both named constants.
    pub fn compare_tau(&self) -> Ordering {
        match self {
            BaseValue::Exact(r) => (r * r - r - BigRational::one()).cmp(&BigRational::zero()),
            BaseValue::Constant(NamedConstant::Tau) => Ordering::Equal,
            // α > 2 > τ
            BaseValue::Constant(NamedConstant::Alpha) => Ordering::Greater,
        }
    }

    /// Position of `b` relative to α. For `b > 1.6` the cubic is increasing
    /// and α is its only real root, so its sign decides.
    pub fn compare_alpha(&self) -> Ordering {
        match self {
            BaseValue::Exact(r) => {
                if *r < rat(2, 1) {
                    return Ordering::Less;
                }
                let cubic = r * r * r - rat(3, 1) * r * r + rat(2, 1) * r - rat(1, 1);
                cubic.cmp(&BigRational::zero())
            }
            BaseValue::Constant(NamedConstant::Alpha) => Ordering::Equal,
            BaseValue::Constant(NamedConstant::Tau) => Ordering::Less,
        }
    }
}

impl fmt::Display for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseValue::Exact(r) => f.write_str(&decimal::format_fraction(r)),
            BaseValue::Constant(c) => f.write_str(c.name()),
        }
    }
}

/// Enclosure of the base value at `precision_bits`.
pub fn evaluate_base(spec: &BaseSpec, precision_bits: u32) -> Result<Ball, ScalarError> {
    if precision_bits < 16 {
        return Err(ScalarError::Domain(
            "precision must be at least 16 bits".into(),
        ));
    }
    Ok(spec.value()?.enclose(precision_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use decimal::parse_rational;

    #[test]
    fn base_parsing() {
        assert_eq!("2".parse::<BaseSpec>().unwrap(), BaseSpec::rational(2, 1));
        assert_eq!("6/4".parse::<BaseSpec>().unwrap(), BaseSpec::rational(3, 2));
        assert_eq!(
            "1.2".parse::<BaseSpec>().unwrap(),
            BaseSpec::Decimal("1.2".into())
        );
        assert_eq!(
            "1.2".parse::<BaseSpec>().unwrap().exact().unwrap(),
            Some(rat(6, 5))
        );
        assert_eq!("TAU".parse::<BaseSpec>().unwrap(), BaseSpec::tau());
        assert!("1.2.3".parse::<BaseSpec>().is_err());
    }

    #[test]
    fn base_must_exceed_one() {
        for s in ["1", "0.5", "-3", "1/1"] {
            let spec: BaseSpec = s.parse().unwrap();
            assert!(matches!(spec.value(), Err(ScalarError::Domain(_))), "{s}");
            assert!(evaluate_base(&spec, 64).is_err());
        }
    }

    #[test]
    fn evaluate_rational_base_is_exact() {
        let b = evaluate_base(&BaseSpec::rational(2, 1), 64).unwrap();
        assert!(b.is_exact());
        assert!(b.contains_rational(&rat(2, 1)));
        let seven_fifths = evaluate_base(&"1.4".parse().unwrap(), 64).unwrap();
        assert!(seven_fifths.contains_rational(&rat(7, 5)));
        assert!(seven_fifths.rad() <= &Dyadic::pow2(-62));
    }

    #[test]
    fn evaluate_tau() {
        let t = evaluate_base(&BaseSpec::tau(), 64).unwrap();
        assert!(t.rad() <= &Dyadic::pow2(-62));
        let printed = parse_rational("1.6180339887498948482").unwrap();
        assert!(Signed::abs(&(t.mid_rational() - printed)) < parse_rational("1e-18").unwrap());
        // x² − x − 1 over the enclosure contains zero
        assert!(eval_poly_ball(&NamedConstant::Tau.minimal_polynomial(), &t).contains_zero());
    }

    #[test]
    fn evaluate_alpha() {
        let a = evaluate_base(&BaseSpec::alpha(), 64).unwrap();
        assert!(a.rad() <= &Dyadic::pow2(-62));
        let printed = parse_rational("2.324717957").unwrap();
        let diff = Signed::abs(&(a.mid_rational() - printed));
        assert!(diff < parse_rational("5e-10").unwrap());
        assert!(eval_poly_ball(&NamedConstant::Alpha.minimal_polynomial(), &a).contains_zero());
    }

    #[test]
    fn precision_floor() {
        assert!(evaluate_base(&BaseSpec::tau(), 8).is_err());
    }

    #[test]
    fn tau_and_alpha_comparisons() {
        let v = |s: &str| s.parse::<BaseSpec>().unwrap().value().unwrap();
        assert_eq!(v("3/2").compare_tau(), Ordering::Less);
        assert_eq!(v("5/3").compare_tau(), Ordering::Greater);
        assert_eq!(v("tau").compare_tau(), Ordering::Equal);
        assert_eq!(v("2").compare_alpha(), Ordering::Less);
        assert_eq!(v("2.33").compare_alpha(), Ordering::Greater);
        assert_eq!(v("2.32").compare_alpha(), Ordering::Less);
        assert_eq!(v("alpha").compare_alpha(), Ordering::Equal);
    }

    #[test]
    fn tolerance_bits() {
        assert_eq!(bits_for_tolerance(&rat(1, 1024)), 10);
        assert_eq!(bits_for_tolerance(&rat(1, 1000)), 10);
        assert_eq!(initial_precision(&parse_rational("1e-20").unwrap()), 84);
        assert_eq!(initial_precision(&rat(1, 2)), 64);
    }
}
