//! Real root enclosure by exact bisection.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ball::Ball;
use super::ScalarError;

/// A polynomial with rational coefficients, lowest degree first, scaled to
/// integer coefficients (the sign of the polynomial is unchanged).
struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    fn new(coeffs: &[BigRational]) -> Self {
        let lcm = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let coeffs = coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        IntPoly { coeffs }
    }

    /// Sign of `p(num / den)` for `den > 0`, via the homogenised form.
    fn sign_at(&self, num: &BigInt, den: &BigInt) -> i8 {
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        // Horner in homogeneous coordinates: sum c_k num^k den^(deg-k)
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * num + c * &den_pow;
            if k > 0 {
                den_pow *= den;
            }
        }
        match acc.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }
}

/// Result of a bisection: a bracketing interval and its enclosure.
#[derive(Clone, Debug)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
    pub steps: u32,
}

/// Shrinks `[lo, hi]` around a sign change of the polynomial until its width
/// is at most `tol`. Coefficients are given in ascending degree.
pub fn bisect_bracket(
    coeffs: &[BigRational],
    lo: &BigRational,
    hi: &BigRational,
    tol: &BigRational,
) -> Result<RootBracket, ScalarError> {
    if !tol.is_positive() {
        return Err(ScalarError::Domain("tolerance must be positive".into()));
    }
    if lo >= hi {
        return Err(ScalarError::Domain("empty bracket".into()));
    }
    let poly = IntPoly::new(coeffs);
    // common denominator representation: x = a / d
    let d = lo.denom().lcm(hi.denom());
    let mut a = (lo * BigRational::from_integer(d.clone())).to_integer();
    let mut c = (hi * BigRational::from_integer(d.clone())).to_integer();
    let mut den = d;
    let s_lo = poly.sign_at(&a, &den);
    let s_hi = poly.sign_at(&c, &den);
    if s_lo == 0 {
        return Ok(RootBracket {
            lo: lo.clone(),
            hi: lo.clone(),
            steps: 0,
        });
    }
    if s_hi == 0 {
        return Ok(RootBracket {
            lo: hi.clone(),
            hi: hi.clone(),
            steps: 0,
        });
    }
    if s_lo == s_hi {
        return Err(ScalarError::Bracket);
    }
    let mut steps = 0;
    loop {
        let width = BigRational::new(&c - &a, den.clone());
        if width <= *tol {
            break;
        }
        a <<= 1u32;
        c <<= 1u32;
        den <<= 1u32;
        let m = (&a + &c) >> 1u32;
        steps += 1;
        match poly.sign_at(&m, &den) {
            0 => {
                let r = BigRational::new(m, den);
                return Ok(RootBracket {
                    lo: r.clone(),
                    hi: r,
                    steps,
                });
            }
            s if s == s_lo => a = m,
            _ => c = m,
        }
    }
    Ok(RootBracket {
        lo: BigRational::new(a, den.clone()),
        hi: BigRational::new(c, den),
        steps,
    })
}

/// Encloses a root of the polynomial in `[lo, hi]` to width at most `tol`.
pub fn bisect_root(
    coeffs: &[BigRational],
    lo: &BigRational,
    hi: &BigRational,
    tol: &BigRational,
) -> Result<Ball, ScalarError> {
    let br = bisect_bracket(coeffs, lo, hi, tol)?;
    let prec = super::bits_for_tolerance(tol) + 16;
    Ok(Ball::from_rational_endpoints(&br.lo, &br.hi, prec))
}

/// Interval evaluation of a rational polynomial over a ball.
pub fn eval_poly_ball(coeffs: &[BigRational], x: &Ball) -> Ball {
    let prec = x.precision();
    coeffs.iter().rev().fold(Ball::from_int(0, prec), |acc, c| {
        acc.mul(x).add(&Ball::from_rational(c, prec))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::decimal::parse_rational;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn golden_ratio() {
        let ball = bisect_root(&[r("-1"), r("-1"), r("1")], &r("1"), &r("2"), &r("1e-12")).unwrap();
        // (1+√5)/2 = 1.6180339887498948482...
        assert!(ball.contains_rational(&r("1.61803398874989")));
        assert!(eval_poly_ball(&[r("-1"), r("-1"), r("1")], &ball).contains_zero());
        assert!(
            ball.rad_rational() * BigRational::from_integer(2.into()) <= r("1e-12") * r("1.001")
        );
    }

    #[test]
    fn cubic_crossover_root() {
        let cubic = [r("-1"), r("2"), r("-3"), r("1")];
        let br = bisect_bracket(&cubic, &r("2"), &r("3"), &r("1e-9")).unwrap();
        assert!(&br.hi - &br.lo <= r("1e-9"));
        assert!(br.lo <= r("2.3247179573") && r("2.3247179571") <= br.hi);
        let ball = bisect_root(&cubic, &r("2"), &r("3"), &r("1e-9")).unwrap();
        assert!(eval_poly_ball(&cubic, &ball).contains_zero());
    }

    #[test]
    fn linear_root_found_exactly() {
        let ball = bisect_root(&[r("-2"), r("1")], &r("1"), &r("3"), &r("1e-3")).unwrap();
        assert!(ball.contains_rational(&r("2")));
        assert!(ball.rad_rational() <= r("5e-4"));
    }

    #[test]
    fn same_sign_is_bracket_error() {
        let err = bisect_root(&[r("-1"), r("-1"), r("1")], &r("2"), &r("3"), &r("1e-3"));
        assert!(matches!(err, Err(ScalarError::Bracket)));
    }
}
