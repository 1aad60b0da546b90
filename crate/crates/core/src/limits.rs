//! Limits `ℓ(i, j) = lim_n |c(i, j, n)|` with certified truncation bounds.
//!
//! ```text
//! ℓ(i, j) = σ∞(i, j; 1/b) · ∏_{s=1..j} 1/(b^s − 1) · ∏_{t≥1} 1/(1 − b^−t)
//! ```
//!
//! where `σ∞(i, j; q)` is the `i`-th elementary symmetric function of
//! `{q^h : h >= 0, h != j}`. Every truncation is paired with a closed-form
//! overestimate of the discarded tail, folded into the enclosure radius.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::extremal::{n_zero, PrecisionPolicy};
use crate::scalar::{
    bits_for_tolerance, decimal, initial_precision, Ball, BaseSpec, BaseValue, Dyadic, Round,
    Scalar,
};
use crate::{Error, Result};

const BOUND_BITS: u32 = 64;
/// Hard cap on internal working precision while chasing a tolerance.
const MAX_WORKING_BITS: u32 = 1 << 17;

fn up_div(a: &Dyadic, b: &Dyadic) -> Dyadic {
    a.div(b, BOUND_BITS, Round::Up)
}

fn up_mul(a: &Dyadic, b: &Dyadic) -> Dyadic {
    a.mul(b).round(BOUND_BITS, Round::Up)
}

fn up_add(a: &Dyadic, b: &Dyadic) -> Dyadic {
    a.add(b).round(BOUND_BITS, Round::Up)
}

/// A truncated infinite sum or product with its certified tail.
#[derive(Clone, Debug)]
pub struct Truncated {
    /// Enclosure of the full (untruncated) quantity.
    pub value: Ball,
    /// Last index kept.
    pub cutoff: usize,
    /// Overestimate of the discarded tail, already inside `value`.
    pub tail: Dyadic,
}

fn check_unit_interval(q: &Ball) -> Result<()> {
    let zero = Ball::from_int(0, q.precision());
    let one = Ball::from_int(1, q.precision());
    if q.compare(&zero) != Some(Ordering::Greater) || q.compare(&one) != Some(Ordering::Less) {
        return Err(Error::Domain("q must lie strictly between 0 and 1".into()));
    }
    Ok(())
}

/// Rough cutoff where `q^(h+1) / (1 − q)` drops below `target`.
fn cutoff_estimate(q: &Ball, target: &BigRational, floor: usize) -> usize {
    let qf = q.mid().to_f64().clamp(1e-300, 1.0 - 1e-16);
    let tf = (target.numer().bits() as f64 - target.denom().bits() as f64) * std::f64::consts::LN_2;
    let h = ((tf + (1.0 - qf).ln()) / qf.ln()).ceil();
    (h.max(0.0) as usize).max(floor) + 2
}

/// `σ∞(i, j; q)` at the working precision of `q`, truncated once the tail
/// bound `Σ_{m=1..i} e_(i−m) T^m / m!`, `T = q^(H+1)/(1 − q)`, is at most
/// `tol / 2`.
pub fn sigma_infinite_at(i: usize, j: usize, q: &Ball, tol: &BigRational) -> Result<Truncated> {
    check_unit_interval(q)?;
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let prec = q.precision();
    let one = Ball::from_int(1, prec);
    if i == 0 {
        return Ok(Truncated {
            value: one,
            cutoff: 0,
            tail: Dyadic::zero(),
        });
    }
    let half_tol = tol / BigInt::from(2);
    let one_minus_q_low = Dyadic::from_int(1).sub(&q.upper());
    let mut e = vec![Ball::from_int(0, prec); i + 1];
    e[0] = one.clone();
    let mut power = one; // q^h for the next h
    let mut h = 0usize;
    let mut target = cutoff_estimate(q, &half_tol, j + 1);
    loop {
        while h <= target {
            if h != j {
                for k in (1..=i.min(h + 1)).rev() {
                    let t = power.mul(&e[k - 1]);
                    e[k] = e[k].add(&t);
                }
            }
            power = power.mul(q);
            h += 1;
        }
        // power = q^(H+1) with H = h − 1
        let big_t = up_div(&power.upper(), &one_minus_q_low);
        let mut tail = Dyadic::zero();
        let mut term = Dyadic::from_int(1);
        for m in 1..=i {
            term = up_div(&up_mul(&term, &big_t), &Dyadic::from_int(m as i64));
            tail = up_add(&tail, &up_mul(&e[i - m].upper(), &term));
        }
        if tail.to_rational() <= half_tol {
            return Ok(Truncated {
                value: e[i].add_tail(&tail),
                cutoff: h - 1,
                tail,
            });
        }
        target = target + target / 2 + 8;
    }
}

/// `σ∞(i, j; q)` for a rational `q ∈ (0, 1)`, with radius at most `tol`.
pub fn sigma_infinite(i: usize, j: usize, q: &BigRational, tol: &BigRational) -> Result<Truncated> {
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if !q.is_positive() || *q >= BigRational::one() {
        return Err(Error::Domain(
            "q must lie strictly between 0 and 1 (the series diverges otherwise)".into(),
        ));
    }
    let mut bits = initial_precision(tol);
    loop {
        let r = sigma_infinite_at(
            i,
            j,
            &Ball::from_rational(q, bits),
            &(tol / BigInt::from(2)),
        )?;
        if r.value.rad_le(tol) || bits >= MAX_WORKING_BITS {
            return Ok(r);
        }
        bits *= 2;
    }
}

/// `∏_{t≥1} 1/(1 − q^t)` at the working precision of `q = 1/b`. The tail
/// satisfies `Σ_{t>T} −log(1 − q^t) <= L = 2 q^(T+1)/(1 − q)` once
/// `q^(T+1) <= 1/2`, so the full product lies in `[P_T, P_T (1 + 2L)]`
/// for `L <= 1`.
pub fn inverse_q_product_at(q: &Ball, tol: &BigRational) -> Result<Truncated> {
    check_unit_interval(q)?;
    let prec = q.precision();
    let one = Ball::from_int(1, prec);
    let half = Dyadic::pow2(-1);
    let half_tol = tol / BigInt::from(2);
    let one_minus_q_low = Dyadic::from_int(1).sub(&q.upper());
    let mut denom = one.clone(); // ∏ (1 − q^t)
    let mut power = q.clone(); // q^t for the next t
    let mut t = 1usize;
    let mut target = cutoff_estimate(q, &(&half_tol / BigInt::from(1u64 << 20)), 1);
    loop {
        while t <= target {
            denom = denom.mul(&one.sub(&power));
            power = power.mul(q);
            t += 1;
        }
        let qn = power.upper(); // q^(T+1)
        if qn <= half {
            let l = up_mul(&Dyadic::from_int(2), &up_div(&qn, &one_minus_q_low));
            if l <= Dyadic::from_int(1) {
                let partial = denom.recip()?;
                let tail = up_mul(&up_mul(&partial.upper(), &Dyadic::from_int(2)), &l);
                if tail.to_rational() <= half_tol {
                    return Ok(Truncated {
                        value: partial.add_tail(&tail),
                        cutoff: t - 1,
                        tail,
                    });
                }
            }
        }
        target = target + target / 2 + 8;
    }
}

fn check_base(b: &BaseValue) -> Result<()> {
    if let BaseValue::Exact(r) = b {
        if *r <= BigRational::one() {
            return Err(Error::Domain("base must exceed 1".into()));
        }
    }
    Ok(())
}

/// `∏_{t≥1} (1 − b^−t)^−1` with radius at most `tol`.
pub fn inverse_q_product(b: &BaseValue, tol: &BigRational) -> Result<Truncated> {
    check_base(b)?;
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut bits = initial_precision(tol);
    loop {
        let r = inverse_q_product_at(&b.enclose_recip(bits), &(tol / BigInt::from(2)))?;
        if r.value.rad_le(tol) || bits >= MAX_WORKING_BITS {
            return Ok(r);
        }
        bits *= 2;
    }
}

/// `∏_{s=1..j} 1/(b^s − 1)`; one for `j = 0`.
pub fn finite_j_product<T: Scalar>(j: usize, b: &T) -> Result<T> {
    let one = b.one_like();
    let mut acc = one.clone();
    let mut bp = one.clone();
    for _ in 1..=j {
        bp = bp.mul(b);
        acc = acc.mul(&bp.sub(&one));
    }
    Ok(acc.recip()?)
}

/// `ℓ(i, j)` with its truncation metadata.
#[derive(Clone, Debug)]
pub struct LimitValue {
    pub i: usize,
    pub j: usize,
    pub value: Ball,
    pub sigma_cutoff: usize,
    pub product_cutoff: usize,
    pub tail_bound: Dyadic,
}

#[derive(Serialize)]
struct LimitEntryJson {
    i: usize,
    j: usize,
    value: String,
    radius: String,
    sigma_cutoff: usize,
    product_cutoff: usize,
}

impl LimitValue {
    fn to_json(&self, digits: usize) -> Value {
        serde_json::to_value(LimitEntryJson {
            i: self.i,
            j: self.j,
            value: decimal::format_significant(&self.value.mid_rational(), digits),
            radius: decimal::format_radius(&self.value.rad_rational()),
            sigma_cutoff: self.sigma_cutoff,
            product_cutoff: self.product_cutoff,
        })
        .expect("plain struct serializes")
    }
}

fn scale_tol(tol: &BigRational, scale: &Dyadic) -> BigRational {
    let s = scale.to_rational().max(BigRational::one());
    tol / (s * BigInt::from(8))
}

fn limit_entry_value(i: usize, j: usize, b: &BaseValue, tol: &BigRational) -> Result<LimitValue> {
    check_base(b)?;
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut bits = initial_precision(tol) + 32;
    let mut tol_sigma = tol.clone();
    let mut tol_prod = tol.clone();
    loop {
        let q = b.enclose_recip(bits);
        let bb = b.enclose(bits);
        let s = sigma_infinite_at(i, j, &q, &tol_sigma)?;
        let f = finite_j_product(j, &bb)?;
        let p = inverse_q_product_at(&q, &tol_prod)?;
        let fp = f.mul(&p.value);
        let sf = s.value.mul(&f);
        let value = s.value.mul(&fp);
        if value.rad_le(tol) {
            let tail_bound = up_add(&up_mul(&s.tail, &fp.upper()), &up_mul(&p.tail, &sf.upper()));
            return Ok(LimitValue {
                i,
                j,
                value,
                sigma_cutoff: s.cutoff,
                product_cutoff: p.cutoff,
                tail_bound,
            });
        }
        if bits >= MAX_WORKING_BITS {
            return Err(Error::Domain(format!(
                "tolerance not reached within {MAX_WORKING_BITS} bits"
            )));
        }
        tol_sigma = scale_tol(tol, &fp.upper());
        tol_prod = scale_tol(tol, &sf.upper());
        let magnitude = value.upper().magnitude().unwrap_or(0).max(0) as u32;
        bits = (bits * 2).max(bits_for_tolerance(tol) + magnitude + 64);
    }
}

/// `ℓ(i, j)` for the given base with radius at most `tol`.
pub fn limit_entry(i: usize, j: usize, base: &BaseSpec, tol: &BigRational) -> Result<LimitValue> {
    limit_entry_value(i, j, &base.value()?, tol)
}

/// Regime of the closed forms for `b >= τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AboveAlpha,
    BetweenTauAlpha,
    BelowTau,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::AboveAlpha => "above_alpha",
            Regime::BetweenTauAlpha => "between_tau_alpha",
            Regime::BelowTau => "below_tau",
        }
    }
}

/// `(regime, on_boundary)`: `b = α` satisfies both closed forms and is
/// classified above α; `b = τ` is classified between τ and α.
pub fn classify(b: &BaseValue) -> (Regime, bool) {
    match b.compare_tau() {
        Ordering::Less => (Regime::BelowTau, false),
        tau => match b.compare_alpha() {
            Ordering::Greater => (Regime::AboveAlpha, false),
            Ordering::Equal => (Regime::AboveAlpha, true),
            Ordering::Less => (Regime::BetweenTauAlpha, tau == Ordering::Equal),
        },
    }
}

/// Largest `ℓ(i, j)` over the box `0 <= i <= j <= n₀`.
#[derive(Clone, Debug)]
pub struct LimitMax {
    pub base: BaseSpec,
    pub n_zero: usize,
    /// `ℓ(i, j)` for `i <= j`, at the requested tolerance.
    pub entries: Vec<LimitValue>,
    pub value: Ball,
    /// Maximising pairs, each off-diagonal pair with its mirror.
    pub argmax: Vec<(usize, usize)>,
    /// Distinct candidates could not be separated at the precision ceiling.
    pub tie_undecided: bool,
    pub regime: Option<Regime>,
}

impl LimitMax {
    /// `{base, n_zero, entries, max, argmax, regime}`.
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "base": self.base.to_string(),
            "n_zero": self.n_zero,
            "entries": self.entries.iter().map(|e| e.to_json(digits)).collect::<Vec<_>>(),
            "max": decimal::format_significant(&self.value.mid_rational(), digits),
            "max_radius": decimal::format_radius(&self.value.rad_rational()),
            "argmax": self.argmax.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
            "tie_undecided": self.tie_undecided,
            "regime": self.regime.map(Regime::name),
        })
    }
}

fn survivors(values: &[(usize, usize, Ball)]) -> Vec<usize> {
    let best = values.iter().map(|v| v.2.lower()).max().expect("nonempty");
    (0..values.len())
        .filter(|&k| values[k].2.upper() >= best)
        .collect()
}

pub fn limit_max(base: &BaseSpec, tol: &BigRational, policy: PrecisionPolicy) -> Result<LimitMax> {
    let b = base.value()?;
    let n0 = n_zero(&b, policy)?;
    let pairs: Vec<(usize, usize)> = (0..=n0)
        .flat_map(|j| (0..=j).map(move |i| (i, j)))
        .collect();
    let entries: Vec<LimitValue> = pairs
        .par_iter()
        .map(|&(i, j)| limit_entry_value(i, j, &b, tol))
        .collect::<Result<_>>()?;
    let mut values: Vec<(usize, usize, Ball)> = entries
        .iter()
        .map(|e| (e.i, e.j, e.value.clone()))
        .collect();
    let mut live = survivors(&values);
    let mut refine_tol = tol.clone();
    let mut tie_undecided = false;
    while live.len() > 1 {
        let next_bits = 2 * bits_for_tolerance(&refine_tol).max(32);
        if next_bits > policy.ceiling {
            tie_undecided = true;
            break;
        }
        refine_tol = Dyadic::pow2(-(next_bits as i64)).to_rational();
        let refined: Vec<(usize, usize, Ball)> = live
            .par_iter()
            .map(|&k| {
                let (i, j, _) = values[k];
                limit_entry_value(i, j, &b, &refine_tol).map(|v| (i, j, v.value))
            })
            .collect::<Result<_>>()?;
        values = refined;
        live = survivors(&values);
    }
    let value = live
        .iter()
        .map(|&k| values[k].2.clone())
        .reduce(|a, c| a.union(&c))
        .expect("nonempty");
    let mut argmax = Vec::new();
    for &k in &live {
        let (i, j, _) = values[k];
        argmax.push((i, j));
        if i != j {
            argmax.push((j, i));
        }
    }
    argmax.sort_unstable();
    let (regime, _) = classify(&b);
    Ok(LimitMax {
        base: base.clone(),
        n_zero: n0,
        entries,
        value,
        argmax,
        tie_undecided,
        regime: Some(regime),
    })
}

/// Closed forms of `ℓ(0,0)` and `ℓ(1,1)` and the regime of `b`.
#[derive(Clone, Debug)]
pub struct CorollaryValues {
    pub l00: Ball,
    pub l11: Ball,
    /// `(b² − b + 1) / (b (b − 1)²)`, the ratio `ℓ(1,1)/ℓ(0,0)`.
    pub ratio: Ball,
    pub regime: Regime,
    /// `b` equals τ or α.
    pub boundary: bool,
}

impl CorollaryValues {
    /// Limit of `M_b(n)` predicted by the regime; `None` below τ.
    pub fn predicted_limit(&self) -> Option<&Ball> {
        match self.regime {
            Regime::AboveAlpha => Some(&self.l00),
            Regime::BetweenTauAlpha => Some(&self.l11),
            Regime::BelowTau => None,
        }
    }
}

pub fn crossover_ratio<T: Scalar>(b: &T) -> Result<T> {
    let one = b.one_like();
    let num = b.mul(b).sub(b).add(&one);
    let bm1 = b.sub(&one);
    let den = b.mul(&bm1).mul(&bm1);
    Ok(num.div(&den)?)
}

pub fn corollary_values(base: &BaseSpec, tol: &BigRational) -> Result<CorollaryValues> {
    let b = base.value()?;
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let (regime, boundary) = classify(&b);
    let mut bits = initial_precision(tol) + 32;
    let mut inner_tol = tol.clone();
    loop {
        let ratio = match &b {
            BaseValue::Exact(r) => Ball::from_rational(&crossover_ratio(r)?, bits),
            v => crossover_ratio(&v.enclose(bits))?,
        };
        let p = inverse_q_product_at(&b.enclose_recip(bits), &inner_tol)?;
        let l11 = ratio.mul(&p.value);
        if l11.rad_le(tol) && p.value.rad_le(tol) {
            return Ok(CorollaryValues {
                l00: p.value,
                l11,
                ratio,
                regime,
                boundary,
            });
        }
        if bits >= MAX_WORKING_BITS {
            return Err(Error::Domain("tolerance not reached".into()));
        }
        inner_tol = scale_tol(tol, &ratio.upper());
        bits *= 2;
    }
}

/// `3 ∏_{i=2..last} (1 + 1/(2^i − 1))`, exactly.
pub fn m2_intro_partial(last: usize) -> BigRational {
    (2..=last).fold(BigRational::from_integer(3.into()), |acc, i| {
        let d = (BigInt::one() << i) - BigInt::one();
        acc * BigRational::new(&d + BigInt::one(), d)
    })
}

/// `3 ∏_{i>=2} (1 + 1/(2^i − 1))` with radius at most `tol`. After the
/// factor `i = I` the log-tail is at most `Σ_{i>I} 1/(2^i − 1) <= 2^(1−I)`.
pub fn m2_intro_identity(tol: &BigRational) -> Result<Truncated> {
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let bits = initial_precision(tol) + 16;
    let mut last = 2usize;
    let mut partial = m2_intro_partial(last);
    loop {
        let l = Dyadic::pow2(1 - last as i64);
        if l <= Dyadic::from_int(1) {
            let ball = Ball::from_rational(&partial, bits);
            let tail = up_mul(&up_mul(&ball.upper(), &Dyadic::from_int(2)), &l);
            let value = ball.add_tail(&tail);
            if value.rad_le(tol) {
                return Ok(Truncated {
                    value,
                    cutoff: last,
                    tail,
                });
            }
        }
        last += 1;
        let d = (BigInt::one() << last) - BigInt::one();
        partial *= BigRational::new(&d + BigInt::one(), d);
    }
}
