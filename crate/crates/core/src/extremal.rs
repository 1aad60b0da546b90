//! The largest entry `M_b(n)` of the inverse, where it sits, and checks of
//! the localisation theorems on concrete instances.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::scalar::{Ball, BaseSpec, BaseValue, NamedConstant, Real, Scalar};
use crate::symfunc::{sigma_finite, SigmaQuery};
use crate::vandinv::{inverse_matrix, AnyInverse, GeometricVandermonde};
use crate::{Error, Result};

pub const DEFAULT_PRECISION_CEILING: u32 = 4096;
/// Environment variable overriding [`DEFAULT_PRECISION_CEILING`].
pub const PRECISION_CEILING_ENV: &str = "VANGEO_PRECISION_CEILING";

/// Working-precision schedule for enclosure comparisons: start at `start`
/// bits and double up to `ceiling`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub ceiling: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start: 128,
            ceiling: DEFAULT_PRECISION_CEILING,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_ceiling(ceiling: u32) -> Self {
        PrecisionPolicy {
            start: 128.min(ceiling),
            ceiling,
        }
    }

    /// Default policy, honouring [`PRECISION_CEILING_ENV`] when set.
    pub fn from_env() -> Self {
        std::env::var(PRECISION_CEILING_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(PrecisionPolicy::with_ceiling)
            .unwrap_or_default()
    }

    fn schedule(&self) -> impl Iterator<Item = u32> {
        let ceiling = self.ceiling.max(16);
        std::iter::successors(Some(self.start.clamp(16, ceiling)), move |&b| {
            (b < ceiling).then(|| (b * 2).min(ceiling))
        })
    }
}

/// Least positive `m` with `b^m >= 1 + 1/b`, by exact comparison.
pub fn n_zero_exact(b: &BigRational) -> Result<usize> {
    if *b <= BigRational::one() {
        return Err(Error::Domain("base must exceed 1".into()));
    }
    let threshold = BigRational::one() + b.recip();
    let mut power = b.clone();
    let mut m = 1;
    while power < threshold {
        power *= b;
        m += 1;
    }
    Ok(m)
}

/// Least positive `m` with `b^m >= 1 + 1/b`.
///
/// τ sits exactly on the threshold (`τ = 1 + 1/τ`) and is resolved by its
/// defining identity; other irrational bases are compared by enclosures
/// with precision escalation.
pub fn n_zero(value: &BaseValue, policy: PrecisionPolicy) -> Result<usize> {
    match value {
        BaseValue::Exact(b) => n_zero_exact(b),
        BaseValue::Constant(NamedConstant::Tau) => Ok(1),
        v => {
            let mut last = policy.start;
            for bits in policy.schedule() {
                last = bits;
                if let Some(m) = n_zero_enclosed(&v.enclose(bits))? {
                    return Ok(m);
                }
            }
            Err(Error::Undecidable { bits: last })
        }
    }
}

/// `Ok(None)` if some comparison could not be decided at this precision.
fn n_zero_enclosed(b: &Ball) -> Result<Option<usize>> {
    let one = Ball::from_int(1, b.precision());
    if b.compare(&one) != Some(Ordering::Greater) {
        return Err(Error::Domain("base must exceed 1".into()));
    }
    let threshold = one.add(&b.recip()?);
    let mut power = b.clone();
    for m in 1..=1_000_000 {
        match power.compare(&threshold) {
            Some(Ordering::Greater | Ordering::Equal) => return Ok(Some(m)),
            Some(Ordering::Less) => power = power.mul(b),
            None => return Ok(None),
        }
    }
    Err(Error::Domain("threshold search did not terminate".into()))
}

/// `|c(i, j)|` for one instance, at a given working precision.
#[derive(Clone, Debug)]
pub struct MagnitudeTable {
    n: usize,
    mags: Vec<Real>,
    inverse: AnyInverse,
    bits: Option<u32>,
}

impl MagnitudeTable {
    pub fn build(gv: &GeometricVandermonde, bits: u32) -> Result<Self> {
        let inverse = inverse_matrix(gv, bits)?;
        let bits = match gv.value() {
            BaseValue::Exact(_) => None,
            _ => Some(bits),
        };
        Ok(MagnitudeTable {
            n: gv.n(),
            mags: inverse.magnitudes(),
            inverse,
            bits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Real {
        &self.mags[i * self.n + j]
    }

    pub fn inverse(&self) -> &AnyInverse {
        &self.inverse
    }

    pub fn bits(&self) -> Option<u32> {
        self.bits
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (i, j)))
    }
}

enum Outcome<R> {
    Decided(R),
    Undecided(R),
}

/// Runs `check` on magnitude tables of increasing precision until it can
/// decide, or returns its last undecided answer at the ceiling.
fn escalate<R>(
    gv: &GeometricVandermonde,
    policy: PrecisionPolicy,
    mut check: impl FnMut(&MagnitudeTable) -> Result<Outcome<R>>,
) -> Result<R> {
    if gv.value().as_exact().is_some() {
        let table = MagnitudeTable::build(gv, 0)?;
        return match check(&table)? {
            Outcome::Decided(r) | Outcome::Undecided(r) => Ok(r),
        };
    }
    let mut last = None;
    for bits in policy.schedule() {
        let table = MagnitudeTable::build(gv, bits)?;
        match check(&table)? {
            Outcome::Decided(r) => return Ok(r),
            Outcome::Undecided(r) => last = Some(r),
        }
    }
    Ok(last.expect("schedule yields at least one precision"))
}

/// Maximum of a set of values with its tie-aware argmax.
struct Argmax {
    value: Real,
    pairs: Vec<(usize, usize)>,
    decided: bool,
}

fn class_of((i, j): (usize, usize)) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// Entries attaining the maximum among `pairs`. Exact values compare
/// directly. Enclosures keep every entry whose upper end reaches the largest
/// lower end; symmetric mates are equal by symmetry of the inverse, so the
/// result is decided once the survivors form a single `{(i,j), (j,i)}` class.
fn argmax_of(table: &MagnitudeTable, pairs: &[(usize, usize)]) -> Argmax {
    let first = pairs[0];
    match table.get(first.0, first.1) {
        Real::Exact(_) => {
            let mut best = table.get(first.0, first.1).clone();
            for &(i, j) in pairs {
                if table.get(i, j).compare(&best) == Some(Ordering::Greater) {
                    best = table.get(i, j).clone();
                }
            }
            let winners = pairs
                .iter()
                .copied()
                .filter(|&(i, j)| table.get(i, j) == &best)
                .collect();
            Argmax {
                value: best,
                pairs: winners,
                decided: true,
            }
        }
        Real::Enclosure(_) => {
            let balls: Vec<Ball> = pairs
                .iter()
                .map(|&(i, j)| table.get(i, j).to_ball(64))
                .collect();
            let best_lower = balls.iter().map(|b| b.lower()).max().expect("nonempty");
            let winners: Vec<(usize, usize)> = pairs
                .iter()
                .zip(&balls)
                .filter(|(_, b)| b.upper() >= best_lower)
                .map(|(&p, _)| p)
                .collect();
            let classes: BTreeSet<_> = winners.iter().copied().map(class_of).collect();
            let value = winners
                .iter()
                .map(|&(i, j)| table.get(i, j).to_ball(64))
                .reduce(|a, b| a.union(&b))
                .expect("nonempty");
            Argmax {
                value: Real::Enclosure(value),
                pairs: winners,
                decided: classes.len() == 1,
            }
        }
    }
}

/// `M_b(n)` for one instance.
#[derive(Clone, Debug)]
pub struct MaxReport {
    pub base: BaseSpec,
    pub n: usize,
    pub n_zero: usize,
    pub max_value: Real,
    /// Every index pair attaining the maximum, symmetric mates included.
    pub argmax: Vec<(usize, usize)>,
    pub within_n_zero_box: bool,
    pub diagonal_argmax: bool,
    /// Enclosures could not separate distinct candidates at the ceiling;
    /// `argmax` then lists all remaining candidates.
    pub tie_undecided: bool,
    pub precision_bits: Option<u32>,
}

impl MaxReport {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "base": self.base.to_string(),
            "n": self.n,
            "n_zero": self.n_zero,
            "max": self.max_value.render_decimal(digits),
            "max_exact": match &self.max_value {
                Real::Exact(r) => Some(crate::scalar::decimal::format_fraction(r)),
                Real::Enclosure(_) => None,
            },
            "radius": crate::scalar::decimal::format_radius(&self.max_value.radius()),
            "argmax": self.argmax.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
            "within_n_zero_box": self.within_n_zero_box,
            "diagonal": self.diagonal_argmax,
            "tie_undecided": self.tie_undecided,
        })
    }
}

pub fn max_entry(gv: &GeometricVandermonde, policy: PrecisionPolicy) -> Result<MaxReport> {
    let n0 = n_zero(gv.value(), policy)?;
    escalate(gv, policy, |table| {
        let pairs: Vec<_> = table.pairs().collect();
        let am = argmax_of(table, &pairs);
        let report = MaxReport {
            base: gv.base().clone(),
            n: gv.n(),
            n_zero: n0,
            max_value: am.value,
            within_n_zero_box: am.pairs.iter().all(|&(i, j)| i <= n0 && j <= n0),
            diagonal_argmax: am.pairs.iter().any(|&(i, j)| i == j),
            argmax: am.pairs,
            tie_undecided: !am.decided,
            precision_bits: table.bits(),
        };
        Ok(if am.decided {
            Outcome::Decided(report)
        } else {
            Outcome::Undecided(report)
        })
    })
}

/// A concrete index pair where a check failed or could not be certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub base: BaseSpec,
    pub n: usize,
    pub n_zero: usize,
    pub pass: bool,
    /// False when enclosures could not certify a comparison at the ceiling.
    pub decided: bool,
    pub witnesses: Vec<Witness>,
    pub precision_bits: Option<u32>,
}

/// Certified `a <= b`, certified `a > b`, or neither.
fn compare_le(a: &Real, b: &Real) -> Option<bool> {
    if a.certainly_le(b) {
        Some(true)
    } else if b.compare(a) == Some(Ordering::Less) {
        Some(false)
    } else {
        None
    }
}

fn report_from(
    gv: &GeometricVandermonde,
    n0: usize,
    table: &MagnitudeTable,
    failures: Vec<Witness>,
    unknown: Vec<Witness>,
) -> Outcome<TheoremReport> {
    let decided = unknown.is_empty();
    let pass = failures.is_empty() && decided;
    let mut witnesses = failures;
    witnesses.extend(unknown);
    let report = TheoremReport {
        base: gv.base().clone(),
        n: gv.n(),
        n_zero: n0,
        pass,
        decided,
        witnesses,
        precision_bits: table.bits(),
    };
    if decided {
        Outcome::Decided(report)
    } else {
        Outcome::Undecided(report)
    }
}

/// Checks that `|c(i,j)| <= |c(n₀,n₀)|` whenever `i, j >= n₀`, and that the
/// maximum over the `[0, n₀]²` box dominates every entry outside it.
pub fn verify_theorem1(
    gv: &GeometricVandermonde,
    policy: PrecisionPolicy,
) -> Result<TheoremReport> {
    let n0 = n_zero(gv.value(), policy)?;
    let n = gv.n();
    escalate(gv, policy, |table| {
        let mut failures = Vec::new();
        let mut unknown = Vec::new();
        if n0 < n {
            let pivot = table.get(n0, n0);
            for i in n0..n {
                for j in n0..n {
                    if (i, j) == (n0, n0) {
                        continue;
                    }
                    let detail = || format!("|c({i},{j})| vs |c({n0},{n0})|");
                    match compare_le(table.get(i, j), pivot) {
                        Some(true) => {}
                        Some(false) => failures.push(Witness {
                            i,
                            j,
                            detail: detail(),
                        }),
                        None => unknown.push(Witness {
                            i,
                            j,
                            detail: detail(),
                        }),
                    }
                }
            }
            let inside: Vec<_> = table.pairs().filter(|&(i, j)| i <= n0 && j <= n0).collect();
            let box_max = argmax_of(table, &inside);
            let box_floor = match &box_max.value {
                Real::Exact(_) => box_max.value.clone(),
                Real::Enclosure(_) => {
                    // largest certified lower bound among box entries
                    let lower = inside
                        .iter()
                        .map(|&(i, j)| table.get(i, j).to_ball(64).lower())
                        .max()
                        .expect("box is nonempty");
                    Real::Enclosure(Ball::exact(lower, 64))
                }
            };
            for (i, j) in table.pairs().filter(|&(i, j)| i > n0 || j > n0) {
                let detail = || format!("|c({i},{j})| outside the box vs the box maximum");
                match compare_le(table.get(i, j), &box_floor) {
                    Some(true) => {}
                    Some(false) => failures.push(Witness {
                        i,
                        j,
                        detail: detail(),
                    }),
                    None => unknown.push(Witness {
                        i,
                        j,
                        detail: detail(),
                    }),
                }
            }
        }
        Ok(report_from(gv, n0, table, failures, unknown))
    })
}

/// Whether `b >= τ`, decided through `b² >= b + 1`.
pub fn at_least_tau(value: &BaseValue) -> bool {
    value.compare_tau() != Ordering::Less
}

/// Checks `M_b(n) ∈ {|c(0,0)|, |c(1,1)|}` and `σ(n−1,1,n; b) <= σ(n−2,1,n; b)`
/// for `b >= τ`, `n >= 2`.
pub fn verify_theorem2(
    gv: &GeometricVandermonde,
    policy: PrecisionPolicy,
) -> Result<TheoremReport> {
    if !at_least_tau(gv.value()) {
        return Err(Error::Precondition(format!(
            "base {} is below τ (b² < b + 1)",
            gv.base()
        )));
    }
    let n = gv.n();
    if n < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    let n0 = n_zero(gv.value(), policy)?;
    escalate(gv, policy, |table| {
        let mut failures = Vec::new();
        let mut unknown = Vec::new();
        let diag = [(0, 0), (1, 1)];
        let ceiling_value = match (table.get(0, 0), table.get(1, 1)) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a.max(b).clone()),
            (a, b) => {
                let lower = a.to_ball(64).lower().max(b.to_ball(64).lower());
                Real::Enclosure(Ball::exact(lower, 64))
            }
        };
        for (i, j) in table.pairs().filter(|p| !diag.contains(p)) {
            let detail = || format!("|c({i},{j})| exceeds max(|c(0,0)|, |c(1,1)|)");
            match compare_le(table.get(i, j), &ceiling_value) {
                Some(true) => {}
                Some(false) => failures.push(Witness {
                    i,
                    j,
                    detail: detail(),
                }),
                None => unknown.push(Witness {
                    i,
                    j,
                    detail: detail(),
                }),
            }
        }
        let (top, next) = match gv.value() {
            BaseValue::Exact(b) => (
                sigma_finite(&SigmaQuery::new(n - 1, 1, n, b.clone()))?.to_real(),
                sigma_finite(&SigmaQuery::new(n - 2, 1, n, b.clone()))?.to_real(),
            ),
            v => {
                let b = v.enclose(table.bits().unwrap_or(128));
                (
                    sigma_finite(&SigmaQuery::new(n - 1, 1, n, b.clone()))?.to_real(),
                    sigma_finite(&SigmaQuery::new(n - 2, 1, n, b))?.to_real(),
                )
            }
        };
        let detail = format!("σ({}, 1, {n}) vs σ({}, 1, {n})", n - 1, n - 2);
        match compare_le(&top, &next) {
            Some(true) => {}
            Some(false) => failures.push(Witness {
                i: n - 1,
                j: 1,
                detail,
            }),
            None => unknown.push(Witness {
                i: n - 1,
                j: 1,
                detail,
            }),
        }
        Ok(report_from(gv, n0, table, failures, unknown))
    })
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub n: usize,
    pub n_zero: usize,
    pub max: Real,
    pub argmax: Vec<(usize, usize)>,
    pub diagonal: bool,
    pub tie_undecided: bool,
}

/// Per-`n` argmax report; never asserts anything about the outcome.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub base: BaseSpec,
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    /// Dimensions where no diagonal entry attains the maximum.
    pub fn non_diagonal(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| !r.diagonal)
            .map(|r| r.n)
            .collect()
    }

    /// JSON array of `{n, n_zero, max, argmax, diagonal}`.
    pub fn to_json(&self, digits: usize) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "n_zero": r.n_zero,
                        "max": r.max.render_decimal(digits),
                        "argmax": r.argmax.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
                        "diagonal": r.diagonal,
                    })
                })
                .collect(),
        )
    }
}

pub fn conjecture_scan(
    base: &BaseSpec,
    n_min: usize,
    n_max: usize,
    policy: PrecisionPolicy,
) -> Result<ScanReport> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::Domain(format!(
            "need 2 <= n_min <= n_max, got {n_min}..{n_max}"
        )));
    }
    let rows: Result<Vec<ScanRow>> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let gv = GeometricVandermonde::new(base.clone(), n)?;
            let r = max_entry(&gv, policy)?;
            Ok(ScanRow {
                n,
                n_zero: r.n_zero,
                max: r.max_value,
                diagonal: r.diagonal_argmax,
                argmax: r.argmax,
                tie_undecided: r.tie_undecided,
            })
        })
        .collect();
    Ok(ScanReport {
        base: base.clone(),
        rows: rows?,
    })
}
