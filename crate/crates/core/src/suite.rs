//! Invariant suite behind `vangeo verify`: every proven statement about
//! one base, checked for all dimensions up to `n_max`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::extremal::{
    at_least_tau, conjecture_scan, n_zero, verify_theorem1, verify_theorem2, PrecisionPolicy,
};
use crate::scalar::{BaseSpec, BaseValue, Real, Scalar};
use crate::symfunc::{
    complement_exponent, elementary_excluding, sigma_complement_pair, sigma_finite, SigmaQuery,
};
use crate::vandinv::{
    gaussian_inverse, inverse_matrix, pi_product, pi_ratio, residual_norm_for, AnyInverse,
    GeometricVandermonde,
};
use crate::{Error, Result};

/// Working precision for checks on irrational bases.
pub const SUITE_BITS: u32 = 512;
/// Witnesses kept per check.
pub const MAX_WITNESSES: usize = 8;
/// Largest dimension for the term-by-term expansion check.
const EXPANSION_MAX_N: usize = 12;

pub const CHECKS: [&str; 13] = [
    "extremal-box",
    "two-candidate-max",
    "n-zero-threshold",
    "sigma-j-monotone",
    "sigma-complement",
    "node-product-ratio",
    "node-product-monotone",
    "symmetry",
    "checkerboard-sign",
    "top-sigma-order",
    "top-sigma-expansion",
    "identity-residual",
    "gaussian-oracle",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteWitness {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub witnesses: Vec<SuiteWitness>,
    pub skipped: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failures: 0,
            witnesses: Vec::new(),
            skipped: None,
        }
    }

    pub fn status(&self) -> Status {
        match (&self.skipped, self.failures) {
            (Some(note), _) => Status::Skipped(note.clone()),
            (None, 0) => Status::Pass,
            _ => Status::Fail,
        }
    }

    fn merge(&mut self, other: Check) {
        self.cases += other.cases;
        self.failures += other.failures;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        if self.skipped.is_none() {
            self.skipped = other.skipped;
        }
    }
}

#[derive(Clone, Debug)]
struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            checks: CHECKS.iter().map(|&c| Check::new(c)).collect(),
        }
    }

    fn slot(&mut self, name: &str) -> &mut Check {
        self.checks
            .iter_mut()
            .find(|c| c.name == name)
            .expect("registered check")
    }

    /// `Some(true)` passes; `Some(false)` fails; `None` fails as uncertified.
    fn record(
        &mut self,
        name: &str,
        outcome: Option<bool>,
        n: usize,
        i: usize,
        j: usize,
        detail: impl FnOnce() -> String,
    ) {
        let c = self.slot(name);
        c.cases += 1;
        if outcome == Some(true) {
            return;
        }
        c.failures += 1;
        if c.witnesses.len() < MAX_WITNESSES {
            let mut detail = detail();
            if outcome.is_none() {
                detail.push_str(" (not certified)");
            }
            c.witnesses.push(SuiteWitness { n, i, j, detail });
        }
    }

    fn skip(&mut self, name: &str, note: String) {
        self.slot(name).skipped = Some(note);
    }

    fn merge(mut self, other: Recorder) -> Recorder {
        for (a, b) in self.checks.iter_mut().zip(other.checks) {
            a.merge(b);
        }
        self
    }
}

fn le<T: Scalar>(a: &T, b: &T) -> Option<bool> {
    a.compare(b).map(|o| o != Ordering::Greater)
}

fn same<T: Scalar>(a: &T, b: &T) -> Option<bool> {
    match T::BACKEND {
        crate::scalar::Backend::Exact => Some(a.compare(b) == Some(Ordering::Equal)),
        crate::scalar::Backend::Rigorous => a.agrees(b).then_some(true),
    }
}

/// Statements that only involve `σ` and node products at one dimension.
fn scalar_checks<T: Scalar>(rec: &mut Recorder, b: &T, n: usize, n0: usize) -> Result<()> {
    let q = b.recip()?;
    // σ(i, j) against σ(i, j+1), above and below one
    let above: Vec<Vec<T>> = (0..n)
        .map(|j| elementary_excluding(b, j, n, n - 1))
        .collect();
    let below: Vec<Vec<T>> = (0..n)
        .map(|j| elementary_excluding(&q, j, n, n - 1))
        .collect();
    for j in 0..n - 1 {
        for i in 0..n {
            rec.record(
                "sigma-j-monotone",
                le(&above[j + 1][i], &above[j][i]),
                n,
                i,
                j,
                || format!("σ({i},{},{n}; b) > σ({i},{j},{n}; b)", j + 1),
            );
            rec.record(
                "sigma-j-monotone",
                le(&below[j][i], &below[j + 1][i]),
                n,
                i,
                j,
                || format!("σ({i},{j},{n}; 1/b) > σ({i},{},{n}; 1/b)", j + 1),
            );
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (lhs, rhs) = sigma_complement_pair(i, j, n, b)?;
            rec.record("sigma-complement", same(&lhs, &rhs), n, i, j, || {
                format!(
                    "σ({},{j},{n}; b)/b^{} differs from σ({i},{j},{n}; 1/b)",
                    n - 1 - i,
                    complement_exponent(n, j)
                )
            });
        }
    }
    if n >= 2 {
        let pis: Vec<T> = (0..n).map(|j| pi_product(j, n, b)).collect::<Result<_>>()?;
        for j in 0..n - 1 {
            let ratio = pis[j + 1].div(&pis[j])?;
            rec.record(
                "node-product-ratio",
                same(&ratio, &pi_ratio(j, n, b)?),
                n,
                j,
                j + 1,
                || format!("π({},{n})/π({j},{n}) differs from the closed ratio", j + 1),
            );
            if j >= n0 {
                rec.record(
                    "node-product-monotone",
                    le(&pis[j], &pis[j + 1]),
                    n,
                    j,
                    j + 1,
                    || format!("π({j},{n}) > π({},{n})", j + 1),
                );
            }
        }
    }
    if n >= 3 {
        let top = sigma_finite(&SigmaQuery::new(n - 1, 1, n, b.clone()))?;
        let next = sigma_finite(&SigmaQuery::new(n - 2, 1, n, b.clone()))?;
        rec.record("top-sigma-order", le(&top, &next), n, n - 1, 1, || {
            format!("σ({},1,{n}) > σ({},1,{n})", n - 1, n - 2)
        });
        if n <= EXPANSION_MAX_N {
            let s = n * (n - 1) / 2;
            let lead = b.pow((s - 1) as u64);
            rec.record(
                "top-sigma-expansion",
                same(&top, &lead),
                n,
                n - 1,
                1,
                || format!("σ({},1,{n}) differs from b^{}", n - 1, s - 1),
            );
            let expansion =
                ((n - 1) * (n - 2) / 2 - 1..=s - 3).fold(lead, |acc, e| acc.add(&b.pow(e as u64)));
            rec.record(
                "top-sigma-expansion",
                same(&next, &expansion),
                n,
                n - 2,
                1,
                || format!("σ({},1,{n}) differs from its explicit sum", n - 2),
            );
        }
    }
    Ok(())
}

fn zero() -> Real {
    Real::Exact(BigRational::zero())
}

/// Statements about the inverse matrix itself at one dimension.
fn matrix_checks(rec: &mut Recorder, gv: &GeometricVandermonde) -> Result<()> {
    let n = gv.n();
    let inv = inverse_matrix(gv, SUITE_BITS)?;
    for i in 0..n {
        for j in 0..n {
            let e = inv.entry(i, j);
            if j < i {
                rec.record(
                    "symmetry",
                    Some(e.agrees(&inv.entry(j, i))),
                    n,
                    i,
                    j,
                    || format!("c({i},{j}) differs from c({j},{i})"),
                );
            }
            let want = if (i + j) % 2 == 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            };
            rec.record(
                "checkerboard-sign",
                e.compare(&zero()).map(|o| o == want),
                n,
                i,
                j,
                || format!("sign of c({i},{j}) is not (−1)^{}", i + j),
            );
        }
    }
    let residual = residual_norm_for(gv, &inv, SUITE_BITS)?;
    let vanishes = match &residual {
        Real::Exact(r) => Some(r.is_zero()),
        Real::Enclosure(b) => b.contains_zero().then_some(true),
    };
    rec.record("identity-residual", vanishes, n, 0, 0, || {
        format!("‖V·C − I‖ = {}", residual.render_decimal(6))
    });
    match (&inv, gv.value()) {
        (AnyInverse::Exact(m), BaseValue::Exact(_)) => {
            let oracle = gaussian_inverse(gv)?;
            for i in 0..n {
                for j in 0..n {
                    rec.record(
                        "gaussian-oracle",
                        Some(m.get(i, j) == oracle.get(i, j)),
                        n,
                        i,
                        j,
                        || format!("closed form c({i},{j}) differs from elimination"),
                    );
                }
            }
        }
        _ => rec.skip(
            "gaussian-oracle",
            "exact elimination needs a rational base".into(),
        ),
    }
    Ok(())
}

fn theorem_checks(
    rec: &mut Recorder,
    gv: &GeometricVandermonde,
    policy: PrecisionPolicy,
) -> Result<()> {
    let n = gv.n();
    let t1 = verify_theorem1(gv, policy)?;
    let c = rec.slot("extremal-box");
    c.cases += 1;
    if !t1.pass {
        c.failures += 1;
        for w in t1
            .witnesses
            .into_iter()
            .take(MAX_WITNESSES - c.witnesses.len().min(MAX_WITNESSES))
        {
            c.witnesses.push(SuiteWitness {
                n,
                i: w.i,
                j: w.j,
                detail: w.detail,
            });
        }
    }
    if at_least_tau(gv.value()) {
        let t2 = verify_theorem2(gv, policy)?;
        let c = rec.slot("two-candidate-max");
        c.cases += 1;
        if !t2.pass {
            c.failures += 1;
            for w in t2
                .witnesses
                .into_iter()
                .take(MAX_WITNESSES - c.witnesses.len().min(MAX_WITNESSES))
            {
                c.witnesses.push(SuiteWitness {
                    n,
                    i: w.i,
                    j: w.j,
                    detail: w.detail,
                });
            }
        }
    } else {
        rec.skip(
            "two-candidate-max",
            "skipped: base below τ (b² < b + 1)".into(),
        );
    }
    Ok(())
}

fn per_dimension(
    base: &BaseSpec,
    value: &BaseValue,
    n: usize,
    n0: usize,
    policy: PrecisionPolicy,
) -> Result<Recorder> {
    let mut rec = Recorder::new();
    let gv = GeometricVandermonde::new(base.clone(), n)?;
    theorem_checks(&mut rec, &gv, policy)?;
    matrix_checks(&mut rec, &gv)?;
    match value {
        BaseValue::Exact(b) => scalar_checks(&mut rec, b, n, n0)?,
        v => scalar_checks(&mut rec, &v.enclose(SUITE_BITS), n, n0)?,
    }
    Ok(rec)
}

#[derive(Clone, Debug)]
pub struct VerifySummary {
    pub base: BaseSpec,
    pub n_max: usize,
    pub n_zero: usize,
    pub checks: Vec<Check>,
    /// Dimensions where no diagonal entry attains the maximum; report only.
    pub non_diagonal: Vec<usize>,
}

impl VerifySummary {
    /// True iff no check failed (skipped checks do not count against).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status() != Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "base {}  n_max {}  n_zero {}\n",
            self.base, self.n_max, self.n_zero
        );
        for c in &self.checks {
            let status = match c.status() {
                Status::Pass => "pass".to_string(),
                Status::Fail => format!("FAIL ({} of {})", c.failures, c.cases),
                Status::Skipped(note) => note,
            };
            out.push_str(&format!("{:<24}{:>7}  {}\n", c.name, c.cases, status));
            for w in &c.witnesses {
                out.push_str(&format!(
                    "    witness b={} n={} i={} j={}: {}\n",
                    self.base, w.n, w.i, w.j, w.detail
                ));
            }
        }
        out.push_str(&format!(
            "diagonal-argmax scan (report only): {} non-diagonal case(s){}\n",
            self.non_diagonal.len(),
            if self.non_diagonal.is_empty() {
                String::new()
            } else {
                format!(" at n = {:?}", self.non_diagonal)
            }
        ));
        out.push_str(if self.passed() {
            "all checks pass\n"
        } else {
            "checks FAILED\n"
        });
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_string(),
            "n_max": self.n_max,
            "n_zero": self.n_zero,
            "pass": self.passed(),
            "checks": self.checks.iter().map(|c| {
                let (status, note) = match c.status() {
                    Status::Pass => ("pass", None),
                    Status::Fail => ("fail", None),
                    Status::Skipped(n) => ("skipped", Some(n)),
                };
                json!({
                    "name": c.name,
                    "cases": c.cases,
                    "failures": c.failures,
                    "status": status,
                    "note": note,
                    "witnesses": c.witnesses.iter().map(|w| json!({
                        "base": self.base.to_string(), "n": w.n, "i": w.i, "j": w.j, "detail": w.detail,
                    })).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
            "non_diagonal": self.non_diagonal,
        })
    }
}

/// Runs every check for dimensions `1..=n_max` (theorem checks from 2).
pub fn verify_base(
    base: &BaseSpec,
    n_max: usize,
    policy: PrecisionPolicy,
) -> Result<VerifySummary> {
    if n_max < 2 {
        return Err(Error::Domain(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let value = base.value()?;
    let n0 = n_zero(&value, policy)?;
    let mut rec = (2..=n_max)
        .into_par_iter()
        .map(|n| per_dimension(base, &value, n, n0, policy))
        .try_reduce(Recorder::new, |a, b| Ok(a.merge(b)))?;
    let threshold_ok = (n0 == 1) == at_least_tau(&value);
    rec.record("n-zero-threshold", Some(threshold_ok), 0, n0, n0, || {
        format!("n₀ = {n0} disagrees with the b² >= b + 1 test")
    });
    // deterministic witness order regardless of scheduling
    for c in &mut rec.checks {
        c.witnesses.sort_by_key(|w| (w.n, w.i, w.j));
    }
    let scan = conjecture_scan(base, 2, n_max, policy)?;
    Ok(VerifySummary {
        base: base.clone(),
        n_max,
        n_zero: n0,
        checks: rec.checks,
        non_diagonal: scan.non_diagonal(),
    })
}
