//! Elementary symmetric functions of geometric progressions with one term
//! removed.
//!
//! `σ(i, j, n; x)` is the sum of `x^(h₁+⋯+h_i)` over all `i`-subsets of
//! `{0, …, n−1} \ {j}`, i.e. the `i`-th elementary symmetric function of the
//! powers `x^h`, `h ≠ j`. The production path uses the one-term-at-a-time
//! recurrence; [`sigma_bruteforce`] enumerates subsets and exists as an
//! independent oracle.

use std::cmp::Ordering;

use itertools::Itertools;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Subset-count ceiling for [`sigma_bruteforce`].
pub const BRUTEFORCE_MAX_SUBSETS: u64 = 1_000_000;
/// Dimension ceiling for [`sigma_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 20;

#[derive(Clone, Debug)]
pub struct SigmaQuery<T> {
    /// Subset size.
    pub i: usize,
    /// Excluded exponent.
    pub j: usize,
    /// Matrix dimension.
    pub n: usize,
    /// Evaluation point, positive.
    pub x: T,
}

impl<T: Scalar> SigmaQuery<T> {
    pub fn new(i: usize, j: usize, n: usize, x: T) -> Self {
        SigmaQuery { i, j, n, x }
    }

    fn validate(&self) -> Result<()> {
        check_indices(self.i, self.j, self.n)?;
        match self.x.signum() {
            Some(Ordering::Greater) => Ok(()),
            _ => Err(Error::Domain("evaluation point must be positive".into())),
        }
    }
}

pub(crate) fn check_indices(i: usize, j: usize, n: usize) -> Result<()> {
    if n == 0 || i >= n || j >= n {
        return Err(Error::Domain(format!(
            "indices out of range: need 0 <= i, j < n, got i={i}, j={j}, n={n}"
        )));
    }
    Ok(())
}

/// `e_0, …, e_max_k` of `{x^h : 0 <= h < n, h != j}` by the recurrence
/// `e_k <- e_k + x^h e_(k-1)`, sweeping `h` upward.
pub fn elementary_excluding<T: Scalar>(x: &T, j: usize, n: usize, max_k: usize) -> Vec<T> {
    let mut e = vec![x.zero_like(); max_k + 1];
    e[0] = x.one_like();
    let mut power = x.one_like();
    for h in 0..n {
        if h != j {
            let top = max_k.min(h + 1);
            for k in (1..=top).rev() {
                let term = power.mul(&e[k - 1]);
                e[k] = e[k].add(&term);
            }
        }
        if h + 1 < n {
            power = power.mul(x);
        }
    }
    e
}

/// `σ(i, j, n; x)` in `O(n·i)` ring operations.
///
/// Enclosures with `x > 1` are evaluated through the complement identity
/// `σ(i, j, n; x) = x^(n(n−1)/2 − j) σ(n−1−i, j, n; 1/x)` so that the
/// recurrence only ever sums terms below one.
pub fn sigma_finite<T: Scalar>(q: &SigmaQuery<T>) -> Result<T> {
    q.validate()?;
    let one = q.x.one_like();
    if matches!(T::BACKEND, crate::scalar::Backend::Rigorous)
        && q.x.compare(&one) == Some(Ordering::Greater)
    {
        let inv = q.x.recip()?;
        let k = q.n - 1 - q.i;
        let e = elementary_excluding(&inv, q.j, q.n, k);
        let scale = q.x.pow(complement_exponent(q.n, q.j));
        return Ok(scale.mul(&e[k]));
    }
    Ok(elementary_excluding(&q.x, q.j, q.n, q.i).swap_remove(q.i))
}

/// `n(n−1)/2 − j`, the exponent sum of the full complement set.
pub fn complement_exponent(n: usize, j: usize) -> u64 {
    (n * (n - 1) / 2 - j) as u64
}

/// `σ(i, j, n; x)` by explicit enumeration of all `i`-subsets.
pub fn sigma_bruteforce<T: Scalar>(q: &SigmaQuery<T>) -> Result<T> {
    q.validate()?;
    if q.n > BRUTEFORCE_MAX_N {
        return Err(Error::Size(format!(
            "n = {} exceeds {}",
            q.n, BRUTEFORCE_MAX_N
        )));
    }
    let count = binomial(q.n as u64 - 1, q.i as u64);
    if count > BRUTEFORCE_MAX_SUBSETS {
        return Err(Error::Size(format!(
            "{count} subsets exceed {BRUTEFORCE_MAX_SUBSETS}"
        )));
    }
    let exps: Vec<usize> = (0..q.n).filter(|&h| h != q.j).collect();
    let powers: Vec<T> = (0..q.n * q.n)
        .scan(q.x.one_like(), |p, _| {
            let cur = p.clone();
            *p = p.mul(&q.x);
            Some(cur)
        })
        .collect();
    let total = exps
        .iter()
        .combinations(q.i)
        .map(|subset| subset.into_iter().sum::<usize>())
        .fold(q.x.zero_like(), |acc, s| acc.add(&powers[s]));
    Ok(total)
}

/// `(σ(n−i−1, j, n; b) / b^(n(n−1)/2 − j), σ(i, j, n; 1/b))`; the two
/// components are equal by the subset-complement bijection.
pub fn sigma_complement_pair<T: Scalar>(i: usize, j: usize, n: usize, b: &T) -> Result<(T, T)> {
    check_indices(i, j, n)?;
    let upper = sigma_finite(&SigmaQuery::new(n - 1 - i, j, n, b.clone()))?;
    let lhs = upper.div(&b.pow(complement_exponent(n, j)))?;
    let rhs = sigma_finite(&SigmaQuery::new(i, j, n, b.recip()?))?;
    Ok((lhs, rhs))
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}
