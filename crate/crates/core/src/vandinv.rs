//! Closed-form inverses of geometric Vandermonde matrices.
//!
//! Column `j` of `V(1, b, …, b^(n−1))⁻¹` holds the coefficients of the
//! Lagrange basis polynomial `∏_{h≠j} (X − b^h)/(b^j − b^h)`, so
//!
//! ```text
//! c(i, j) = (−1)^(n−1−i) σ(n−1−i, j, n; b) / ∏_{h≠j} (b^j − b^h)
//! ```
//!
//! and one elementary-symmetric sweep per column yields the whole column.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::scalar::{decimal, Backend, Ball, BaseSpec, BaseValue, Real, Scalar};
use crate::symfunc::{check_indices, elementary_excluding, sigma_finite, SigmaQuery};
use crate::{Error, Result};

/// Largest dimension accepted by [`gaussian_inverse`].
pub const GAUSSIAN_MAX_N: usize = 64;

/// `V(b⁰, b¹, …, b^(n−1))` for a validated base `b > 1`.
#[derive(Clone, Debug)]
pub struct GeometricVandermonde {
    base: BaseSpec,
    value: BaseValue,
    n: usize,
}

impl GeometricVandermonde {
    pub fn new(base: BaseSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        let value = base.value()?;
        Ok(GeometricVandermonde { base, value, n })
    }

    pub fn base(&self) -> &BaseSpec {
        &self.base
    }

    pub fn value(&self) -> &BaseValue {
        &self.value
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.value.backend()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    GaussianOracle,
}

/// Dense signed inverse, row-major.
#[derive(Clone, Debug)]
pub struct InverseMatrix<T> {
    n: usize,
    entries: Vec<T>,
    provenance: Provenance,
}

impl<T: Scalar> InverseMatrix<T> {
    fn from_columns(n: usize, columns: Vec<Vec<T>>, provenance: Provenance) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for col in &columns {
                entries.push(col[i].clone());
            }
        }
        InverseMatrix {
            n,
            entries,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        T::BACKEND
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `entries[i][j]` agrees with `entries[j][i]` for every pair.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).agrees(self.get(j, i))))
    }

    /// First entry whose sign is not certified to be `(−1)^(i+j)`.
    pub fn checkerboard_violation(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                let want = if (i + j) % 2 == 0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
                if self.get(i, j).signum() != Some(want) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn magnitudes(&self) -> Vec<Real> {
        self.entries.iter().map(|e| e.abs().to_real()).collect()
    }
}

/// Inverse in whichever backend the base calls for.
#[derive(Clone, Debug)]
pub enum AnyInverse {
    Exact(InverseMatrix<BigRational>),
    Rigorous(InverseMatrix<Ball>),
}

impl AnyInverse {
    pub fn n(&self) -> usize {
        match self {
            AnyInverse::Exact(m) => m.n(),
            AnyInverse::Rigorous(m) => m.n(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            AnyInverse::Exact(_) => Backend::Exact,
            AnyInverse::Rigorous(_) => Backend::Rigorous,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Real {
        match self {
            AnyInverse::Exact(m) => Real::Exact(m.get(i, j).clone()),
            AnyInverse::Rigorous(m) => Real::Enclosure(m.get(i, j).clone()),
        }
    }

    /// `|c(i, j)|` for all entries, row-major.
    pub fn magnitudes(&self) -> Vec<Real> {
        match self {
            AnyInverse::Exact(m) => m.magnitudes(),
            AnyInverse::Rigorous(m) => m.magnitudes(),
        }
    }

    fn cell(&self, i: usize, j: usize, digits: usize) -> (String, Option<String>) {
        match self.entry(i, j) {
            Real::Exact(r) => (decimal::format_fraction(&r), None),
            Real::Enclosure(b) => (
                decimal::format_significant(&b.mid_rational(), digits),
                Some(decimal::format_radius(&b.rad_rational())),
            ),
        }
    }

    /// `{n, base, backend, entries}` with row-major decimal strings; rigorous
    /// matrices add a parallel `radii` array.
    pub fn to_json(&self, base: &BaseSpec, digits: usize) -> Value {
        let n = self.n();
        let cells: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.cell(i, j, digits))
            .collect();
        let mut obj = json!({
            "n": n,
            "base": base.to_string(),
            "backend": self.backend(),
            "entries": cells.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
        });
        if self.backend() == Backend::Rigorous {
            obj["radii"] = json!(cells
                .iter()
                .map(|c| c.1.clone().unwrap_or_default())
                .collect::<Vec<_>>());
        }
        obj
    }

    fn rows_with(&self, digits: usize, sep: &str) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| match self.cell(i, j, digits) {
                    (v, None) => v,
                    (v, Some(r)) => format!("{v}±{r}"),
                })
                .collect();
            out.push_str(&row.join(sep));
            out.push('\n');
        }
        out
    }

    /// One line per matrix row, comma separated.
    pub fn to_csv(&self, digits: usize) -> String {
        self.rows_with(digits, ",")
    }

    pub fn to_text(&self, digits: usize) -> String {
        self.rows_with(digits, "  ")
    }
}

fn check_base_gt_one<T: Scalar>(b: &T) -> Result<()> {
    match b.compare(&b.one_like()) {
        Some(Ordering::Greater) => Ok(()),
        _ => Err(Error::Domain("base must exceed 1".into())),
    }
}

/// `∏_{h≠j} |b^j − b^h|`.
pub fn pi_product<T: Scalar>(j: usize, n: usize, b: &T) -> Result<T> {
    check_indices(0, j, n)?;
    Ok(signed_node_product(j, n, b).abs())
}

/// `∏_{h≠j} (b^j − b^h)`, the Lagrange denominator with its sign.
pub fn signed_node_product<T: Scalar>(j: usize, n: usize, b: &T) -> T {
    let bj = b.pow(j as u64);
    (0..n)
        .filter(|&h| h != j)
        .fold(b.one_like(), |acc, h| acc.mul(&bj.sub(&b.pow(h as u64))))
}

/// `∏_{h≠j} |b^(j−h) − 1| = ∏_{s=1..j} (b^s − 1) · ∏_{t=1..n−1−j} (1 − b^−t)`.
pub fn reduced_node_product<T: Scalar>(j: usize, n: usize, b: &T) -> Result<T> {
    check_indices(0, j, n)?;
    let one = b.one_like();
    let q = b.recip()?;
    let mut acc = one.clone();
    let mut bp = one.clone();
    for _ in 1..=j {
        bp = bp.mul(b);
        acc = acc.mul(&bp.sub(&one));
    }
    let mut qp = one.clone();
    for _ in 1..(n - j) {
        qp = qp.mul(&q);
        acc = acc.mul(&one.sub(&qp));
    }
    Ok(acc)
}

fn checkerboard<T: Scalar>(i: usize, j: usize, magnitude: T) -> T {
    if (i + j) % 2 == 0 {
        magnitude
    } else {
        magnitude.neg()
    }
}

/// Signed entry `c(i, j)` of the inverse.
///
/// Exact values follow the Vieta expansion directly (sign included).
/// Enclosures use `|c(i, j)| = σ(i, j, n; 1/b) / ∏_{h≠j} |b^(j−h) − 1|`,
/// which keeps every intermediate of moderate size, with sign `(−1)^(i+j)`.
pub fn inverse_entry<T: Scalar>(i: usize, j: usize, n: usize, b: &T) -> Result<T> {
    check_indices(i, j, n)?;
    check_base_gt_one(b)?;
    match T::BACKEND {
        Backend::Exact => {
            let k = n - 1 - i;
            let sigma = sigma_finite(&SigmaQuery::new(k, j, n, b.clone()))?;
            let value = sigma.div(&signed_node_product(j, n, b))?;
            Ok(if k % 2 == 0 { value } else { value.neg() })
        }
        Backend::Rigorous => {
            let q = b.recip()?;
            let sigma = sigma_finite(&SigmaQuery::new(i, j, n, q))?;
            let mag = sigma.div(&reduced_node_product(j, n, b)?)?;
            Ok(checkerboard(i, j, mag))
        }
    }
}

/// Closed-form inverse over a generic scalar, one symmetric-function sweep
/// per column (columns in parallel).
pub fn inverse_matrix_with<T: Scalar>(b: &T, n: usize) -> Result<InverseMatrix<T>> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    check_base_gt_one(b)?;
    let columns: Result<Vec<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<Vec<T>> {
            match T::BACKEND {
                Backend::Exact => {
                    let e = elementary_excluding(b, j, n, n - 1);
                    let den = signed_node_product(j, n, b);
                    (0..n)
                        .map(|i| {
                            let k = n - 1 - i;
                            let v = e[k].div(&den)?;
                            Ok(if k % 2 == 0 { v } else { v.neg() })
                        })
                        .collect()
                }
                Backend::Rigorous => {
                    let q = b.recip()?;
                    let e = elementary_excluding(&q, j, n, n - 1);
                    let den = reduced_node_product(j, n, b)?.recip()?;
                    Ok((0..n).map(|i| checkerboard(i, j, e[i].mul(&den))).collect())
                }
            }
        })
        .collect();
    Ok(InverseMatrix::from_columns(
        n,
        columns?,
        Provenance::ClosedForm,
    ))
}

/// Exact inverse for a rational base `p/q`, computed over the integers.
///
/// With `y_h = p^h q^(n−1−h)` the nodes are `y_h / q^(n−1)`, and
/// `c(i, j) = (−1)^(n−1−i) e_(n−1−i)(y_h, h≠j) q^((n−1)i) / ∏_{h≠j}(y_j − y_h)`,
/// so only the final division per entry touches rationals.
pub fn inverse_matrix_exact(b: &BigRational, n: usize) -> Result<InverseMatrix<BigRational>> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if *b <= BigRational::one() {
        return Err(Error::Domain("base must exceed 1".into()));
    }
    let (p, q) = (b.numer().clone(), b.denom().clone());
    let mut y = Vec::with_capacity(n);
    for h in 0..n {
        y.push(num_traits::pow(p.clone(), h) * num_traits::pow(q.clone(), n - 1 - h));
    }
    let q_pow_row: Vec<BigInt> = {
        let step = num_traits::pow(q.clone(), n - 1);
        let mut v = Vec::with_capacity(n);
        let mut acc = BigInt::one();
        for _ in 0..n {
            v.push(acc.clone());
            acc *= &step;
        }
        v
    };
    let columns: Vec<Vec<BigRational>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![BigInt::zero(); n];
            e[0] = BigInt::one();
            let mut seen = 0;
            for (h, yh) in y.iter().enumerate() {
                if h == j {
                    continue;
                }
                seen += 1;
                for k in (1..=seen).rev() {
                    let t = yh * &e[k - 1];
                    e[k] += t;
                }
            }
            let den = (0..n)
                .filter(|&h| h != j)
                .fold(BigInt::one(), |acc, h| acc * (&y[j] - &y[h]));
            (0..n)
                .map(|i| {
                    let k = n - 1 - i;
                    let num = &e[k] * &q_pow_row[i];
                    let num = if k % 2 == 0 { num } else { -num };
                    BigRational::new(num, den.clone())
                })
                .collect()
        })
        .collect();
    Ok(InverseMatrix::from_columns(
        n,
        columns,
        Provenance::ClosedForm,
    ))
}

/// Closed-form inverse: exact for rational bases, enclosures at `bits` of
/// working precision otherwise.
pub fn inverse_matrix(gv: &GeometricVandermonde, bits: u32) -> Result<AnyInverse> {
    match gv.value() {
        BaseValue::Exact(b) => Ok(AnyInverse::Exact(inverse_matrix_exact(b, gv.n())?)),
        v => Ok(AnyInverse::Rigorous(inverse_matrix_with(
            &v.enclose(bits),
            gv.n(),
        )?)),
    }
}

/// `V[r][c] = b^(r c)`.
pub fn vandermonde<T: Scalar>(b: &T, n: usize) -> Vec<Vec<T>> {
    let mut rows = Vec::with_capacity(n);
    let mut node = b.one_like();
    for _ in 0..n {
        let mut row = Vec::with_capacity(n);
        let mut p = b.one_like();
        for _ in 0..n {
            row.push(p.clone());
            p = p.mul(&node);
        }
        rows.push(row);
        node = node.mul(b);
    }
    rows
}

/// Exact inverse by Gauss–Jordan elimination with partial pivoting; an
/// oracle independent of the closed form.
pub fn gaussian_inverse(gv: &GeometricVandermonde) -> Result<InverseMatrix<BigRational>> {
    let b = gv
        .value()
        .as_exact()
        .ok_or_else(|| Error::UnsupportedBackend("Gaussian oracle needs a rational base".into()))?;
    let n = gv.n();
    if n > GAUSSIAN_MAX_N {
        return Err(Error::Size(format!("n = {n} exceeds {GAUSSIAN_MAX_N}")));
    }
    let mut a = vandermonde(b, n);
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    if r == c {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| Signed::abs(&a[x][col]).cmp(&Signed::abs(&a[y][col])))
            .expect("nonempty range");
        if a[pivot][col].is_zero() {
            return Err(Error::Domain("singular matrix".into()));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col].recip();
        for c in 0..n {
            a[col][c] *= &scale;
            inv[col][c] *= &scale;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let da = &f * &a[col][c];
                a[r][c] -= da;
                let di = &f * &inv[col][c];
                inv[r][c] -= di;
            }
        }
    }
    Ok(InverseMatrix {
        n,
        entries: inv.into_iter().flatten().collect(),
        provenance: Provenance::GaussianOracle,
    })
}

/// `max |(V · inv − I)[r][c]|`.
pub fn residual_norm<T: Scalar>(b: &T, inv: &InverseMatrix<T>) -> Result<T> {
    let n = inv.n();
    let v = vandermonde(b, n);
    let mut worst = b.zero_like();
    for (r, vrow) in v.iter().enumerate() {
        for c in 0..n {
            let mut acc = b.zero_like();
            for (k, vk) in vrow.iter().enumerate() {
                acc = acc.add(&vk.mul(inv.get(k, c)));
            }
            if r == c {
                acc = acc.sub(&b.one_like());
            }
            worst = worst.max_with(&acc.abs());
        }
    }
    Ok(worst)
}

/// [`residual_norm`] for a matrix built against `gv`.
pub fn residual_norm_for(gv: &GeometricVandermonde, inv: &AnyInverse, bits: u32) -> Result<Real> {
    if inv.n() != gv.n() {
        return Err(Error::Domain(format!(
            "dimension mismatch: matrix {} vs base matrix {}",
            inv.n(),
            gv.n()
        )));
    }
    match inv {
        AnyInverse::Exact(m) => {
            let b = gv.value().as_exact().ok_or_else(|| {
                Error::UnsupportedBackend("exact matrix for an irrational base".into())
            })?;
            Ok(Real::Exact(residual_norm(b, m)?))
        }
        AnyInverse::Rigorous(m) => {
            let b = gv.value().enclose(bits);
            Ok(Real::Enclosure(residual_norm(&b, m)?))
        }
    }
}

/// `(b^(n+j−1) − b^(n−2)) / (b^(n−1) − b^j)`, the ratio `π(j+1, n)/π(j, n)`.
pub fn pi_ratio<T: Scalar>(j: usize, n: usize, b: &T) -> Result<T> {
    if n < 2 || j + 1 >= n {
        return Err(Error::Domain(format!(
            "need 0 <= j < n − 1, got j={j}, n={n}"
        )));
    }
    let num = b.pow((n + j - 1) as u64).sub(&b.pow((n - 2) as u64));
    let den = b.pow((n - 1) as u64).sub(&b.pow(j as u64));
    Ok(num.div(&den)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn exact(b: BigRational, n: usize) -> InverseMatrix<BigRational> {
        inverse_matrix_exact(&b, n).unwrap()
    }

    #[test]
    fn pi_products() {
        assert_eq!(pi_product(0, 2, &rat(2, 1)).unwrap(), rat(1, 1));
        assert_eq!(pi_product(1, 3, &rat(2, 1)).unwrap(), rat(2, 1));
        assert_eq!(pi_product(2, 4, &rat(3, 2)).unwrap(), rat(135, 128));
        assert!(pi_product(4, 4, &rat(2, 1)).is_err());
    }

    #[test]
    fn two_by_two_by_hand() {
        let m = exact(rat(2, 1), 2);
        let want = [rat(2, 1), rat(-1, 1), rat(-1, 1), rat(1, 1)];
        assert_eq!(m.entries(), &want);
        assert_eq!(inverse_entry(0, 0, 2, &rat(2, 1)).unwrap(), rat(2, 1));
        assert_eq!(inverse_entry(0, 1, 2, &rat(2, 1)).unwrap(), rat(-1, 1));
        let m = exact(rat(3, 2), 2);
        assert_eq!(m.entries(), &[rat(3, 1), rat(-2, 1), rat(-2, 1), rat(2, 1)]);
    }

    #[test]
    fn one_by_one() {
        for b in [rat(2, 1), rat(13, 10)] {
            assert_eq!(exact(b.clone(), 1).entries(), &[rat(1, 1)]);
            assert_eq!(inverse_matrix_with(&b, 1).unwrap().entries(), &[rat(1, 1)]);
        }
    }

    #[test]
    fn entry_matches_gaussian_oracle() {
        let gv = GeometricVandermonde::new(BaseSpec::rational(2, 1), 3).unwrap();
        let oracle = gaussian_inverse(&gv).unwrap();
        assert_eq!(
            &inverse_entry(1, 1, 3, &rat(2, 1)).unwrap(),
            oracle.get(1, 1)
        );
        let v = vandermonde(&rat(2, 1), 3);
        let row0: Vec<BigRational> = (0..3)
            .map(|c| (0..3).fold(BigRational::zero(), |a, k| a + &v[0][k] * oracle.get(k, c)))
            .collect();
        assert_eq!(row0, vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn three_paths_agree() {
        for (b, n) in [(rat(3, 2), 5), (rat(7, 5), 8)] {
            let fast = exact(b.clone(), n);
            let generic = inverse_matrix_with(&b, n).unwrap();
            let gv = GeometricVandermonde::new(BaseSpec::Rational(b.clone()), n).unwrap();
            let oracle = gaussian_inverse(&gv).unwrap();
            assert_eq!(fast.entries(), generic.entries());
            assert_eq!(fast.entries(), oracle.entries());
            assert_eq!(oracle.provenance(), Provenance::GaussianOracle);
        }
    }

    #[test]
    fn gaussian_requires_rational_base() {
        let gv = GeometricVandermonde::new(BaseSpec::tau(), 3).unwrap();
        assert!(matches!(
            gaussian_inverse(&gv),
            Err(Error::UnsupportedBackend(_))
        ));
    }

    #[test]
    fn exact_residuals_vanish() {
        for (b, n) in [(rat(2, 1), 6), (rat(13, 10), 12)] {
            let m = exact(b.clone(), n);
            assert!(residual_norm(&b, &m).unwrap().is_zero());
        }
    }

    #[test]
    fn rigorous_residual_contains_zero() {
        let gv = GeometricVandermonde::new(BaseSpec::tau(), 6).unwrap();
        let inv = inverse_matrix(&gv, 128).unwrap();
        let res = residual_norm_for(&gv, &inv, 128).unwrap();
        let Real::Enclosure(ball) = res else {
            panic!("expected enclosure")
        };
        assert!(ball.lower() <= crate::scalar::Dyadic::zero());
        assert!(
            ball.upper().to_rational() < crate::scalar::decimal::parse_rational("1e-20").unwrap()
        );
    }

    #[test]
    fn residual_dimension_mismatch() {
        let gv = GeometricVandermonde::new(BaseSpec::rational(2, 1), 4).unwrap();
        let other = GeometricVandermonde::new(BaseSpec::rational(2, 1), 3).unwrap();
        let inv = inverse_matrix(&other, 64).unwrap();
        assert!(matches!(
            residual_norm_for(&gv, &inv, 64),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rigorous_entries_enclose_exact_ones() {
        let b = rat(7, 5);
        let ex = exact(b.clone(), 9);
        let rig = inverse_matrix_with(&Ball::from_rational(&b, 160), 9).unwrap();
        for (e, r) in ex.entries().iter().zip(rig.entries()) {
            assert!(r.contains_rational(e));
        }
        let single = inverse_entry(3, 5, 9, &Ball::from_rational(&b, 160)).unwrap();
        assert!(single.contains_rational(ex.get(3, 5)));
    }

    #[test]
    fn constructor_validation() {
        assert!(GeometricVandermonde::new(BaseSpec::rational(2, 1), 0).is_err());
        assert!(GeometricVandermonde::new(BaseSpec::rational(1, 1), 3).is_err());
        assert!(inverse_matrix_exact(&rat(1, 2), 3).is_err());
    }

    #[test]
    fn serialization_shapes() {
        let gv = GeometricVandermonde::new(BaseSpec::rational(2, 1), 2).unwrap();
        let inv = inverse_matrix(&gv, 64).unwrap();
        assert_eq!(inv.to_csv(20), "2,-1\n-1,1\n");
        let js = inv.to_json(gv.base(), 20);
        assert_eq!(js["entries"], json!(["2", "-1", "-1", "1"]));
        assert_eq!(js["backend"], json!("exact"));
        assert_eq!(js["n"], json!(2));
    }
}
