use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use vangeo::extremal::{max_entry, n_zero_exact, PrecisionPolicy};
use vangeo::limits::{corollary_values, finite_j_product, limit_entry, limit_max, Regime};
use vangeo::scalar::decimal::parse_rational;
use vangeo::scalar::{eval_poly_ball, Ball, BaseSpec, NamedConstant, Real};
use vangeo::symfunc::{sigma_bruteforce, sigma_complement_pair, sigma_finite, SigmaQuery};
use vangeo::vandinv::{
    inverse_matrix, inverse_matrix_exact, pi_product, reduced_node_product, GeometricVandermonde,
};

fn r(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn base(s: &str) -> BaseSpec {
    s.parse().unwrap()
}

/// Rationals `p/q` in `(1, 4]` with small numerators.
fn base_above_one() -> impl Strategy<Value = BigRational> {
    (1i64..=12, 1i64..=36).prop_map(|(q, extra)| {
        BigRational::new(BigInt::from(q + extra.min(3 * q)), BigInt::from(q))
    })
}

fn positive_x() -> impl Strategy<Value = BigRational> {
    (1i64..=9, 1i64..=9).prop_map(|(p, q)| BigRational::new(p.into(), q.into()))
}

fn query() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=10).prop_flat_map(|n| (0..n, 0..n, Just(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn recurrence_matches_enumeration((i, j, n) in query(), x in positive_x()) {
        let q = SigmaQuery::new(i, j, n, x);
        prop_assert_eq!(sigma_finite(&q).unwrap(), sigma_bruteforce(&q).unwrap());
    }

    #[test]
    fn sigma_positive((i, j, n) in query(), x in positive_x()) {
        prop_assert!(sigma_finite(&SigmaQuery::new(i, j, n, x)).unwrap().is_positive());
    }

    #[test]
    fn complement_components_equal((i, j, n) in query(), b in base_above_one()) {
        let (lhs, rhs) = sigma_complement_pair(i, j, n, &b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sigma_monotone_in_excluded_index((i, j, n) in query(), x in positive_x()) {
        prop_assume!(j + 1 < n);
        let a = sigma_finite(&SigmaQuery::new(i, j, n, x.clone())).unwrap();
        let b = sigma_finite(&SigmaQuery::new(i, j + 1, n, x.clone())).unwrap();
        if x > BigRational::one() {
            prop_assert!(a >= b);
        } else {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn magnitude_times_node_product_is_sigma(b in base_above_one(), n in 1usize..=9, seed in 0usize..81) {
        let (i, j) = (seed / 9 % n, seed % n);
        let inv = inverse_matrix_exact(&b, n).unwrap();
        let lhs = inv.get(i, j).abs() * pi_product(j, n, &b).unwrap();
        let rhs = sigma_finite(&SigmaQuery::new(n - 1 - i, j, n, b.clone())).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exact_inverse_symmetric_and_checkerboard(b in base_above_one(), n in 1usize..=12) {
        let inv = inverse_matrix_exact(&b, n).unwrap();
        prop_assert!(inv.is_symmetric());
        prop_assert_eq!(inv.checkerboard_violation(), None);
    }

    #[test]
    fn node_product_factorization(b in base_above_one(), n in 1usize..=20, seed in 0usize..20) {
        let j = seed % n;
        let direct = (0..n).filter(|&h| h != j).fold(BigRational::one(), |acc, h| {
            let e = j as i32 - h as i32;
            acc * (pow_i(&b, e) - BigRational::one()).abs()
        });
        prop_assert_eq!(reduced_node_product(j, n, &b).unwrap(), direct);
    }

    #[test]
    fn enclosure_contains_exact_entries(b in base_above_one(), n in 1usize..=8) {
        let exact = inverse_matrix_exact(&b, n).unwrap();
        let rig = vangeo::vandinv::inverse_matrix_with(&Ball::from_rational(&b, 128), n).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(rig.get(i, j).contains_rational(exact.get(i, j)));
            }
        }
    }

    #[test]
    fn n_zero_is_one_iff_at_least_tau(b in base_above_one()) {
        let n0 = n_zero_exact(&b).unwrap();
        let tau_or_more = &b * &b >= &b + BigRational::one();
        prop_assert_eq!(n0 == 1, tau_or_more);
        // least m with b^m >= 1 + 1/b
        let threshold = BigRational::one() + b.recip();
        prop_assert!(pow_i(&b, n0 as i32) >= threshold);
        prop_assert!(pow_i(&b, n0 as i32 - 1) < threshold);
    }
}

fn pow_i(b: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        num_traits::pow(b.clone(), e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

#[test]
fn max_is_attained_and_box_suffices() {
    let policy = PrecisionPolicy::default();
    for b in ["6/5", "13/10", "3/2", "2", "3"] {
        for n in [2, 5, 9, 14] {
            let gv = GeometricVandermonde::new(base(b), n).unwrap();
            let m = max_entry(&gv, policy).unwrap();
            let inv = inverse_matrix_exact(&r(b), n).unwrap();
            let mags: Vec<BigRational> = inv.entries().iter().map(|e| e.abs()).collect();
            let global = mags.iter().max().unwrap().clone();
            assert_eq!(m.max_value, Real::Exact(global.clone()));
            for &(i, j) in &m.argmax {
                assert_eq!(mags[i * n + j], global);
            }
            let k = m.n_zero.min(n - 1);
            let boxed = (0..=k)
                .flat_map(|i| (0..=k).map(move |j| (i, j)))
                .map(|(i, j)| mags[i * n + j].clone())
                .max()
                .unwrap();
            assert_eq!(boxed, global, "b={b} n={n}");
        }
    }
}

#[test]
fn rerun_at_double_precision_nests() {
    for b in ["tau", "alpha"] {
        let gv = GeometricVandermonde::new(base(b), 10).unwrap();
        let coarse = inverse_matrix(&gv, 128).unwrap();
        let fine = inverse_matrix(&gv, 256).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let (c, f) = (
                    coarse.entry(i, j).to_ball(128),
                    fine.entry(i, j).to_ball(256),
                );
                assert!(c.overlaps(&f), "b={b} ({i},{j})");
                assert!(f.rad_rational() <= c.rad_rational());
            }
        }
    }
    let c = BaseSpec::alpha().value().unwrap();
    let (a, b) = (c.enclose(200), c.enclose(400));
    assert!(a.contains_ball(&b) || a.overlaps(&b));
}

#[test]
fn alpha_enclosure_is_a_root() {
    let poly = NamedConstant::Alpha.minimal_polynomial();
    for bits in [64, 256, 1024] {
        let e = NamedConstant::Alpha.enclose(bits);
        assert!(eval_poly_ball(&poly, &e).contains_zero());
    }
}

#[test]
fn rational_bases_round_trip() {
    for s in ["1.4", "7/5", "13/10", "1.25"] {
        let b = base(s).value().unwrap();
        let exact = b.as_exact().unwrap().clone();
        let ball = b.enclose(256);
        if ball.is_exact() {
            assert_eq!(ball.mid_rational(), exact);
        } else {
            assert!(ball.contains_rational(&exact));
        }
    }
    assert_eq!(base("1.4").exact().unwrap(), Some(r("7/5")));
}

#[test]
fn finite_entries_approach_limits() {
    let tol = r("1e-30");
    for b in ["2", "3", "3/2"] {
        let rb = r(b);
        for (i, j) in [(0, 0), (1, 1), (0, 1), (2, 1)] {
            let l = limit_entry(i, j, &base(b), &tol)
                .unwrap()
                .value
                .mid_rational();
            let gap = |n: usize| (inverse_matrix_exact(&rb, n).unwrap().get(i, j).abs() - &l).abs();
            let (g20, g40, g60) = (gap(20), gap(40), gap(60));
            assert!(g40 < g20 && g60 < g40, "b={b} ({i},{j})");
        }
    }
    // frozen after comparing n = 60 with n = 120
    let l = limit_entry(1, 1, &base("2"), &tol).unwrap().value;
    let c60 = inverse_matrix_exact(&r("2"), 60).unwrap().get(1, 1).abs();
    assert!((c60 - l.mid_rational()).abs() <= r("1e-6") + l.rad_rational());
}

#[test]
fn closed_forms_agree_with_limit_max() {
    let tol = r("1e-20");
    for b in ["tau", "5/3", "2", "alpha", "3", "4"] {
        let c = corollary_values(&base(b), &tol).unwrap();
        let m = limit_max(&base(b), &tol, PrecisionPolicy::with_ceiling(512)).unwrap();
        let want = match c.regime {
            Regime::AboveAlpha => &c.l00,
            Regime::BetweenTauAlpha => &c.l11,
            Regime::BelowTau => unreachable!("grid is at least tau"),
        };
        assert!(m.value.overlaps(want), "b={b}");
        let expected = if c.regime == Regime::AboveAlpha {
            (0, 0)
        } else {
            (1, 1)
        };
        assert!(m.argmax.contains(&expected), "b={b} {:?}", m.argmax);
    }
    let a = corollary_values(&base("alpha"), &r("1e-15")).unwrap();
    assert!(a.l00.overlaps(&a.l11));
    assert!(a.ratio.contains_rational(&BigRational::one()));
}

#[test]
fn halving_tolerance_stays_inside() {
    for (b, i, j) in [("2", 1, 1), ("3/2", 1, 2), ("tau", 0, 1), ("1.3", 2, 2)] {
        let mut tol = r("1e-4");
        let mut prev: Option<Ball> = None;
        for _ in 0..12 {
            let v = limit_entry(i, j, &base(b), &tol).unwrap().value;
            if let Some(p) = &prev {
                assert!(p.contains_rational(&v.mid_rational()), "b={b} ({i},{j})");
            }
            prev = Some(v);
            tol /= BigInt::from(2);
        }
    }
}

#[test]
fn j_product_generic_agrees() {
    let b = r("3/2");
    assert_eq!(finite_j_product(2, &b).unwrap(), r("8/5"));
    let ball = finite_j_product(3, &Ball::from_rational(&b, 128)).unwrap();
    assert!(ball.contains_rational(&finite_j_product(3, &b).unwrap()));
    assert!(finite_j_product(0, &b).unwrap().is_one());
}
