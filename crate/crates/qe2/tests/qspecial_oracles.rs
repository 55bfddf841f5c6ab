use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use qe2::identities::{verify, IdentityId, Params, Status};
use qe2::qcore::{Cx, CxExt, PrecisionCtx, QParam, Real};
use qe2::qspecial::{
    bessel_j, kummer_1f1, q_bessel, q_bessel_via_kummer, q_kummer, q_kummer_exact, q_laguerre, q_laguerre_continued,
    QKummerArgs,
};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rpow(x: &BigRational, n: i64) -> BigRational {
    if n >= 0 {
        (0..n).fold(BigRational::one(), |a, _| a * x)
    } else {
        BigRational::one() / rpow(x, -n)
    }
}

fn poch(a: &BigRational, q: &BigRational, k: u64) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, i| acc * (BigRational::one() - a * rpow(q, i as i64)))
}

/// Σ_{k≤s} q^{k(k−1)/2} (q^{−s};q)_k / ((q;q)_k (b;q)_k) ((1−q)x)^k in exact rationals.
fn brute_kummer(s: u64, b: &BigRational, x: &BigRational, q: &BigRational) -> BigRational {
    let a = rpow(q, -(s as i64));
    let y = (BigRational::one() - q) * x;
    (0..=s)
        .map(|k| {
            rpow(q, (k * k.saturating_sub(1) / 2) as i64) * poch(&a, q, k) / (poch(q, q, k) * poch(b, q, k))
                * rpow(&y, k as i64)
        })
        .fold(BigRational::zero(), |acc, t| acc + t)
}

fn to_real(x: &BigRational) -> Real {
    Real::from_ratio(x)
}

fn rel(a: &Cx, b: &Cx) -> f64 {
    let d = (a.clone() - b.clone()).abs().to_f64();
    let s = a.abs().to_f64().max(b.abs().to_f64());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

#[test]
fn terminating_kummer_exact_and_term_count() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    for (qs, qr) in [("1/2", r(1, 2)), ("2/3", r(2, 3)), ("3/10", r(3, 10))] {
        let q = QParam::parse(qs).unwrap();
        for s in 0..7u64 {
            for (b, x) in [(r(1, 4), r(3, 1)), (r(-2, 5), r(1, 7)), (r(5, 3), r(-2, 1))] {
                let want = brute_kummer(s, &b, &x, &qr);
                let got = q_kummer_exact(s, &Complex::new(b.clone(), BigRational::zero()), &Complex::new(x.clone(), BigRational::zero()), &q)
                    .unwrap();
                assert_eq!(got, Complex::new(want.clone(), BigRational::zero()), "q={qs} s={s}");
                let f = q_kummer(&QKummerArgs::terminating(s, Cx::real(to_real(&b)), Cx::real(to_real(&x))), &q, &ctx).unwrap();
                assert_eq!(f.terms_used, s as usize + 1);
                assert!(rel(&f.value, &Cx::real(to_real(&want))) < 1e-40);
            }
        }
    }
}

#[test]
fn float_kummer_detects_termination_from_value() {
    // a = q^{-3} given as a plain value still stops after 4 terms
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    let q = QParam::parse("1/2").unwrap();
    let a = Cx::real(Real::from_i64(8));
    let f = q_kummer(&QKummerArgs::new(a, Cx::real(Real::parse("0.3").unwrap()), Cx::real(Real::one())), &q, &ctx).unwrap();
    assert_eq!(f.terms_used, 4);
}

/// x^k/(k)_q! Σ_i q^{i(i−1)/2} ((q−1)(1−q) q x²)^i / ((q;q)_i (q^{1+k};q)_i), summed directly.
fn bessel_direct(k: i64, x: f64, q: f64) -> f64 {
    let fact: f64 = (1..=k).map(|i| (1.0 - q.powi(i as i32)) / (1.0 - q)).product();
    let y = (q - 1.0) * (1.0 - q) * q * x * x;
    let b = q.powi(1 + k as i32);
    let mut sum = 0.0;
    let (mut pq, mut pb, mut yi) = (1.0, 1.0, 1.0);
    for i in 0..200 {
        sum += q.powi(i * (i - 1) / 2) * yi / (pq * pb);
        pq *= 1.0 - q.powi(i + 1);
        pb *= 1.0 - b * q.powi(i);
        yi *= y;
    }
    x.powi(k as i32) / fact * sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn q_bessel_matches_direct_series(k in 0i64..6, x in 0.0f64..3.0, qi in 0usize..3) {
        let qf = [0.3, 0.5, 0.8][qi];
        let ctx = PrecisionCtx::default();
        let _g = ctx.enter();
        let q = QParam::from_f64(qf).unwrap();
        let v = q_bessel(k, &Cx::from_f64(x, 0.0), &q, &ctx).unwrap();
        let w = bessel_direct(k, x, q.to_f64());
        prop_assert!((v.value.re.to_f64() - w).abs() <= 1e-12 * w.abs().max(1e-300) + 1e-14);
        let via = q_bessel_via_kummer(k, &Cx::from_f64(x, 0.0), &q, &ctx).unwrap();
        prop_assert!(rel(&v.value, &via.value) < 1e-12);
    }
}

/// (q^{α+1};q)_n/(q;q)_n · Φ^q(q^{−n}, q^{α+1}; q^{α+1+n} x), exact.
fn laguerre_exact(n: u64, alpha: i64, x: &BigRational, q: &BigRational) -> BigRational {
    let b = rpow(q, alpha + 1);
    poch(&b, q, n) / poch(q, q, n) * brute_kummer(n, &b, &(rpow(q, alpha + 1 + n as i64) * x), q)
}

#[test]
fn q_laguerre_matches_exact_composition() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    for (qs, qr) in [("1/2", r(1, 2)), ("4/5", r(4, 5))] {
        let q = QParam::parse(qs).unwrap();
        for n in 0..=10u64 {
            for alpha in 0..4i64 {
                let x = r(3, 2);
                let want = Cx::real(to_real(&laguerre_exact(n, alpha, &x, &qr)));
                let got = q_laguerre(n, alpha, &Cx::real(to_real(&x)), &q, &ctx).unwrap();
                assert!(rel(&got.value, &want) < 1e-12, "q={qs} n={n} alpha={alpha}");
                let cont = q_laguerre_continued(n, alpha, &Cx::real(to_real(&x)), &q, &ctx).unwrap();
                assert!(rel(&cont.value, &want) < 1e-12);
            }
        }
    }
}

#[test]
fn negative_alpha_pole_is_reported() {
    let ctx = PrecisionCtx::default();
    let q = QParam::parse("1/2").unwrap();
    assert!(q_laguerre(3, -2, &Cx::from_f64(0.5, 0.0), &q, &ctx).is_err());
    assert!(q_laguerre_continued(3, -2, &Cx::from_f64(0.5, 0.0), &q, &ctx).is_ok());
}

#[test]
fn classical_values() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    // 1F1(−2; 2; 1) = 1 − 1 + 1/6
    let v = kummer_1f1(&Real::from_i64(-2), &Real::from_i64(2), &Cx::real(Real::one()), &ctx).unwrap();
    assert!(rel(&v.value, &Cx::real(Real::one() / Real::from_i64(6))) < 1e-45);
    // 1F1(a; a; x) = e^x
    let v = kummer_1f1(&Real::parse("0.7").unwrap(), &Real::parse("0.7").unwrap(), &Cx::from_f64(1.5, 0.0), &ctx).unwrap();
    assert!(rel(&v.value, &Cx::real(Real::parse("1.5").unwrap().exp())) < 1e-45);
    // J_0(1), J_1(1), J_3(2.5) from tables
    for (k, x, want) in [(0, 1.0, 0.765_197_686_557_966_6), (1, 1.0, 0.440_050_585_744_933_5), (3, 2.5, 0.216_600_391_039_113_5)] {
        let v = bessel_j(k, &Cx::from_f64(x, 0.0), &ctx).unwrap().value.re.to_f64();
        assert!((v - want).abs() < 1e-15, "J_{k}({x}) = {v}");
    }
    // J_{−k} = (−1)^k J_k
    let a = bessel_j(-3, &Cx::from_f64(1.2, 0.0), &ctx).unwrap().value;
    let b = bessel_j(3, &Cx::from_f64(1.2, 0.0), &ctx).unwrap().value;
    assert!((a + b).abs().to_f64() < 1e-45);
}

#[test]
fn kummer_limit_example_value() {
    let ctx = PrecisionCtx::default();
    let p = Params::new().with("m", 2).with("j", 1).with("lambda", 1);
    let r = verify(IdentityId::LimitQTo1Kummer, &p, &ctx).unwrap();
    let target = r.rhs.0.re.to_f64();
    assert!((target - 1.0 / 6.0).abs() < 1e-15);
    // first-order convergence in 1 − q: halving 1 − q halves the error
    assert!(r.discrepancy_note.contains("10:7.272e-3"), "{}", r.discrepancy_note);
    assert_eq!(r.status, Status::FAIL);
}

#[test]
fn kummer_limit_errors_shrink_along_sequence() {
    let ctx = PrecisionCtx::default();
    let mut non_monotone = Vec::new();
    for m in 0..=4 {
        for j in 0..=3 {
            let p = Params::new().with("m", m).with("j", j).with("lambda", 1);
            let r = verify(IdentityId::LimitQTo1Kummer, &p, &ctx).unwrap();
            if m == 0 {
                assert_eq!(r.status, Status::PASS);
                continue;
            }
            let errs: Vec<f64> = r
                .discrepancy_note
                .split('[')
                .nth(1)
                .unwrap()
                .trim_end_matches(|c| c != ']')
                .trim_end_matches(']')
                .split(' ')
                .map(|t| t.split(':').nth(1).unwrap().parse().unwrap())
                .collect();
            assert!(errs.last().unwrap() < &(errs[0] / 4.0), "m={m} j={j}: {errs:?}");
            if errs.windows(2).any(|w| w[1] > w[0]) {
                non_monotone.push((m, j));
            }
        }
    }
    // these two curves cross zero early in the sequence
    assert_eq!(non_monotone, [(3, 1), (4, 0)]);
}
