use proptest::prelude::*;

use qe2::qalgebra::{build_u_constructive, FockBasis};
use qe2::qcore::{Cx, CxExt, PrecisionCtx, QParam, Real};
use qe2::repmatrix::{
    d_elem, f_weight, phi_mn, phi_mn_laguerre, t_elem, t_elem_kummer, t_elem_printed_bessel, u_elem, RepWeight, ZetaPoint,
};

fn rel(a: &Cx, b: &Cx) -> f64 {
    let d = (a.clone() - b.clone()).abs().to_f64();
    let s = a.abs().to_f64().max(b.abs().to_f64());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn w(s: &str) -> RepWeight {
    RepWeight::parse(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn d_elem_selection_rule(j in -6i64..=6, m in 0u64..=12, n in 0u64..=12, qi in 0usize..2) {
        let ctx = PrecisionCtx::default();
        let q = QParam::parse(["1/2", "0.7"][qi]).unwrap();
        let v = d_elem(j, &w("0.4"), m, n, &q, &ctx).unwrap();
        if n as i64 - m as i64 != j {
            prop_assert!(v.value.abs().to_f64() == 0.0);
        }
    }
}

#[test]
fn t_elem_kummer_and_bessel_forms_agree() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    for (i, jcol) in [(0, 2), (1, 1), (4, 1)] {
        for lam in ["0.25", "0.5", "1"] {
            for x in ["0.1", "0.6", "2"] {
                for qs in ["0.3", "0.5", "0.8"] {
                    let q = QParam::parse(qs).unwrap();
                    let x = Real::parse(x).unwrap();
                    let a = t_elem(i, jcol, &w(lam), &x, &q, &ctx).unwrap();
                    let b = t_elem_kummer(i, jcol, &w(lam), &x, &q, &ctx).unwrap();
                    assert!(rel(&a, &b) < 1e-12, "i={i} jcol={jcol} lambda={lam} q={qs}: {}", rel(&a, &b));
                }
            }
        }
    }
}

#[test]
fn printed_bessel_prefactor_off_by_sqrt_q_power() {
    // for jcol > i the displayed q^{-1/4} prefactor differs by q^{(jcol-i)/2}
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    let q = QParam::parse("1/2").unwrap();
    let x = Real::parse("0.6").unwrap();
    let a = t_elem(0, 2, &w("0.5"), &x, &q, &ctx).unwrap();
    let p = t_elem_printed_bessel(0, 2, &w("0.5"), &x, &q, &ctx).unwrap();
    let ratio = p / a;
    assert!(rel(&ratio, &Cx::real(q.pow(-1))) < 1e-40);
    let same = t_elem_printed_bessel(3, 1, &w("0.5"), &x, &q, &ctx).unwrap();
    assert!(rel(&same, &t_elem(3, 1, &w("0.5"), &x, &q, &ctx).unwrap()) < 1e-40);
}

#[test]
fn phi_mn_kummer_and_laguerre_forms_agree() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    for qs in ["0.3", "1/2", "0.8"] {
        let q = QParam::parse(qs).unwrap();
        for x in ["0.2", "1.5"] {
            let x = Real::parse(x).unwrap();
            for n in 0..=8 {
                for m in 0..=n {
                    let a = phi_mn(m, n, &x, &q, &ctx).unwrap().value;
                    let b = phi_mn_laguerre(m, n, &x, &q, &ctx).unwrap().value;
                    assert!(rel(&a, &b) < 1e-12, "q={qs} m={m} n={n}");
                }
            }
        }
    }
}

#[test]
fn u_elem_reproduces_constructive_u() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    for qs in ["0.3", "1/2"] {
        let q = QParam::parse(qs).unwrap();
        let basis = FockBasis::new(20, -2, 24).unwrap();
        let u = build_u_constructive(&basis, &q, &ctx).unwrap();
        let mut worst: f64 = 0.0;
        for m in 0..=10u32 {
            for n in 0..=10u32 {
                for j in 0..=2i64 {
                    let i = j + (m + n) as i64;
                    if !basis.is_interior(m, i) || !basis.is_interior(n, j) {
                        continue;
                    }
                    let closed = u_elem(m as u64, i, n as u64, j, &q, &ctx).unwrap();
                    let d = (closed - u.elem(m, i, n, j)).abs().to_f64();
                    worst = worst.max(d);
                }
            }
        }
        assert!(worst < 1e-20, "q={qs}: {worst:e}");
    }
}

#[test]
fn u_elem_selection_rule() {
    let ctx = PrecisionCtx::default();
    let q = QParam::parse("1/2").unwrap();
    assert_eq!(u_elem(2, 0, 1, 0, &q, &ctx).unwrap().abs().to_f64(), 0.0);
    assert!(u_elem(2, 3, 1, 0, &q, &ctx).unwrap().abs().to_f64() > 0.0);
}

#[test]
fn weight_at_fock_point_matches_value_point() {
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    let q = QParam::parse("0.6").unwrap();
    for j in 0..4u64 {
        for m in 0..5u64 {
            let a = f_weight(j, &w("0.7"), &ZetaPoint::Fock(m), &q, &ctx).unwrap().value;
            let b = f_weight(j, &w("0.7"), &ZetaPoint::value(q.pow(m as i64)).unwrap(), &q, &ctx).unwrap().value;
            assert!(rel(&a, &b) < 1e-40, "j={j} m={m}");
        }
    }
}

#[test]
fn trivial_weight_gives_identity_d() {
    let ctx = PrecisionCtx::default();
    let q = QParam::parse("1/2").unwrap();
    for m in 0..5 {
        let v = d_elem(0, &RepWeight::trivial(), m, m, &q, &ctx).unwrap();
        assert!(rel(&v.value, &Cx::real(Real::from_i64(1))) < 1e-45);
        assert_eq!(d_elem(1, &RepWeight::trivial(), m, m + 1, &q, &ctx).unwrap().value.abs().to_f64(), 0.0);
    }
}
