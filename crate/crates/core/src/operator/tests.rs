use super::*;
use crate::model::{model_forcing, model_solution};
use crate::rational::{q_from_exp, q_ratio, Exp};
use crate::spoly::MonomialKey;
use num::One;
use proptest::prelude::*;

fn g(n: i64, d: i64) -> Gamma {
    Gamma::from_ratio(n, d).unwrap()
}

fn xpow(gamma: Gamma, e: Exp, logpow: u32) -> SPoly {
    SPoly::monomial(1, gamma, MonomialKey::new(vec![], e, logpow, 0), q_int(1)).unwrap()
}

fn only_b(gamma: Gamma) -> DegenerateOperator {
    DegenerateOperator::constant(gamma, &[vec![q_int(0)]], &[q_int(1)], &q_int(0), 1.0, 1.0).unwrap()
}

#[test]
fn apply_examples() {
    for gamma in [g(-1, 1), g(0, 1), g(1, 2)] {
        let l = DegenerateOperator::model(gamma, 1);
        let two = q_int(2) - q_from_exp(gamma.value());
        let one = q_int(1) - q_from_exp(gamma.value());
        let u = xpow(gamma, Exp::from_integer(2) - gamma.value(), 0);
        assert_eq!(l.apply(&u).unwrap(), SPoly::constant(1, gamma, two * one));
        assert!(l.apply(&xpow(gamma, Exp::one(), 0)).unwrap().is_empty());
    }
    let lg = g(1, 1);
    let l = DegenerateOperator::model(lg, 1);
    assert_eq!(l.apply(&xpow(lg, Exp::one(), 1)).unwrap(), SPoly::constant(1, lg, q_int(1)));
}

#[test]
fn residual_examples() {
    let gamma = g(1, 2);
    let l = DegenerateOperator::model(gamma, 1);
    assert!(l.residual(&model_solution(gamma).unwrap(), &model_forcing(gamma)).unwrap().is_empty());
    let zero = SPoly::zero(1, gamma);
    assert!(l.residual(&zero, &zero).unwrap().is_empty());
    let r = only_b(gamma).residual(&xpow(gamma, Exp::one(), 0), &zero).unwrap();
    assert_eq!(r, xpow(gamma, Exp::one() - gamma.sigma(), 0).neg());
}

#[test]
fn field_coefficients_reject_symbolic_use() {
    let gamma = g(1, 2);
    let l = DegenerateOperator::new(
        gamma,
        vec![vec![Coefficient::field(|_| Ok(1.0), true)]],
        vec![Coefficient::zero(1, gamma)],
        Coefficient::zero(1, gamma),
        1.0,
        1.0,
    )
    .unwrap();
    assert_eq!(l.apply(&xpow(gamma, Exp::one(), 0)), Err(OperatorError::UnsupportedMode));
    let set = l.eval_coefficients(&Point::new(vec![], 0.25, 0.0)).unwrap();
    assert!((set.second[0][0] - 0.25_f64.powf(0.5)).abs() < 1e-15);
}

#[test]
fn coefficient_weights() {
    let a = vec![vec![q_int(2), q_ratio(1, 2)], vec![q_ratio(1, 2), q_int(3)]];
    let b = [q_int(1), q_ratio(-1, 3)];
    let c = q_ratio(-1, 4);
    let l = DegenerateOperator::constant(g(1, 2), &a, &b, &c, 0.5, 4.0).unwrap();
    let x = Point::new(vec![0.2], 0.09, 0.3);
    let s = l.eval_coefficients(&x).unwrap();
    let (wh, wf) = (0.09_f64.powf(0.25), 0.09_f64.powf(0.5));
    assert_eq!(s.second[0][0], 2.0);
    assert!((s.second[0][1] - 0.5 * wh).abs() < 1e-15 && s.second[0][1] == s.second[1][0]);
    assert!((s.second[1][1] - 3.0 * wf).abs() < 1e-15);
    assert!((s.first[1] + wh / 3.0).abs() < 1e-15);
    assert_eq!((s.first[0], s.zeroth, s.singular), (1.0, -0.25, false));
    let one = l.eval_coefficients(&Point::new(vec![0.2], 1.0, 0.3)).unwrap();
    assert_eq!(one.second, vec![vec![2.0, 0.5], vec![0.5, 3.0]]);
    let singular = DegenerateOperator::model(g(-1, 1), 1).eval_coefficients(&Point::new(vec![], 0.0, 0.0)).unwrap();
    assert!(singular.singular && singular.second[0][0].is_nan());
}

#[test]
fn validation() {
    assert!(DegenerateOperator::model(g(1, 2), 2).validate(64, 1).is_ok());
    let pos = DegenerateOperator::constant(g(0, 1), &[vec![q_int(1)]], &[q_int(0)], &q_ratio(1, 10), 1.0, 1.0).unwrap();
    assert!(matches!(pos.validate(16, 1), Err(OperatorError::PositiveReaction { .. })));
    let flat = DegenerateOperator::constant(g(0, 1), &[vec![q_ratio(1, 4)]], &[q_int(0)], &q_int(0), 0.5, 1.0).unwrap();
    assert!(matches!(flat.validate(16, 1), Err(OperatorError::Ellipticity { .. })));
    let big = DegenerateOperator::constant(g(0, 1), &[vec![q_int(1)]], &[q_int(2)], &q_int(-1), 1.0, 2.0).unwrap();
    assert!(matches!(big.validate(16, 1), Err(OperatorError::LowerOrderBound { .. })));
    let nonsym = DegenerateOperator::constant(g(0, 1), &[vec![q_int(1), q_int(0)], vec![q_int(1), q_int(1)]], &[q_int(0), q_int(0)], &q_int(0), 1.0, 2.0);
    assert!(matches!(nonsym, Err(OperatorError::Shape(_))));
}

#[test]
fn exact_matrix_bounds() {
    let a = vec![vec![q_int(1), q_ratio(1, 2)], vec![q_ratio(1, 2), q_int(1)]];
    assert!(constant_2x2_within_bounds(&a, &q_ratio(1, 2), &q_int(2)));
    assert!(!constant_2x2_within_bounds(&a, &q_ratio(3, 5), &q_int(2)));
    assert!(!constant_2x2_within_bounds(&a, &q_ratio(1, 2), &q_ratio(7, 5)));
}

#[test]
fn spec_files() {
    let spec: OperatorSpec = serde_json::from_str(r#"{"gamma": "1/2", "builtin": "model_1d"}"#).unwrap();
    let l = spec.build(None).unwrap();
    assert_eq!((l.dim(), l.gamma()), (1, g(1, 2)));
    let explicit = r#"{
        "gamma": "0",
        "a": [["1", "0"], ["0", [{"beta": [0], "e": "0", "coeff": "1"}, {"beta": [0], "e": "1", "coeff": "1/4"}]]],
        "b": ["1/2", "0"], "c": "-1/4", "lambda": "1/2", "Lambda": "2"
    }"#;
    let l: OperatorSpec = serde_json::from_str(explicit).unwrap();
    let l = l.build(None).unwrap();
    assert_eq!(l.a(1, 1).as_poly().unwrap().len(), 2);
    assert!(l.validate(32, 3).is_ok());
    assert!(serde_json::from_str::<OperatorSpec>(r#"{"gamma": "0", "bogus": 1}"#).is_err());
    assert!(OperatorSpec::builtin("nope").build(Some(g(0, 1))).is_err());
    assert!(OperatorSpec::builtin("model_1d").build(None).is_err());
    let cev = OperatorSpec { volatility: Some("1/2".into()), rate: Some("1/20".into()), ..OperatorSpec::builtin("cev") };
    let cev = cev.build(Some(g(1, 2))).unwrap();
    assert!(cev.validate(32, 5).is_ok());
    // r x u_x on u = x gives r x
    let u = xpow(g(1, 2), Exp::one(), 0);
    let image = cev.apply(&u).unwrap();
    assert_eq!(image, u.scale(&q_ratio(1, 20)).sub(&u.scale(&q_ratio(1, 20))).unwrap());
    let constant_with_terms = r#"{"gamma": "0", "builtin": "constant", "a": [[[{"beta": [], "e": "1", "coeff": "1"}]]], "lambda": "1", "Lambda": "1"}"#;
    let spec: OperatorSpec = serde_json::from_str(constant_with_terms).unwrap();
    assert!(spec.build(None).is_err());
}

fn arb_setup() -> impl Strategy<Value = (DegenerateOperator, SPoly, SPoly)> {
    let gammas = [(-1i64, 1i64), (0, 1), (1, 2), (1, 1)];
    (0..4usize, proptest::collection::vec((0u32..3, 0i64..12, 0u32..3, 0u32..3, -4i64..5), 1..5), proptest::collection::vec((0u32..2, 0i64..9, 0u32..2, 0u32..2, -3i64..4), 1..4), proptest::collection::vec(-3i64..4, 6))
        .prop_map(move |(gi, ut, qt, cs)| {
            let gamma = Gamma::from_ratio(gammas[gi].0, gammas[gi].1).unwrap();
            let mk = |ts: &[(u32, i64, u32, u32, i64)]| {
                SPoly::from_terms(
                    2,
                    gamma,
                    ts.iter().map(|&(b, e, m, l, c)| {
                        let m = if gamma.is_log_case() { m } else { 0 };
                        (MonomialKey::new(vec![b], Exp::new(e, 4), m, l), q_ratio(c, 2))
                    }),
                )
                .unwrap()
            };
            let u = mk(&ut);
            let q = mk(&qt);
            let coef = |k: usize| {
                let base = SPoly::constant(2, gamma, q_ratio(cs[k], 3));
                Coefficient::poly(if k % 2 == 0 { base.add(&q.scale(&q_ratio(1, 5))).unwrap() } else { base })
            };
            let l = DegenerateOperator::new(
                gamma,
                vec![vec![coef(0), coef(1)], vec![coef(1), coef(2)]],
                vec![coef(3), coef(4)],
                coef(5),
                0.1,
                10.0,
            )
            .unwrap();
            (l, u, q)
        })
}

proptest! {
    #[test]
    fn apply_is_linear((l, u, q) in arb_setup(), k in -5i64..6) {
        let lhs = l.apply(&u.add(&q).unwrap()).unwrap();
        prop_assert_eq!(lhs, l.apply(&u).unwrap().add(&l.apply(&q).unwrap()).unwrap());
        let c = q_ratio(k, 7);
        prop_assert_eq!(l.apply(&u.scale(&c)).unwrap(), l.apply(&u).unwrap().scale(&c));
    }

    #[test]
    fn table_matches_differentiate_and_shift((l, u, _) in arb_setup()) {
        let gamma = l.gamma();
        let t = WeightedDerivativeTable::new(gamma);
        let dn = u.differentiate(Direction::Normal).unwrap();
        prop_assert_eq!(t.apply_normal_second(&u), dn.differentiate(Direction::Normal).unwrap().shift_xn(gamma.value()));
        prop_assert_eq!(t.apply_normal_first(&u), dn.shift_xn(gamma.half()));
        prop_assert_eq!(t.apply_mixed(&u, 0), dn.differentiate(Direction::Tangential(0)).unwrap().shift_xn(gamma.half()));
    }

    #[test]
    fn image_exponents_are_shifted_by_sigma_steps((l, u, _) in arb_setup()) {
        let sigma = l.gamma().sigma();
        let mut coef_exps = std::collections::BTreeSet::new();
        for i in 0..2 {
            for j in 0..2 {
                coef_exps.extend(l.a(i, j).as_poly().unwrap().terms().keys().map(|k| k.e));
            }
            coef_exps.extend(l.b(i).as_poly().unwrap().terms().keys().map(|k| k.e));
        }
        coef_exps.extend(l.c().as_poly().unwrap().terms().keys().map(|k| k.e));
        let mut allowed = std::collections::BTreeSet::new();
        for k in u.terms().keys() {
            for shift in [Exp::from_integer(0), sigma, sigma * 2] {
                for c in &coef_exps {
                    allowed.insert(k.e - shift + c);
                }
            }
        }
        for k in l.apply(&u).unwrap().terms().keys() {
            prop_assert!(allowed.contains(&k.e), "unexpected exponent {}", k.e);
        }
    }

    #[test]
    fn symbolic_and_numeric_assembly_agree((l, u, _) in arb_setup(), x1 in -1.0f64..1.0, xn in 0.1f64..1.0, t in -1.0f64..1.0) {
        let x = Point::new(vec![x1], xn, t);
        let symbolic = l.apply(&u).unwrap().evaluate(&x).unwrap();
        let set = l.eval_coefficients(&x).unwrap();
        let dirs = [Direction::Tangential(0), Direction::Normal];
        let mut numeric = set.zeroth * u.evaluate(&x).unwrap();
        for i in 0..2 {
            let di = u.differentiate(dirs[i]).unwrap();
            numeric += set.first[i] * di.evaluate(&x).unwrap();
            for j in 0..2 {
                numeric += set.second[i][j] * di.differentiate(dirs[j]).unwrap().evaluate(&x).unwrap();
            }
        }
        prop_assert!((symbolic - numeric).abs() <= 1e-10 * (1.0 + symbolic.abs()), "{} vs {}", symbolic, numeric);
    }
}
