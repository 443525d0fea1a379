use super::*;
use crate::rational::{q_int, q_ratio};
use proptest::prelude::*;

fn g(n: i64, d: i64) -> Gamma {
    Gamma::from_ratio(n, d).unwrap()
}

fn x(dim: usize, gamma: Gamma, e: Exp, logpow: u32) -> SPoly {
    SPoly::monomial(dim, gamma, MonomialKey::new(vec![0; dim - 1], e, logpow, 0), q_int(1)).unwrap()
}

fn oracle_half() -> SPoly {
    let gamma = g(1, 2);
    let t = |e: Exp, l: u32, c: Q| (MonomialKey::new(vec![], e, 0, l), c);
    SPoly::from_terms(
        1,
        gamma,
        [
            t(Exp::from_integer(1), 2, q_ratio(1, 2)),
            t(Exp::new(3, 2), 0, q_ratio(-4, 3)),
            t(Exp::new(5, 2), 1, q_ratio(4, 15)),
            t(Exp::from_integer(4), 0, q_ratio(1, 45)),
        ],
    )
    .unwrap()
}

#[test]
fn gamma_validation() {
    assert!(Gamma::from_ratio(2, 1).is_err());
    assert!(Gamma::from_ratio(1, 1).unwrap().is_log_case());
    assert_eq!(g(1, 2).sigma(), Exp::new(3, 4));
    assert_eq!(g(-2, 1).sigma(), Exp::from_integer(2));
    assert_eq!("1/2".parse::<Gamma>().unwrap(), g(1, 2));
    assert!("3/2".parse::<Gamma>().is_err());
}

#[test]
fn monomial_examples() {
    let p = make_monomial(vec![], Exp::new(3, 2), 0, 0, q_ratio(-4, 3), g(1, 2)).unwrap();
    assert_eq!(p.len(), 1);
    assert_eq!(p.coeff(&MonomialKey::new(vec![], Exp::new(3, 2), 0, 0)), Some(&q_ratio(-4, 3)));
    let one = make_monomial(vec![], Exp::zero(), 0, 0, q_int(1), g(1, 2)).unwrap();
    assert_eq!(one.constant_value(), Some(q_int(1)));
    assert!(make_monomial(vec![], Exp::new(1, 2), 1, 0, q_int(1), g(1, 1)).is_ok());
    assert_eq!(
        make_monomial(vec![], Exp::new(1, 2), 1, 0, q_int(1), g(1, 2)),
        Err(SPolyError::InvalidBasis("1/2".into()))
    );
    assert!(make_monomial(vec![], Exp::zero(), 0, 0, q_int(0), g(1, 2)).unwrap().is_empty());
}

#[test]
fn ring_examples() {
    let gamma = g(1, 2);
    let xn = x(1, gamma, Exp::one(), 0);
    assert!(xn.add(&xn.neg()).unwrap().is_empty());
    let xs = x(1, gamma, gamma.sigma(), 0);
    assert_eq!(xs.mul(&xs).unwrap(), x(1, gamma, Exp::new(3, 2), 0));
    let tx1 = SPoly::monomial(2, gamma, MonomialKey::new(vec![1], Exp::zero(), 0, 1), q_int(1)).unwrap();
    let x1 = SPoly::monomial(2, gamma, MonomialKey::new(vec![1], Exp::zero(), 0, 0), q_int(1)).unwrap();
    let expect = SPoly::monomial(2, gamma, MonomialKey::new(vec![2], Exp::zero(), 0, 1), q_int(1)).unwrap();
    assert_eq!(tx1.mul(&x1).unwrap(), expect);
    assert_eq!(xn.add(&x(1, g(0, 1), Exp::one(), 0)), Err(SPolyError::Incompatible));
}

#[test]
fn differentiation_examples() {
    let gamma = g(1, 2);
    let p = x(1, gamma, Exp::new(3, 2), 0);
    assert_eq!(p.differentiate(Direction::Normal).unwrap(), x(1, gamma, Exp::new(1, 2), 0).scale(&q_ratio(3, 2)));

    let lg = g(1, 1);
    let p = x(1, lg, Exp::new(1, 2), 1);
    let expect = x(1, lg, Exp::new(-1, 2), 1).scale(&q_ratio(1, 2)).add(&x(1, lg, Exp::new(-1, 2), 0)).unwrap();
    assert_eq!(p.differentiate(Direction::Normal).unwrap(), expect);

    let u = SPoly::monomial(1, gamma, MonomialKey::new(vec![], Exp::one(), 0, 2), q_ratio(1, 2)).unwrap();
    let ut = SPoly::monomial(1, gamma, MonomialKey::new(vec![], Exp::one(), 0, 1), q_int(1)).unwrap();
    assert_eq!(u.differentiate(Direction::Time).unwrap(), ut);
    assert!(u.differentiate(Direction::Tangential(0)).is_err());
}

#[test]
fn degree_examples() {
    let gamma = g(1, 2);
    assert_eq!(x(1, gamma, Exp::one(), 0).s_degree(), Degree::Finite(Exp::new(4, 3)));
    let x1t = SPoly::monomial(2, gamma, MonomialKey::new(vec![1], Exp::zero(), 0, 1), q_int(1)).unwrap();
    assert_eq!(x1t.s_degree(), Degree::Finite(Exp::from_integer(3)));
    assert_eq!(x(1, gamma, Exp::from_integer(4), 0).s_degree(), Degree::Finite(Exp::new(16, 3)));
    assert_eq!(SPoly::<Q>::zero(1, gamma).s_degree(), Degree::NegInfinity);
}

#[test]
fn truncation_examples() {
    let gamma = g(1, 2);
    let p = oracle_half();
    let kept = p.truncate(Exp::new(5, 2));
    assert_eq!(kept, x(1, gamma, Exp::new(3, 2), 0).scale(&q_ratio(-4, 3)));
    assert_eq!(p.truncate(Exp::from_integer(1000)), p);
    let one = SPoly::constant(1, gamma, q_int(1));
    assert_eq!(one.truncate(Exp::new(1, 2)), one);
    // negative exponents and non-basis exponents never survive
    let bad = x(1, gamma, Exp::new(-1, 4), 0).add(&x(1, gamma, Exp::new(1, 3), 0)).unwrap();
    assert!(bad.truncate(Exp::from_integer(100)).is_empty());
    // gamma = 1: log power bounded by 2e
    let lg = g(1, 1);
    let q = x(1, lg, Exp::new(1, 2), 1).add(&x(1, lg, Exp::new(1, 2), 2)).unwrap();
    assert_eq!(q.truncate(Exp::from_integer(100)), x(1, lg, Exp::new(1, 2), 1));
}

#[test]
fn evaluation_examples() {
    let p = oracle_half();
    assert_eq!(p.evaluate_exact(&[], &q_int(1), &q_int(0)).unwrap(), q_ratio(-59, 45));
    assert!((p.evaluate(&Point::new(vec![], 1.0, 0.0)).unwrap() + 59.0 / 45.0).abs() < 1e-15);
    assert_eq!(SPoly::<Q>::zero(2, g(1, 2)).evaluate(&Point::new(vec![0.3], 0.2, 0.1)).unwrap(), 0.0);
    let s = x(1, g(1, 2), Exp::new(-1, 2), 0);
    assert!(matches!(s.evaluate(&Point::new(vec![], 0.0, 0.0)), Err(SPolyError::Domain { .. })));
    let lg = x(1, g(1, 1), Exp::one(), 1);
    assert!(matches!(lg.evaluate(&Point::new(vec![], 0.0, 0.0)), Err(SPolyError::Domain { .. })));
    assert!(matches!(lg.evaluate_exact(&[], &q_int(1), &q_int(0)), Err(SPolyError::NotExact(_))));
    let v = lg.evaluate(&Point::new(vec![], 0.5, 0.0)).unwrap();
    assert!((v - 0.5 * 0.5_f64.ln()).abs() < 1e-15);
}

#[test]
fn shifted_centers() {
    let gamma = g(1, 2);
    let p = SPoly::monomial(2, gamma, MonomialKey::new(vec![1], Exp::one(), 0, 1), q_int(2)).unwrap();
    let tangential = p.clone().with_center(Point::new(vec![0.5], 0.0, 0.25)).unwrap();
    let v = tangential.evaluate(&Point::new(vec![1.0], 0.5, 1.0)).unwrap();
    assert!((v - 2.0 * 0.5 * 0.5 * 0.75).abs() < 1e-15);
    assert!(tangential.differentiate(Direction::Normal).is_ok());
    let interior = p.clone().with_center(Point::new(vec![0.0], 0.5, 0.0)).unwrap();
    assert_eq!(interior.mul(&interior), Err(SPolyError::ShiftedCenter));
    assert_eq!(interior.differentiate(Direction::Time), Err(SPolyError::ShiftedCenter));
    assert!(interior.evaluate(&Point::new(vec![0.0], 0.75, 1.0)).is_ok());
    let frac = x(1, gamma, Exp::new(3, 2), 0).with_center(Point::new(vec![], 0.5, 0.0)).unwrap();
    assert_eq!(frac.evaluate(&Point::new(vec![], 0.75, 0.0)), Err(SPolyError::ShiftedCenter));
    assert_eq!(tangential.add(&p), Err(SPolyError::Incompatible));
}

#[test]
fn json_round_trip() {
    let p = oracle_half();
    let s = p.to_json_string();
    assert!(s.contains("\"e\":\"3/2\""));
    assert!(s.contains("\"coeff\":\"-4/3\""));
    assert_eq!(SPoly::from_json_str(&s, g(1, 2), None).unwrap(), p);
    let empty = SPoly::<Q>::zero(3, g(0, 1));
    assert_eq!(SPoly::from_json_str(&empty.to_json_string(), g(0, 1), Some(3)).unwrap(), empty);
    assert!(SPoly::from_json_str(r#"[{"beta":[],"e":"1","log":0,"t":0,"coeff":"1","x":1}]"#, g(0, 1), None).is_err());
    assert!(SPoly::from_json_str(r#"[{"beta":[],"e":"1","log":1,"t":0,"coeff":"1"}]"#, g(0, 1), None).is_err());
}

#[test]
fn pretty_printing() {
    assert_eq!(oracle_half().pretty(), "1/2·x_n·t^2 - 4/3·x_n^(3/2) + 4/15·x_n^(5/2)·t + 1/45·x_n^4");
}

const GAMMAS: [(i64, i64); 4] = [(-1, 1), (0, 1), (1, 2), (1, 1)];

fn arb_poly() -> impl Strategy<Value = (usize, Vec<SPoly>)> {
    (0..GAMMAS.len()).prop_flat_map(|gi| {
        let (n, d) = GAMMAS[gi];
        let gamma = g(n, d);
        let maxlog = if gamma.is_log_case() { 2u32 } else { 0 };
        let term = (0u32..3, -2i64..9, 0..=maxlog, 0u32..3, -5i64..6, 1i64..4);
        let poly = proptest::collection::vec(term, 0..5).prop_map(move |ts| {
            SPoly::from_terms(
                2,
                gamma,
                ts.into_iter().map(|(b, e, m, l, cn, cd)| (MonomialKey::new(vec![b], Exp::new(e, 4), m, l), q_ratio(cn, cd))),
            )
            .unwrap()
        });
        proptest::collection::vec(poly, 3).prop_map(move |v| (gi, v))
    })
}

fn sample_point() -> impl Strategy<Value = Point> {
    (-1.0f64..1.0, 0.05f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| Point::new(vec![a], b, c))
}

proptest! {
    #[test]
    fn ring_laws((_, ps) in arb_poly()) {
        let (p, q, r) = (&ps[0], &ps[1], &ps[2]);
        prop_assert_eq!(p.add(q).unwrap(), q.add(p).unwrap());
        prop_assert_eq!(p.mul(q).unwrap(), q.mul(p).unwrap());
        prop_assert_eq!(p.add(q).unwrap().add(r).unwrap(), p.add(&q.add(r).unwrap()).unwrap());
        prop_assert_eq!(p.mul(q).unwrap().mul(r).unwrap(), p.mul(&q.mul(r).unwrap()).unwrap());
        prop_assert_eq!(p.mul(&q.add(r).unwrap()).unwrap(), p.mul(q).unwrap().add(&p.mul(r).unwrap()).unwrap());
        prop_assert!(p.sub(p).unwrap().is_empty());
    }

    #[test]
    fn derivatives_commute((_, ps) in arb_poly()) {
        let dirs = [Direction::Tangential(0), Direction::Normal, Direction::Time];
        for a in dirs {
            for b in dirs {
                let ab = ps[0].differentiate(a).unwrap().differentiate(b).unwrap();
                let ba = ps[0].differentiate(b).unwrap().differentiate(a).unwrap();
                prop_assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn leibniz_rule_in_normal_direction((_, ps) in arb_poly()) {
        let (p, q) = (&ps[0], &ps[1]);
        let lhs = p.mul(q).unwrap().differentiate(Direction::Normal).unwrap();
        let rhs = p.differentiate(Direction::Normal).unwrap().mul(q).unwrap()
            .add(&p.mul(&q.differentiate(Direction::Normal).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn degree_is_additive_on_monomials((_, ps) in arb_poly()) {
        let heads: Vec<SPoly> = ps.iter().filter_map(|p| {
            let (k, c) = p.terms().iter().next()?;
            Some(SPoly::monomial(2, p.gamma(), k.clone(), c.clone()).unwrap())
        }).collect();
        if heads.len() >= 2 {
            let (Degree::Finite(a), Degree::Finite(b)) = (heads[0].s_degree(), heads[1].s_degree()) else { unreachable!() };
            prop_assert_eq!(heads[0].mul(&heads[1]).unwrap().s_degree(), Degree::Finite(a + b));
        }
    }

    #[test]
    fn truncation_is_idempotent((_, ps) in arb_poly(), k in 1i64..30) {
        let kappa = Exp::new(k, 3);
        let once = ps[0].truncate(kappa);
        prop_assert_eq!(once.truncate(kappa), once.clone());
        for key in once.terms().keys() {
            prop_assert!(key.s_degree(once.gamma()) < kappa);
        }
    }

    #[test]
    fn evaluation_is_linear((_, ps) in arb_poly(), x in sample_point()) {
        let (p, q) = (&ps[0], &ps[1]);
        let sum = p.add(q).unwrap();
        let lhs = sum.to_float().evaluate(&x).unwrap();
        let rhs = p.to_float().evaluate(&x).unwrap() + q.to_float().evaluate(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!((sum.evaluate(&x).unwrap() - lhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn exact_evaluation_is_linear((gi, ps) in arb_poly(), a in -4i64..5, b in 1i64..5, c in -4i64..5) {
        prop_assume!(!g(GAMMAS[gi].0, GAMMAS[gi].1).is_log_case());
        // x_n = (b/5)^4 makes every quarter power exact
        let xn = num::pow::pow(q_ratio(b, 5), 4);
        let (xp, t) = ([q_ratio(a, 4)], q_ratio(c, 3));
        let (p, q) = (&ps[0], &ps[1]);
        let lhs = p.add(q).unwrap().evaluate_exact(&xp, &xn, &t).unwrap();
        let rhs = p.evaluate_exact(&xp, &xn, &t).unwrap() + q.evaluate_exact(&xp, &xn, &t).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_round_trips((gi, ps) in arb_poly()) {
        let gamma = g(GAMMAS[gi].0, GAMMAS[gi].1);
        let back = SPoly::from_json_str(&ps[0].to_json_string(), gamma, Some(2)).unwrap();
        prop_assert_eq!(back, ps[0].clone());
    }
}
