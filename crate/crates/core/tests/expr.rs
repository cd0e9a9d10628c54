//! Property tests for the exact scalar types: polynomial ring axioms,
//! differentiation as a derivation, printing and parsing round trips, and
//! rational function and series arithmetic.

use std::collections::HashMap;

use ambientforge::expr::poly::div_exact;
use ambientforge::expr::{parse_with, q, ParseContext};
use ambientforge::ratfunc::parse_ratfunc;
use ambientforge::series::RhoSeries;
use ambientforge::{Expr, RatFunc, Scalar};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

fn ctx() -> ParseContext {
    ParseContext::new().with_variables(VARS)
}

fn build(terms: &[(i64, i64, u32, u32, u32)]) -> Expr {
    let mut e = Expr::zero();
    for &(n, d, a, b, c) in terms {
        let m = Expr::var("x").pow(a).mul(&Expr::var("y").pow(b)).mul(&Expr::var("z").pow(c));
        e = e.add(&m.scale(&q(n, d)));
    }
    e
}

fn poly() -> impl Strategy<Value = Expr> {
    prop::collection::vec((-6i64..=6, 1i64..=4, 0u32..=3, 0u32..=3, 0u32..=2), 0..5).prop_map(|t| build(&t))
}

fn nonzero_poly() -> impl Strategy<Value = Expr> {
    poly().prop_filter("nonzero", |e| !e.is_zero())
}

fn eval(e: &Expr, p: &[f64; 3]) -> f64 {
    let point: HashMap<String, f64> = VARS.iter().map(|v| v.to_string()).zip(p.iter().copied()).collect();
    ambientforge::expr::eval_num(e, &point, &HashMap::new()).expect("polynomial evaluates")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn addition_is_commutative_and_associative(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.add(&Expr::zero()), a.clone());
        prop_assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn multiplication_is_commutative_associative_and_distributive(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&Expr::one()), a.clone());
        prop_assert!(a.mul(&Expr::zero()).is_zero());
    }

    #[test]
    fn differentiation_is_a_derivation(a in poly(), b in poly(), v in 0usize..3) {
        let v = VARS[v];
        let d = |e: &Expr| e.diff(v).unwrap();
        prop_assert_eq!(d(&a.add(&b)), d(&a).add(&d(&b)));
        prop_assert_eq!(d(&a.mul(&b)), d(&a).mul(&b).add(&a.mul(&d(&b))));
        prop_assert_eq!(d(&a.diff("x").unwrap()), a.diff(v).unwrap().diff("x").unwrap());
    }

    #[test]
    fn printing_then_parsing_is_the_identity(a in poly()) {
        let text = a.to_string();
        prop_assert_eq!(parse_with(&text, &ctx()).unwrap(), a);
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), p in prop::array::uniform3(-2.0f64..2.0)) {
        let close = |u: f64, w: f64| (u - w).abs() <= 1e-9 * (1.0 + u.abs().max(w.abs()));
        prop_assert!(close(eval(&a.mul(&b), &p), eval(&a, &p) * eval(&b, &p)));
        prop_assert!(close(eval(&a.add(&b), &p), eval(&a, &p) + eval(&b, &p)));
    }

    #[test]
    fn exact_division_inverts_multiplication(a in poly(), b in nonzero_poly()) {
        prop_assert_eq!(div_exact(&a.mul(&b), &b), Some(a));
    }

    #[test]
    fn rational_functions_form_a_field(a in poly(), b in nonzero_poly(), c in poly(), d in nonzero_poly()) {
        let x = RatFunc::from_parts(a.clone(), &b).unwrap();
        let y = RatFunc::from_parts(c, &d).unwrap();
        prop_assert_eq!(x.add(&y).sub(&y), x.clone());
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        if !a.is_zero() {
            let inv = x.inv().unwrap();
            prop_assert_eq!(x.mul(&inv), RatFunc::one());
        }
    }

    #[test]
    fn quotient_rule_holds(a in poly(), b in nonzero_poly(), v in 0usize..3) {
        let v = VARS[v];
        let x = RatFunc::from_parts(a.clone(), &b).unwrap();
        let (ra, rb) = (RatFunc::from_expr(a), RatFunc::from_expr(b));
        let want = ra.diff(v).mul(&rb).sub(&ra.mul(&rb.diff(v))).mul(&rb.pow(2).inv().unwrap());
        prop_assert_eq!(x.diff(v), want);
    }

    #[test]
    fn rational_functions_round_trip_through_text(a in poly(), b in nonzero_poly()) {
        let x = RatFunc::from_parts(a, &b).unwrap();
        prop_assert_eq!(parse_ratfunc(&x.to_string(), &ctx()).unwrap(), x);
    }

    #[test]
    fn series_inverse_and_product(cs in prop::collection::vec(-5i64..=5, 1..5), ds in prop::collection::vec(-5i64..=5, 1..5), lead in 1i64..4) {
        let series = |lead: i64, cs: &[i64]| {
            let mut s = RhoSeries::<RatFunc>::constant(RatFunc::from_q(q(lead, 1))).with_trunc(12);
            for (i, c) in cs.iter().enumerate() {
                s.insert(2 * (i as i32 + 1), 0, RatFunc::from_q(q(*c, 1)));
            }
            s
        };
        let s = series(lead, &cs);
        let t = series(1, &ds);
        let inv = s.inv().unwrap();
        let one = s.mul(&inv).sub(&RhoSeries::constant(RatFunc::one()));
        prop_assert!(one.is_zero(), "s * s^-1 - 1 = {}", one);
        prop_assert_eq!(s.mul(&t).trunc(), 12);
        prop_assert_eq!(s.mul(&t).d_rho(), s.d_rho().mul(&t).add(&s.mul(&t.d_rho())));
    }
}
