use num_bigint::BigInt;
use proptest::prelude::*;

use rsess::arith::{
    affirm_eq, affirm_ge, decide_closed, decide_closed_with, eliminate, eval_expr, eval_prop,
    Entailment, Solver, SolverConfig,
};
use rsess::ast::{ArithExpr, ArithProp, GroundSubst};

const VARS: [&str; 3] = ["a", "b", "c"];

fn expr(vars: &'static [&'static str]) -> impl Strategy<Value = ArithExpr> {
    let term = (-4i64..=4, prop::sample::select(vars))
        .prop_map(|(k, v)| ArithExpr::int(k) * ArithExpr::var(v));
    (0i64..=9, prop::collection::vec(term, 1..=3))
        .prop_map(|(k, ts)| ts.into_iter().fold(ArithExpr::int(k), |acc, t| acc + t))
}

fn atom(vars: &'static [&'static str]) -> impl Strategy<Value = ArithProp> {
    prop_oneof![
        (expr(vars), expr(vars)).prop_map(|(a, b)| ArithProp::eq(a, b)),
        (expr(vars), expr(vars)).prop_map(|(a, b)| ArithProp::gt(a, b)),
        (2u32..=5, expr(vars)).prop_map(|(d, e)| ArithProp::Divides(BigInt::from(d), e)),
    ]
}

fn qf(vars: &'static [&'static str]) -> impl Strategy<Value = ArithProp> {
    atom(vars).prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.prop_map(ArithProp::not),
        ]
    })
}

fn grid(vars: &[&str], bound: i64) -> Vec<GroundSubst> {
    let mut out = vec![GroundSubst::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..=bound).map(move |i| {
                    let mut s = s.clone();
                    s.insert(v, BigInt::from(i));
                    s
                })
            })
            .collect();
    }
    out
}

fn with(s: &GroundSubst, v: &str, i: i64) -> GroundSubst {
    let mut s = s.clone();
    s.insert(v, BigInt::from(i));
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn elimination_preserves_quantifier_free(p in qf(&VARS)) {
        let q = eliminate(&p).unwrap();
        for s in grid(&VARS, 4) {
            prop_assert_eq!(eval_prop(&p, &s), eval_prop(&q, &s));
        }
    }

    #[test]
    fn constant_bound_elimination(p in qf(&VARS), k in 0i64..=9) {
        let bounded = ArithProp::exists("c", ArithProp::ge(ArithExpr::int(k), ArithExpr::var("c")).and(p.clone()));
        let q = eliminate(&bounded).unwrap();
        for s in grid(&["a", "b"], 4) {
            let expected = (0..=k).any(|i| eval_prop(&p, &with(&s, "c", i)) == Ok(true));
            prop_assert_eq!(eval_prop(&q, &s), Ok(expected));
        }
    }

    #[test]
    fn equality_substitution_changes_nothing(p in qf(&["a", "b"]), k in 0i64..=6) {
        // the `a = ...` conjunct gives the substitution pass something to do
        let pinned = ArithProp::eq(ArithExpr::var("a"), ArithExpr::var("b") + ArithExpr::int(k)).and(p);
        let closed = ArithProp::exists("a", ArithProp::exists("b", pinned));
        let plain = SolverConfig { equality_substitution: false, ..SolverConfig::default() };
        if let (Ok(x), Ok(y)) = (decide_closed(&closed), decide_closed_with(&closed, &plain)) {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn entailment_is_sound(c in qf(&["a", "b"]), phi in qf(&["a", "b"])) {
        let vars = vec!["a".to_string(), "b".to_string()];
        let e = Solver::default().entails(&vars, &c, &phi);
        for s in grid(&["a", "b"], 5) {
            if e == Entailment::Holds && eval_prop(&c, &s) == Ok(true) {
                prop_assert_eq!(eval_prop(&phi, &s), Ok(true));
            }
        }
        if e == Entailment::Fails {
            // not valid: some natural assignment satisfies c but not phi
            let counter = c.clone().and(phi.clone().not());
            prop_assert_eq!(Solver::default().satisfiable(&vars, &counter), Some(true));
        }
    }

    #[test]
    fn distributivity_is_affirmed(x in expr(&VARS), y in expr(&VARS), z in expr(&VARS)) {
        let lhs = x.clone() * (y.clone() + z.clone());
        let rhs = x.clone() * y + x * z;
        prop_assert!(affirm_eq(&lhs, &rhs));
    }

    #[test]
    fn affirmed_inequalities_hold(x in expr(&VARS), y in expr(&VARS), z in expr(&VARS)) {
        let lhs = x.clone() * y.clone();
        let rhs = y * z + x;
        if affirm_ge(&lhs, &rhs) {
            for s in grid(&VARS, 3) {
                prop_assert!(eval_expr(&lhs, &s).unwrap() >= eval_expr(&rhs, &s).unwrap());
            }
        }
    }
}

proptest! {
    // these run the full procedure on every case and are slower
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbolic_bound_elimination(p in qf(&VARS)) {
        // c ≤ a + 3 is not a constant bound, so this goes through the full procedure
        let bound = ArithExpr::var("a") + ArithExpr::int(3);
        let bounded = ArithProp::exists("c", ArithProp::ge(bound, ArithExpr::var("c")).and(p.clone()));
        let q = eliminate(&bounded).unwrap();
        for s in grid(&["a", "b"], 4) {
            let a = i64::try_from(s.get("a").unwrap()).unwrap();
            let expected = (0..=a + 3).any(|i| eval_prop(&p, &with(&s, "c", i)) == Ok(true));
            prop_assert_eq!(eval_prop(&q, &s), Ok(expected));
        }
    }

    #[test]
    fn negation_flips_closed_truth(p in qf(&["a", "b"])) {
        let closed = ArithProp::exists("a", ArithProp::forall("b", p));
        // a resource limit is an honest answer; only definite answers are compared
        if let (Ok(yes), Ok(no)) = (decide_closed(&closed), decide_closed(&closed.clone().not())) {
            prop_assert_ne!(yes, no);
        }
    }
}

#[test]
fn shifted_square_bounds() {
    let n = || ArithExpr::var("a");
    let sq = (n() + ArithExpr::int(3)) * (n() + ArithExpr::int(3));
    assert!(affirm_ge(&sq, &ArithExpr::int(9)));
    assert!(affirm_ge(&sq, &(ArithExpr::int(6) * n())));
}
