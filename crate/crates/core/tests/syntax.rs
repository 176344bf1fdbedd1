use std::path::PathBuf;

use proptest::prelude::*;

use rsess::ast::{alpha_eq_prop, alpha_eq_type, ArithExpr, ArithProp, SessionType};
use rsess::syntax::{parse_prop, parse_signature, parse_type, print_signature, print_type};

fn expr() -> impl Strategy<Value = ArithExpr> {
    let leaf = prop_oneof![
        (0i64..20).prop_map(ArithExpr::int),
        prop::sample::select(vec!["n", "m"]).prop_map(ArithExpr::var)
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner).prop_map(|(a, b)| a * b),
        ]
    })
}

fn prop() -> impl Strategy<Value = ArithProp> {
    let atom = prop_oneof![
        (expr(), expr()).prop_map(|(a, b)| ArithProp::eq(a, b)),
        (expr(), expr()).prop_map(|(a, b)| ArithProp::gt(a, b)),
        (expr(), expr()).prop_map(|(a, b)| ArithProp::ge(a, b)),
        (2u32..7, expr()).prop_map(|(d, e)| ArithProp::Divides(d.into(), e)),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.clone().prop_map(ArithProp::not),
            inner.prop_map(|p| ArithProp::exists("k", p)),
        ]
    })
}

fn session() -> impl Strategy<Value = SessionType> {
    let leaf = prop_oneof![
        Just(SessionType::One),
        prop::collection::vec(expr(), 0..3).prop_map(|args| SessionType::var("t", args)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let branches = prop::collection::btree_map(
            prop::sample::select(vec!["a", "b", "inc", "x'"]),
            inner.clone(),
            1..4,
        )
        .prop_map(|m| m.into_iter().collect::<Vec<_>>());
        prop_oneof![
            branches.clone().prop_map(SessionType::plus),
            branches.prop_map(SessionType::with),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SessionType::tensor(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SessionType::lolli(a, b)),
            (prop(), inner.clone()).prop_map(|(p, t)| SessionType::assert(p, t)),
            (prop(), inner.clone()).prop_map(|(p, t)| SessionType::assume(p, t)),
            inner.clone().prop_map(|t| SessionType::exists("n", t)),
            inner.prop_map(|t| SessionType::forall("m", t)),
        ]
    })
}

proptest! {
    #[test]
    fn printed_props_parse_back(p in prop()) {
        let text = p.to_string();
        let back = parse_prop(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(alpha_eq_prop(&p, &back), "{} reparsed as {}", text, back);
    }

    #[test]
    fn printed_types_parse_back(t in session()) {
        let text = print_type(&t);
        let back = parse_type(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(alpha_eq_type(&t, &back), "{} reparsed as {}", text, print_type(&back));
        // the parser renames binders that clash with free names, so the
        // printed form is stable from the second round on
        let again = print_type(&back);
        prop_assert_eq!(print_type(&parse_type(&again).unwrap()), again);
    }
}

#[test]
fn corpus_prints_to_a_fixpoint() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|x| x != "rst") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let sig = parse_signature(&text).unwrap().signature;
        let printed = print_signature(&sig);
        let again = parse_signature(&printed)
            .unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()))
            .signature;
        assert_eq!(print_signature(&again), printed, "{}", path.display());
        assert_eq!(again.len(), sig.len());
        assert_eq!(again.eq_decls().len(), sig.eq_decls().len());
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn errors_carry_positions() {
    let err = parse_signature("type a = +{x: 1}\ntype b = &{y: }").unwrap_err();
    let shown = err.to_string();
    assert!(shown.contains("2:"), "{shown}");
}
