mod common;

use num_bigint::BigInt;

use rsess::arith::eval_prop;
use rsess::ast::{
    subst_arith, ArithExpr, ArithProp, Closure, GroundSubst, Instance, SessionType, Signature,
};
use rsess::equality::{replay_derivation, Checker, Derivation, EngineConfig, Rule, Verdict};
use rsess::oracle::bisim_bounded;
use rsess::syntax::{parse_query, Query};

fn decl_queries(sig: &Signature) -> Vec<Query> {
    sig.eq_decls()
        .iter()
        .map(|e| Query {
            vars: e.vars.clone(),
            constraint: e.constraint.clone(),
            lhs: e.lhs.to_type(),
            rhs: e.rhs.to_type(),
        })
        .collect()
}

fn swapped(q: &Query) -> Query {
    Query {
        lhs: q.rhs.clone(),
        rhs: q.lhs.clone(),
        ..q.clone()
    }
}

const DIFFERENT: [(&str, &str); 5] = [
    ("bin", "bin[0] == zero"),
    ("intctr", "{x, y} intctr[x][y] == intctr[x+1][y]"),
    ("queue", "{n} queue[n] == fifo[n+1]"),
    ("linlam", "{n} exp[n] == val[n]"),
    ("theorems", "{x, y} sum[x][y] == nat[x]"),
];

#[test]
fn corpus_derivations_replay() {
    let mut replayed = 0;
    for (name, sig) in common::corpus() {
        let checker = Checker::new(&sig, EngineConfig::default());
        for q in decl_queries(&sig) {
            for seeds in [true, false] {
                let (out, internal, closures) = checker.query_with_signature(&q, seeds);
                match out.verdict {
                    Verdict::Equal(p) => {
                        replay_derivation(&internal, &closures, &p.derivation)
                            .unwrap_or_else(|e| panic!("{name} {q}: {e}"));
                        replayed += 1;
                    }
                    v => assert!(!seeds, "{name} {q}: {}", v.word()),
                }
            }
        }
    }
    assert!(replayed > 20);
}

fn intctr_proof() -> (Signature, Vec<Closure>, Derivation) {
    let checker = Checker::new(&common::corpus_file("intctr"), EngineConfig::default());
    let q = parse_query("{x, y} intctr[x][y] == intctr[x+1][y+1]").unwrap();
    let (out, internal, closures) = checker.query_with_signature(&q, false);
    let Verdict::Equal(p) = out.verdict else {
        panic!("intctr is not equal")
    };
    (internal, closures, p.derivation)
}

fn first_def(d: &mut Derivation) -> Option<&mut Derivation> {
    if matches!(d.rule, Rule::Def(_)) {
        return Some(d);
    }
    d.children.iter_mut().find_map(first_def)
}

#[test]
fn tampered_derivations_are_rejected() {
    let (sig, seeds, proof) = intctr_proof();
    replay_derivation(&sig, &seeds, &proof).unwrap();

    let mut refl = proof.clone();
    refl.rule = Rule::Refl;
    refl.children.clear();
    assert!(replay_derivation(&sig, &seeds, &refl).is_err());

    let mut pruned = proof.clone();
    pruned.children.pop();
    assert!(replay_derivation(&sig, &seeds, &pruned).is_err());

    // closing a goal with a closure that nobody recorded
    let mut forged = proof.clone();
    let node = first_def(&mut forged).expect("the proof closes a cycle");
    let Rule::Def(c) = &node.rule else {
        unreachable!()
    };
    let mut other = c.clone();
    other.rhs = Instance::new(&other.rhs.name, vec![]);
    node.rule = Rule::Def(other);
    assert!(replay_derivation(&sig, &seeds, &forged).is_err());

    // a side condition recorded as valid must actually be valid
    let mut weakened = proof;
    let node = first_def(&mut weakened).unwrap();
    let side = node.sides.first_mut().expect("def has a side condition");
    side.prop = side.prop.clone().and(ArithProp::False);
    assert!(replay_derivation(&sig, &seeds, &weakened).is_err());
}

#[test]
fn unit_is_equal_to_itself() {
    let checker = Checker::new(&Signature::default(), EngineConfig::default());
    let q = parse_query("1 == 1").unwrap();
    let (out, sig, seeds) = checker.query_with_signature(&q, true);
    let Verdict::Equal(p) = out.verdict else {
        panic!("1 vs 1")
    };
    assert!(p.derivation.size() <= 2, "{}", p.derivation);
    replay_derivation(&sig, &seeds, &p.derivation).unwrap();
}

/// Ground instances with values ≤ 4 satisfying the query context.
fn instances(q: &Query) -> Vec<GroundSubst> {
    let mut out = vec![GroundSubst::new()];
    for v in &q.vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..=4).map(move |i| {
                    let mut s = s.clone();
                    s.insert(v, BigInt::from(i));
                    s
                })
            })
            .collect();
    }
    out.retain(|s| eval_prop(&q.constraint, s) == Ok(true));
    out
}

fn no_difference(sig: &Signature, q: &Query, a: &SessionType, b: &SessionType) {
    for s in instances(q) {
        let (ga, gb) = (subst_arith(a, &s), subst_arith(b, &s));
        if let Some(t) = bisim_bounded(sig, &ga, &gb, 8, 8) {
            panic!("{ga} vs {gb}:\n{t}");
        }
    }
}

#[test]
fn equal_verdicts_are_reflexive_and_symmetric_on_instances() {
    let mut queries: Vec<(Signature, Query)> = Vec::new();
    for (_, sig) in common::corpus() {
        for q in decl_queries(&sig) {
            queries.push((sig.clone(), q));
        }
    }
    for (file, q) in DIFFERENT {
        queries.push((common::corpus_file(file), parse_query(q).unwrap()));
    }
    for (sig, q) in queries {
        let checker = Checker::new(&sig, EngineConfig::default());
        let there = checker.query(&q, true).verdict;
        let back = checker.query(&swapped(&q), true).verdict;
        // the search itself is not symmetric, but it never contradicts itself
        assert!(!(there.is_equal() && back.is_not_equal()), "{q}");
        assert!(!(there.is_not_equal() && back.is_equal()), "{q}");
        if there.is_equal() {
            no_difference(&sig, &q, &q.lhs, &q.lhs);
            no_difference(&sig, &q, &q.rhs, &q.lhs);
        }
    }
}

#[test]
fn proved_chains_are_transitive_on_instances() {
    let sig = common::corpus_file("bin");
    let checker = Checker::new(&sig, EngineConfig::default());
    let names: Vec<String> = sig
        .defs()
        .iter()
        .filter(|d| d.params.len() == 1)
        .map(|d| d.name.clone())
        .collect();
    let t = |n: &str| SessionType::var(n, vec![ArithExpr::var("n")]);
    let mut chains = 0;
    for a in &names {
        for b in &names {
            for c in &names {
                let ab = Query {
                    vars: vec!["n".into()],
                    constraint: ArithProp::True,
                    lhs: t(a),
                    rhs: t(b),
                };
                let bc = Query {
                    lhs: t(b),
                    rhs: t(c),
                    ..ab.clone()
                };
                if checker.query(&ab, true).verdict.is_equal()
                    && checker.query(&bc, true).verdict.is_equal()
                {
                    no_difference(&sig, &ab, &t(a), &t(c));
                    chains += 1;
                }
            }
        }
    }
    assert!(chains > 0);
}

#[test]
fn seeds_never_lose_proofs() {
    for (name, sig) in common::corpus() {
        let checker = Checker::new(&sig, EngineConfig::default());
        for q in decl_queries(&sig) {
            if checker.query(&q, false).verdict.is_equal() {
                assert!(checker.query(&q, true).verdict.is_equal(), "{name} {q}");
            }
        }
    }
}

#[test]
fn witnesses_satisfy_the_context() {
    for (file, text) in DIFFERENT {
        let checker = Checker::new(&common::corpus_file(file), EngineConfig::default());
        let q = parse_query(text).unwrap();
        let Verdict::NotEqual(c) = checker.query(&q, true).verdict else {
            panic!("{text}")
        };
        let w = c
            .witness
            .as_ref()
            .unwrap_or_else(|| panic!("{text}: no witness"));
        assert_eq!(eval_prop(&c.constraint, w), Ok(true), "{text}: {c}");
        assert_eq!(eval_prop(&q.constraint, w), Ok(true), "{text}: {c}");
    }
}

#[test]
fn budget_is_respected() {
    let sig = common::corpus_file("queue");
    let tight = EngineConfig { max_goals: 2 };
    let checker = Checker::new(&sig, tight);
    let q = parse_query("{n} queue[n] == fifo[n]").unwrap();
    let out = checker.query(&q, false);
    assert!(out.verdict.is_unknown());
    assert!(out.stats.goals <= 3);
}
