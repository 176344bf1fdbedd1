mod common;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsess::arith::eval_prop;
use rsess::ast::{ArithExpr, GroundSubst, SessionType, Signature};
use rsess::naming::internalize;
use rsess::oracle::{bisim_bounded, exact_bisimilar, obs_tree};
use rsess::syntax::parse_signature;

/// A random unindexed signature over `t0..`, as source text.
fn unindexed(r: &mut ChaCha8Rng) -> String {
    let n = r.random_range(1..=4);
    let mut out = String::new();
    for i in 0..n {
        // the top level is always a constructor, so definitions are contractive
        out.push_str(&format!("type t{i} = {}\n", body(r, n, 2)));
    }
    out
}

fn body(r: &mut ChaCha8Rng, names: usize, depth: u32) -> String {
    let leaf = depth == 0 || (depth < 2 && r.random_bool(0.3));
    if leaf {
        return if r.random_bool(0.8) {
            format!("t{}", r.random_range(0..names))
        } else {
            "1".to_string()
        };
    }
    match r.random_range(0..4) {
        0 | 1 => {
            let kw = if r.random_bool(0.5) { "+" } else { "&" };
            let mut labels = vec!["a", "b", "c"];
            labels.truncate(r.random_range(1..=3));
            let branches: Vec<String> = labels
                .iter()
                .map(|l| format!("{l}: {}", body(r, names, depth - 1)))
                .collect();
            format!("{kw}{{{}}}", branches.join(", "))
        }
        2 => format!(
            "({}) * ({})",
            body(r, names, depth - 1),
            body(r, names, depth - 1)
        ),
        _ => format!(
            "({}) -o ({})",
            body(r, names, depth - 1),
            body(r, names, depth - 1)
        ),
    }
}

fn name(s: &str) -> SessionType {
    SessionType::var(s, vec![])
}

#[test]
fn bounded_search_agrees_with_partition_refinement() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let mut equal = 0;
    for _ in 0..200 {
        let src = unindexed(&mut r);
        let sig = parse_signature(&src).unwrap().signature;
        let depth = 2 * internalize(&sig).signature.len() + 2;
        let names: Vec<String> = sig.defs().iter().map(|d| d.name.clone()).collect();
        for a in &names {
            for b in &names {
                let exact = exact_bisimilar(&sig, &name(a), &name(b)).unwrap();
                let bounded = bisim_bounded(&sig, &name(a), &name(b), depth, 0).is_none();
                assert_eq!(exact, bounded, "{a} vs {b} at depth {depth} in\n{src}");
                equal += usize::from(exact);
            }
        }
    }
    assert!(equal > 200);
}

#[test]
fn differences_persist_with_depth() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let src = unindexed(&mut r);
        let sig = parse_signature(&src).unwrap().signature;
        let names: Vec<String> = sig.defs().iter().map(|d| d.name.clone()).collect();
        for a in &names {
            for b in &names {
                let mut found = None;
                for d in 0..8 {
                    match (&found, bisim_bounded(&sig, &name(a), &name(b), d, 0)) {
                        (Some(_), None) => {
                            panic!("{a} vs {b}: difference lost at depth {d}\n{src}")
                        }
                        (None, Some(t)) => {
                            assert!(t.steps.len() <= d, "trace longer than depth {d}");
                            found = Some(d);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
}

#[test]
fn corpus_differences_persist_with_depth() {
    let sig = common::corpus_file("bin");
    let zero = name("zero");
    for n in 0..6 {
        let bin = SessionType::var("bin", vec![ArithExpr::int(n)]);
        let shallow = bisim_bounded(&sig, &bin, &zero, 3, 4).is_some();
        let deep = bisim_bounded(&sig, &bin, &zero, 6, 4).is_some();
        assert!(!shallow || deep, "bin[{n}]");
        assert!(deep, "bin[{n}] vs zero");
    }
}

/// Ground instances of every definition with arguments ≤ 4.
fn ground_instances(sig: &Signature) -> Vec<SessionType> {
    let mut out = Vec::new();
    for d in sig.defs() {
        let mut substs = vec![GroundSubst::new()];
        for p in &d.params {
            substs = substs
                .into_iter()
                .flat_map(|s| {
                    (0..=4).map(move |i| {
                        let mut s = s.clone();
                        s.insert(p, BigInt::from(i));
                        s
                    })
                })
                .collect();
        }
        for s in substs {
            if eval_prop(&d.constraint, &s) != Ok(true) {
                continue;
            }
            let args = d
                .params
                .iter()
                .map(|p| ArithExpr::Const(s.get(p).unwrap().clone()))
                .collect();
            out.push(SessionType::var(&d.name, args));
        }
    }
    out
}

#[test]
fn internal_names_do_not_change_behavior() {
    let mut checked = 0;
    for (file, sig) in common::corpus() {
        let internal = internalize(&sig).signature;
        for t in ground_instances(&sig) {
            let before = obs_tree(&sig, &t, 6, 8);
            let after = obs_tree(&internal, &t, 6, 8);
            assert_eq!(before, after, "{file}: {t}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}
