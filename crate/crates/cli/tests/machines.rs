//! The curated machines under `corpus/machines`, checked against their manifest.

use std::path::PathBuf;

use rsess::ast::ArithProp;
use rsess::equality::{Checker, EngineConfig};
use rsess::syntax::Query;
use rsess::tcm::{encode, run, Machine, RunResult};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/machines")
}

#[test]
fn manifest_verdicts() {
    let manifest = std::fs::read_to_string(dir().join("manifest.tsv")).unwrap();
    let mut rows = 0;
    for line in manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
    {
        let cols: Vec<&str> = line.split('\t').collect();
        let [file, query, halts, verdict] = cols[..] else {
            panic!("bad manifest line: {line}")
        };
        let m: Machine = std::fs::read_to_string(dir().join(file))
            .unwrap()
            .parse()
            .unwrap();
        for isorec in [false, true] {
            let enc = encode(&m, isorec);
            let q = if query == "open" {
                let (vars, l, r) = enc.open_roots();
                Query {
                    vars,
                    constraint: ArithProp::True,
                    lhs: l.to_type(),
                    rhs: r.to_type(),
                }
            } else {
                let (c1, c2) = query.split_once(',').unwrap();
                let (c1, c2): (u64, u64) = (c1.parse().unwrap(), c2.parse().unwrap());
                let halted = matches!(run(&m, c1, c2, 10_000), RunResult::HaltedAt(_));
                assert_eq!(halted, halts == "yes", "{file} from ({c1}, {c2})");
                let (l, r) = enc.ground_roots(c1, c2);
                Query {
                    vars: vec![],
                    constraint: ArithProp::True,
                    lhs: l.to_type(),
                    rhs: r.to_type(),
                }
            };
            let got = Checker::new(&enc.signature, EngineConfig::default()).query(&q, false);
            assert_eq!(
                got.verdict.word(),
                verdict,
                "{file} {query} (isorec {isorec})"
            );
            if halts == "yes" {
                assert!(!got.verdict.is_equal());
            }
        }
        rows += 1;
    }
    assert!(rows >= 20);
}
