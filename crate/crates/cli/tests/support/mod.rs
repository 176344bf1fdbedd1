//! Random signatures, machines and formulas for the acceptance suite.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsess::ast::{ArithExpr, ArithProp, GroundSubst};
use rsess::tcm::{Counter, Instruction, Machine};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
enum Arg {
    Param(usize, i64),
    Zero,
}

#[derive(Clone, Debug)]
enum T {
    Choice(bool, Vec<(String, T)>),
    Pair(bool, Box<T>, Box<T>),
    One,
    Assert(usize, bool, Box<T>),
    Call(usize, Vec<Arg>),
}

const PARAMS: [&str; 2] = ["n", "m"];

struct Shape<'a> {
    arities: &'a [usize],
    arity: usize,
    indexed: bool,
}

fn gen_type(
    r: &mut ChaCha8Rng,
    s: &Shape<'_>,
    depth: usize,
    top: bool,
    guards: &mut Vec<usize>,
) -> T {
    if !top && (depth == 0 || r.random_bool(0.35)) {
        let j = r.random_range(0..s.arities.len());
        let args = (0..s.arities[j])
            .map(|_| {
                if s.arity == 0 || r.random_bool(0.2) {
                    return Arg::Zero;
                }
                let p = r.random_range(0..s.arity);
                let delta = if guards.contains(&p) && r.random_bool(0.5) {
                    -1
                } else if r.random_bool(0.4) {
                    1
                } else {
                    0
                };
                Arg::Param(p, delta)
            })
            .collect();
        return T::Call(j, args);
    }
    let depth = depth.saturating_sub(1);
    let pick = r.random_range(0..10);
    match pick {
        0..=3 => {
            let mut labels = ["a", "b", "c"];
            labels.shuffle(r);
            let k = r.random_range(1..=3);
            let bs = labels[..k]
                .iter()
                .map(|l| (l.to_string(), gen_type(r, s, depth, false, guards)))
                .collect();
            T::Choice(r.random_bool(0.5), bs)
        }
        4 | 5 => {
            let a = gen_type(r, s, depth, false, guards);
            let b = gen_type(r, s, depth, false, guards);
            T::Pair(r.random_bool(0.5), Box::new(a), Box::new(b))
        }
        6 if !top || r.random_bool(0.3) => T::One,
        7..=9 if s.indexed && s.arity > 0 => {
            let p = r.random_range(0..s.arity);
            if r.random_bool(0.6) {
                // guarded decrement
                let zero = gen_type(r, s, depth, false, guards);
                guards.push(p);
                let pos = gen_type(r, s, depth, false, guards);
                guards.pop();
                T::Choice(
                    true,
                    vec![
                        ("z".to_string(), T::Assert(p, false, Box::new(zero))),
                        ("s".to_string(), T::Assert(p, true, Box::new(pos))),
                    ],
                )
            } else {
                let positive = r.random_bool(0.5);
                if positive {
                    guards.push(p);
                }
                let a = gen_type(r, s, depth, false, guards);
                if positive {
                    guards.pop();
                }
                T::Assert(p, positive, Box::new(a))
            }
        }
        _ => {
            let a = gen_type(r, s, depth, false, guards);
            T::Choice(r.random_bool(0.5), vec![("d".to_string(), a)])
        }
    }
}

fn print(t: &T, names: &[String], out: &mut String) {
    match t {
        T::Choice(plus, bs) => {
            out.push_str(if *plus { "+{" } else { "&{" });
            for (i, (l, a)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l);
                out.push_str(": ");
                print(a, names, out);
            }
            out.push('}');
        }
        T::Pair(tensor, a, b) => {
            out.push('(');
            print(a, names, out);
            out.push_str(if *tensor { ") * (" } else { ") -o (" });
            print(b, names, out);
            out.push(')');
        }
        T::One => out.push('1'),
        T::Assert(p, positive, a) => {
            let rel = if *positive { ">" } else { "=" };
            out.push_str(&format!("?{{{} {rel} 0}}. ", PARAMS[*p]));
            print(a, names, out);
        }
        T::Call(j, args) => {
            out.push_str(&names[*j]);
            for a in args {
                let e = match a {
                    Arg::Zero => "0".to_string(),
                    Arg::Param(p, 0) => PARAMS[*p].to_string(),
                    Arg::Param(p, d) if *d > 0 => format!("{}+{d}", PARAMS[*p]),
                    Arg::Param(p, d) => format!("{}-{}", PARAMS[*p], -d),
                };
                out.push_str(&format!("[{e}]"));
            }
        }
    }
}

/// Reorders branches and, with probability `p`, changes one thing that is
/// usually observable.
fn copy(r: &mut ChaCha8Rng, t: &T, p: f64) -> T {
    let mut c = shuffle(r, t);
    if r.random_bool(p) {
        mutate(r, &mut c);
    }
    c
}

fn shuffle(r: &mut ChaCha8Rng, t: &T) -> T {
    match t {
        T::Choice(plus, bs) => {
            let mut bs: Vec<(String, T)> =
                bs.iter().map(|(l, a)| (l.clone(), shuffle(r, a))).collect();
            bs.shuffle(r);
            T::Choice(*plus, bs)
        }
        T::Pair(k, a, b) => T::Pair(*k, Box::new(shuffle(r, a)), Box::new(shuffle(r, b))),
        T::Assert(p, pos, a) => T::Assert(*p, *pos, Box::new(shuffle(r, a))),
        other => other.clone(),
    }
}

fn mutate(r: &mut ChaCha8Rng, t: &mut T) {
    match t {
        T::Choice(plus, bs) => {
            if r.random_bool(0.3) {
                let i = r.random_range(0..bs.len());
                bs[i].0.push('x');
            } else if r.random_bool(0.2) {
                *plus = !*plus;
            } else {
                let i = r.random_range(0..bs.len());
                mutate(r, &mut bs[i].1);
            }
        }
        T::Pair(k, a, b) => {
            if r.random_bool(0.2) {
                *k = !*k;
            } else if r.random_bool(0.5) {
                mutate(r, a);
            } else {
                mutate(r, b);
            }
        }
        T::One => *t = T::Choice(true, vec![("a".to_string(), T::One)]),
        T::Assert(_, _, a) => mutate(r, a),
        T::Call(_, args) => {
            if let Some(Arg::Param(_, d)) = args
                .iter_mut()
                .find(|a| matches!(a, Arg::Param(_, d) if *d >= 0))
            {
                *d = 1 - *d;
            } else {
                *t = T::One;
            }
        }
    }
}

/// A generated signature with queries over it.
pub struct Generated {
    pub source: String,
    pub queries: Vec<String>,
}

/// Up to three definitions `t0..`, each with a reordered and possibly
/// mutated copy `s0..`. With `indexed`, definitions take up to two
/// parameters and use `+1`, guarded `-1`, and `= 0`/`> 0` assertions.
pub fn signature(r: &mut ChaCha8Rng, indexed: bool) -> Generated {
    let k = r.random_range(1..=3);
    let arities: Vec<usize> = (0..k)
        .map(|_| if indexed { r.random_range(0..=2) } else { 0 })
        .collect();
    let base_names: Vec<String> = (0..k).map(|i| format!("t{i}")).collect();
    let copy_names: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let mut bodies = Vec::new();
    for &arity in &arities {
        let shape = Shape {
            arities: &arities,
            arity,
            indexed,
        };
        bodies.push(gen_type(r, &shape, 3, true, &mut Vec::new()));
    }
    let copies: Vec<T> = bodies.iter().map(|b| copy(r, b, 0.4)).collect();
    let mut source = String::new();
    let head = |name: &str, arity: usize| {
        let ps: String = PARAMS[..arity].iter().map(|p| format!("[{p}]")).collect();
        format!("type {name}{ps} = ")
    };
    for (names, bodies) in [(&base_names, &bodies), (&copy_names, &copies)] {
        for (i, b) in bodies.iter().enumerate() {
            source.push_str(&head(&names[i], arities[i]));
            print(b, names, &mut source);
            source.push('\n');
        }
    }
    let ctx = |arity: usize| {
        if arity == 0 {
            String::new()
        } else {
            format!("{{{}}}", PARAMS[..arity].join(", "))
        }
    };
    let args = |arity: usize, shift: i64| -> String {
        PARAMS[..arity]
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 && shift > 0 {
                    format!("[{p}+{shift}]")
                } else {
                    format!("[{p}]")
                }
            })
            .collect()
    };
    let mut queries = Vec::new();
    for i in 0..k {
        let a = arities[i];
        queries.push(format!(
            "{} t{i}{} == s{i}{}",
            ctx(a),
            args(a, 0),
            args(a, 0)
        ));
        if a > 0 {
            queries.push(format!(
                "{} t{i}{} == t{i}{}",
                ctx(a),
                args(a, 0),
                args(a, 1)
            ));
        }
        for (j, &b) in arities.iter().enumerate().take(k) {
            if j != i && b == a {
                queries.push(format!(
                    "{} t{i}{} == s{j}{}",
                    ctx(a),
                    args(a, 0),
                    args(a, 0)
                ));
            }
        }
    }
    if !indexed {
        // every ordered pair of names
        let names: Vec<&String> = base_names.iter().chain(&copy_names).collect();
        queries = Vec::new();
        for a in &names {
            for b in &names {
                queries.push(format!("{a} == {b}"));
            }
        }
    }
    Generated { source, queries }
}

pub fn machine(r: &mut ChaCha8Rng) -> Machine {
    let len = r.random_range(1..=6);
    let target = |r: &mut ChaCha8Rng| r.random_range(1..=len);
    let counter = |r: &mut ChaCha8Rng| {
        if r.random_bool(0.5) {
            Counter::C1
        } else {
            Counter::C2
        }
    };
    let instrs = (0..len)
        .map(|_| match r.random_range(0..10) {
            0..=3 => Instruction::Inc {
                counter: counter(r),
                goto: target(r),
            },
            4..=7 => Instruction::Test {
                counter: counter(r),
                zero: target(r),
                dec: target(r),
            },
            _ => Instruction::Halt,
        })
        .collect();
    Machine::new(instrs).expect("targets in range")
}

// ---------------------------------------------------------------------------
// closed formulas and a brute-force evaluator

/// A closed formula together with the largest value a quantifier needs to
/// range over for brute force to be exact.
pub struct ClosedFormula {
    pub prop: ArithProp,
    pub limit: u64,
}

const GUARD: i64 = 6;

fn linear(r: &mut ChaCha8Rng, vars: &[String]) -> ArithExpr {
    let mut e = ArithExpr::int(r.random_range(-12..=12));
    for v in vars {
        if r.random_bool(0.7) {
            let c = r.random_range(-8..=8);
            e = e + ArithExpr::int(c) * ArithExpr::var(v);
        }
    }
    e
}

fn atom(r: &mut ChaCha8Rng, vars: &[String]) -> ArithProp {
    let e = linear(r, vars);
    let zero = ArithExpr::int(0);
    match r.random_range(0..4) {
        0 => ArithProp::Eq(e, zero),
        1 | 2 => ArithProp::Gt(e, zero),
        _ => ArithProp::Divides(BigInt::from(r.random_range(2..=8)), e),
    }
}

fn qf(r: &mut ChaCha8Rng, vars: &[String], depth: usize) -> ArithProp {
    if depth == 0 || r.random_bool(0.3) {
        return atom(r, vars);
    }
    match r.random_range(0..3) {
        0 => qf(r, vars, depth - 1).and(qf(r, vars, depth - 1)),
        1 => qf(r, vars, depth - 1).or(qf(r, vars, depth - 1)),
        _ => qf(r, vars, depth - 1).not(),
    }
}

/// Quantifiers are guarded by `x ≤ 6`, so brute force over `0..=6` is exact.
fn guarded(r: &mut ChaCha8Rng, vars: &mut Vec<String>, quants: usize) -> ArithProp {
    if quants == 0 || r.random_bool(0.25) {
        return qf(r, vars, 2);
    }
    let x = format!("x{}", vars.len());
    vars.push(x.clone());
    let body = guarded(r, vars, quants - 1);
    vars.pop();
    let within = ArithProp::Gt(ArithExpr::var(&x), ArithExpr::int(GUARD)).not();
    let q = if r.random_bool(0.5) {
        ArithProp::exists(&x, within.and(body))
    } else {
        ArithProp::forall(&x, within.not().or(body))
    };
    if r.random_bool(0.2) {
        q.not()
    } else {
        q
    }
}

pub fn closed_formula(r: &mut ChaCha8Rng) -> ClosedFormula {
    if r.random_bool(0.7) {
        let quants = r.random_range(0..=3);
        ClosedFormula {
            prop: guarded(r, &mut Vec::new(), quants),
            limit: GUARD as u64,
        }
    } else {
        // one unguarded quantifier: with constants ≤ 12 in absolute value
        // and divisors ≤ 8, every atom is constant in sign beyond 13 and
        // periodic with period 840, so 0..=13+840 decides it
        let x = "x".to_string();
        let body = qf(r, std::slice::from_ref(&x), 2);
        let prop = if r.random_bool(0.5) {
            ArithProp::exists(&x, body)
        } else {
            ArithProp::forall(&x, body)
        };
        ClosedFormula {
            prop,
            limit: 13 + 840,
        }
    }
}

fn eval_e(e: &ArithExpr, env: &BTreeMap<String, i64>) -> i64 {
    match e {
        ArithExpr::Const(c) => i64::try_from(c).expect("small"),
        ArithExpr::Var(v) => env[v],
        ArithExpr::Add(a, b) => eval_e(a, env) + eval_e(b, env),
        ArithExpr::Sub(a, b) => eval_e(a, env) - eval_e(b, env),
        ArithExpr::Mul(a, b) => eval_e(a, env) * eval_e(b, env),
    }
}

/// Truth by enumeration, quantifiers over `0..=limit`.
pub fn brute(p: &ArithProp, env: &mut BTreeMap<String, i64>, limit: u64) -> bool {
    match p {
        ArithProp::True => true,
        ArithProp::False => false,
        ArithProp::Eq(a, b) => eval_e(a, env) == eval_e(b, env),
        ArithProp::Gt(a, b) => eval_e(a, env) > eval_e(b, env),
        ArithProp::Divides(d, e) => {
            eval_e(e, env).rem_euclid(i64::try_from(d).expect("small")) == 0
        }
        ArithProp::And(a, b) => brute(a, env, limit) && brute(b, env, limit),
        ArithProp::Or(a, b) => brute(a, env, limit) || brute(b, env, limit),
        ArithProp::Not(a) => !brute(a, env, limit),
        ArithProp::Exists(x, a) | ArithProp::Forall(x, a) => {
            let exists = matches!(p, ArithProp::Exists(..));
            let saved = env.get(x).copied();
            let mut result = !exists;
            for i in 0..=limit as i64 {
                env.insert(x.clone(), i);
                if brute(a, env, limit) == exists {
                    result = exists;
                    break;
                }
            }
            match saved {
                Some(v) => env.insert(x.clone(), v),
                None => env.remove(x),
            };
            result
        }
    }
}

/// Every assignment of `vars` to `0..=bound`.
pub fn assignments(vars: &[String], bound: u64) -> Vec<GroundSubst> {
    let mut out = vec![GroundSubst::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..=bound).map(move |i| {
                    let mut s2 = s.clone();
                    s2.insert(v, BigInt::from(i));
                    s2
                })
            })
            .collect();
    }
    out
}
