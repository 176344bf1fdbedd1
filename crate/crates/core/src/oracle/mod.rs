//! Bounded bisimulation on closed types.
//!
//! A closed type is observed constructor by constructor, unfolding
//! definitions silently. Numeric messages are enumerated over `0..=N`, and
//! a false proposition is a stuck leaf. Two types differ at bound `(d, N)`
//! when some path of at most `d` observations reaches nodes with different
//! observations. Not finding a difference is not a proof of equality.
//!
//! This module only relies on the syntax tree and the arithmetic decision
//! procedure, so it can check the equality algorithm from the outside.

mod partition;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;

use crate::arith::{decide_closed, eval_expr};
use crate::ast::{
    subst_type, unfold, ArithExpr, ArithProp, GroundSubst, Label, SessionType, Signature, Subst,
};

pub use partition::exact_bisimilar;

/// Who sends: the provider (`+`, `*`, `?`, `∃`) or the client.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Send,
    Recv,
}

/// What one node shows an observer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obs {
    Choice(Dir, Vec<Label>),
    Channel(Dir),
    Close,
    /// A proposition and its truth value; false is a stuck leaf.
    Prop(Dir, bool),
    Numeral(Dir),
}

impl fmt::Display for Obs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obs::Choice(d, ls) => {
                write!(
                    f,
                    "{}{{{}}}",
                    if *d == Dir::Send { "+" } else { "&" },
                    ls.join(", ")
                )
            }
            Obs::Channel(Dir::Send) => f.write_str("*"),
            Obs::Channel(Dir::Recv) => f.write_str("-o"),
            Obs::Close => f.write_str("1"),
            Obs::Prop(d, v) => write!(f, "{}{{{v}}}", if *d == Dir::Send { "?" } else { "!" }),
            Obs::Numeral(Dir::Send) => f.write_str("?num"),
            Obs::Numeral(Dir::Recv) => f.write_str("!num"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObsStep {
    Label(Label),
    Fst,
    Snd,
    /// Past a true proposition.
    Cont,
    Num(BigInt),
}

impl fmt::Display for ObsStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsStep::Label(l) => write!(f, "{l}"),
            ObsStep::Fst => f.write_str("fst"),
            ObsStep::Snd => f.write_str("snd"),
            ObsStep::Cont => f.write_str("cont"),
            ObsStep::Num(i) => write!(f, "#{i}"),
        }
    }
}

/// A path to a node where the two sides are observably different.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<ObsStep>,
    pub left: Obs,
    pub right: Obs,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        writeln!(
            f,
            "path: {}",
            if path.is_empty() {
                "(root)".to_string()
            } else {
                path.join(" . ")
            }
        )?;
        writeln!(f, "left: {}", self.left)?;
        write!(f, "right: {}", self.right)
    }
}

/// Finite unfolding of a closed type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObsTree {
    Choice(Dir, Vec<(Label, ObsTree)>),
    Channel(Dir, Box<ObsTree>, Box<ObsTree>),
    Close,
    /// `Some` continuation when the proposition holds.
    Prop(Dir, Option<Box<ObsTree>>),
    Numeral(Dir, Vec<ObsTree>),
    Cutoff,
}

/// Unfolds `t` until it shows a constructor. Index arguments are evaluated.
fn whnf(sig: &Signature, t: &SessionType) -> SessionType {
    let mut t = t.clone();
    // contractive definitions make this terminate; the bound guards
    // against signatures that were never validated
    for _ in 0..=sig.len() {
        match &t {
            SessionType::Var(..) => t = unfold(sig, &ground(&t)).unwrap_or(SessionType::One),
            _ => return t,
        }
    }
    t
}

/// `V[ē]` with every index evaluated to a numeral.
fn ground(t: &SessionType) -> SessionType {
    match t {
        SessionType::Var(n, args) => SessionType::Var(
            n.clone(),
            args.iter()
                .map(|e| {
                    eval_expr(e, &GroundSubst::new())
                        .map(ArithExpr::Const)
                        .unwrap_or_else(|_| e.clone())
                })
                .collect(),
        ),
        other => other.clone(),
    }
}

fn truth(p: &ArithProp) -> bool {
    decide_closed(p).unwrap_or(false)
}

fn observe(t: &SessionType) -> Obs {
    match t {
        SessionType::Plus(bs) => Obs::Choice(Dir::Send, sorted_labels(bs)),
        SessionType::With(bs) => Obs::Choice(Dir::Recv, sorted_labels(bs)),
        SessionType::Tensor(..) => Obs::Channel(Dir::Send),
        SessionType::Lolli(..) => Obs::Channel(Dir::Recv),
        SessionType::One | SessionType::Var(..) => Obs::Close,
        SessionType::Assert(p, _) => Obs::Prop(Dir::Send, truth(p)),
        SessionType::Assume(p, _) => Obs::Prop(Dir::Recv, truth(p)),
        SessionType::Exists(..) => Obs::Numeral(Dir::Send),
        SessionType::Forall(..) => Obs::Numeral(Dir::Recv),
    }
}

fn sorted_labels(bs: &[(Label, SessionType)]) -> Vec<Label> {
    let mut ls: Vec<Label> = bs.iter().map(|(l, _)| l.clone()).collect();
    ls.sort();
    ls.dedup();
    ls
}

fn instantiate(v: &str, body: &SessionType, i: &BigInt) -> SessionType {
    let s: Subst = [(v.to_string(), ArithExpr::Const(i.clone()))].into();
    subst_type(body, &s)
}

/// The continuation reached by one step from a constructor, if the step is
/// possible there.
fn follow(t: &SessionType, step: &ObsStep) -> Option<SessionType> {
    match (t, step) {
        (SessionType::Plus(bs) | SessionType::With(bs), ObsStep::Label(l)) => {
            bs.iter().find(|(l2, _)| l2 == l).map(|(_, a)| a.clone())
        }
        (SessionType::Tensor(a, _) | SessionType::Lolli(a, _), ObsStep::Fst) => Some((**a).clone()),
        (SessionType::Tensor(_, b) | SessionType::Lolli(_, b), ObsStep::Snd) => Some((**b).clone()),
        (SessionType::Assert(p, a) | SessionType::Assume(p, a), ObsStep::Cont) => {
            truth(p).then(|| (**a).clone())
        }
        (SessionType::Exists(v, a) | SessionType::Forall(v, a), ObsStep::Num(i)) => {
            Some(instantiate(v, a, i))
        }
        _ => None,
    }
}

/// The steps available below a node, in a fixed order.
fn steps(t: &SessionType, numerals: u64) -> Vec<ObsStep> {
    match t {
        SessionType::Plus(bs) | SessionType::With(bs) => {
            sorted_labels(bs).into_iter().map(ObsStep::Label).collect()
        }
        SessionType::Tensor(..) | SessionType::Lolli(..) => vec![ObsStep::Fst, ObsStep::Snd],
        SessionType::Assert(p, _) | SessionType::Assume(p, _) => {
            if truth(p) {
                vec![ObsStep::Cont]
            } else {
                Vec::new()
            }
        }
        SessionType::Exists(..) | SessionType::Forall(..) => (0..=numerals)
            .map(|i| ObsStep::Num(BigInt::from(i)))
            .collect(),
        _ => Vec::new(),
    }
}

pub fn obs_tree(sig: &Signature, t: &SessionType, depth: usize, numerals: u64) -> ObsTree {
    stacker::maybe_grow(64 * 1024, 8 * 1024 * 1024, || {
        if depth == 0 {
            return ObsTree::Cutoff;
        }
        let t = whnf(sig, t);
        let sub = |a: &SessionType| obs_tree(sig, a, depth - 1, numerals);
        match &t {
            SessionType::Plus(bs) | SessionType::With(bs) => {
                let dir = if matches!(t, SessionType::Plus(_)) {
                    Dir::Send
                } else {
                    Dir::Recv
                };
                let mut kids: Vec<(Label, ObsTree)> =
                    bs.iter().map(|(l, a)| (l.clone(), sub(a))).collect();
                kids.sort_by(|a, b| a.0.cmp(&b.0));
                ObsTree::Choice(dir, kids)
            }
            SessionType::Tensor(a, b) => {
                ObsTree::Channel(Dir::Send, Box::new(sub(a)), Box::new(sub(b)))
            }
            SessionType::Lolli(a, b) => {
                ObsTree::Channel(Dir::Recv, Box::new(sub(a)), Box::new(sub(b)))
            }
            SessionType::One | SessionType::Var(..) => ObsTree::Close,
            SessionType::Assert(p, a) => {
                ObsTree::Prop(Dir::Send, truth(p).then(|| Box::new(sub(a))))
            }
            SessionType::Assume(p, a) => {
                ObsTree::Prop(Dir::Recv, truth(p).then(|| Box::new(sub(a))))
            }
            SessionType::Exists(v, a) | SessionType::Forall(v, a) => {
                let dir = if matches!(t, SessionType::Exists(..)) {
                    Dir::Send
                } else {
                    Dir::Recv
                };
                ObsTree::Numeral(
                    dir,
                    (0..=numerals)
                        .map(|i| sub(&instantiate(v, a, &BigInt::from(i))))
                        .collect(),
                )
            }
        }
    })
}

/// Looks for a difference within `depth` observations, numerals `0..=N`.
pub fn bisim_bounded(
    sig: &Signature,
    a: &SessionType,
    b: &SessionType,
    depth: usize,
    numerals: u64,
) -> Option<Trace> {
    let mut search = Search {
        sig,
        numerals,
        clean: HashMap::new(),
    };
    let mut path = Vec::new();
    search.compare(a, b, depth, &mut path)
}

struct Search<'a> {
    sig: &'a Signature,
    numerals: u64,
    /// Pairs of instantiations already found clean up to some depth.
    clean: HashMap<(SessionType, SessionType), usize>,
}

impl Search<'_> {
    fn compare(
        &mut self,
        a: &SessionType,
        b: &SessionType,
        depth: usize,
        path: &mut Vec<ObsStep>,
    ) -> Option<Trace> {
        stacker::maybe_grow(64 * 1024, 8 * 1024 * 1024, || {
            self.compare_inner(a, b, depth, path)
        })
    }

    fn compare_inner(
        &mut self,
        a: &SessionType,
        b: &SessionType,
        depth: usize,
        path: &mut Vec<ObsStep>,
    ) -> Option<Trace> {
        if depth == 0 {
            return None;
        }
        let key = (ground(a), ground(b));
        let memo = a.is_var() || b.is_var();
        if memo && self.clean.get(&key).is_some_and(|&d| d >= depth) {
            return None;
        }
        let a = whnf(self.sig, a);
        let b = whnf(self.sig, b);
        let (oa, ob) = (observe(&a), observe(&b));
        if oa != ob {
            return Some(Trace {
                steps: path.clone(),
                left: oa,
                right: ob,
            });
        }
        for step in steps(&a, self.numerals) {
            let (Some(a2), Some(b2)) = (follow(&a, &step), follow(&b, &step)) else {
                continue;
            };
            path.push(step);
            let r = self.compare(&a2, &b2, depth - 1, path);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
        if memo {
            let e = self.clean.entry(key).or_insert(0);
            *e = (*e).max(depth);
        }
        None
    }
}

/// Why a trace did not replay.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {index} ({step}) is not available on the {side} side")]
    Blocked {
        index: usize,
        step: String,
        side: &'static str,
    },
    #[error("no difference at the end of the trace: both sides show {0}")]
    Same(String),
}

/// Follows `steps` from both roots and reports the two observations at the
/// end, which must differ.
pub fn replay(
    sig: &Signature,
    a: &SessionType,
    b: &SessionType,
    steps: &[ObsStep],
) -> Result<(Obs, Obs), ReplayError> {
    let mut a = a.clone();
    let mut b = b.clone();
    for (index, step) in steps.iter().enumerate() {
        let wa = whnf(sig, &a);
        let wb = whnf(sig, &b);
        a = follow(&wa, step).ok_or_else(|| ReplayError::Blocked {
            index,
            step: step.to_string(),
            side: "left",
        })?;
        b = follow(&wb, step).ok_or_else(|| ReplayError::Blocked {
            index,
            step: step.to_string(),
            side: "right",
        })?;
    }
    let oa = observe(&whnf(sig, &a));
    let ob = observe(&whnf(sig, &b));
    if oa == ob {
        return Err(ReplayError::Same(oa.to_string()));
    }
    Ok((oa, ob))
}
