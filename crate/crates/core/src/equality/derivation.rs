//! Derivation trees and an independent replay of them.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::{Entailment, Solver};
use crate::ast::{
    subst_type, unfold, ArithExpr, ArithProp, Closure, Label, Name, SessionType, Signature, Subst,
};
use crate::syntax::Context;

use super::{conjoin, def_condition, Goal};

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Bot,
    Refl,
    /// Closed by this closure.
    Def(Closure),
    /// Recorded this closure and unfolded both sides.
    Expd(Closure),
    Plus,
    With,
    Tensor,
    Lolli,
    One,
    Assert,
    Assume,
    /// The fresh variable standing for both bound variables.
    Exists(Name),
    Forall(Name),
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Bot => f.write_str("bot"),
            Rule::Refl => f.write_str("refl"),
            Rule::Def(c) => write!(f, "def {}", ClosureDisplay(c)),
            Rule::Expd(_) => f.write_str("expd"),
            Rule::Plus => f.write_str("plus"),
            Rule::With => f.write_str("with"),
            Rule::Tensor => f.write_str("tensor"),
            Rule::Lolli => f.write_str("lolli"),
            Rule::One => f.write_str("one"),
            Rule::Assert => f.write_str("assert"),
            Rule::Assume => f.write_str("assume"),
            Rule::Exists(k) => write!(f, "exists {k}"),
            Rule::Forall(k) => write!(f, "forall {k}"),
        }
    }
}

pub(crate) struct ClosureDisplay<'a>(pub &'a Closure);

impl fmt::Display for ClosureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        write!(
            f,
            "<{}; {} == {}>",
            Context(&c.vars, &c.constraint),
            c.lhs,
            c.rhs
        )
    }
}

/// An arithmetic obligation `𝒱 ; 𝒞 ⊨ φ` and how it was decided.
#[derive(Clone, Debug, PartialEq)]
pub struct SideCondition {
    pub vars: Vec<Name>,
    pub context: ArithProp,
    pub prop: ArithProp,
    pub result: Entailment,
}

impl SideCondition {
    pub(crate) fn new(goal: &Goal, prop: ArithProp, result: Entailment) -> Self {
        SideCondition {
            vars: goal.vars.clone(),
            context: goal.constraint.clone(),
            prop,
            result,
        }
    }
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |= {}", Context(&self.vars, &self.context), self.prop)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub goal: Goal,
    pub rule: Rule,
    pub sides: Vec<SideCondition>,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub(crate) fn leaf(goal: Goal, rule: Rule, sides: Vec<SideCondition>) -> Self {
        Derivation {
            goal,
            rule,
            sides,
            children: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Derivation::depth)
            .max()
            .unwrap_or(0)
    }

    /// Closures recorded by `expd` anywhere in the tree.
    pub fn expansions(&self) -> Vec<&Closure> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            if let Rule::Expd(c) = &d.rule {
                out.push(c);
            }
            stack.extend(d.children.iter().rev());
        }
        out
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = "  ".repeat(indent);
        writeln!(f, "{pad}{}: {}", self.rule, self.goal)?;
        for s in &self.sides {
            writeln!(f, "{pad}  side: {s}")?;
        }
        for c in &self.children {
            c.write(f, indent + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("replay failed at {}: {message}", render_path(.path))]
pub struct ReplayError {
    /// Child indices from the root.
    pub path: Vec<usize>,
    pub message: String,
}

fn render_path(p: &[usize]) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Rechecks every step of a derivation: the rule applies to its goal, the
/// children are exactly the premises, each side condition is re-decided
/// with a fresh solver, and every closure used by `def` is either a seed or
/// was recorded by an `expd` in the same tree.
pub fn replay_derivation(
    sig: &Signature,
    seeds: &[Closure],
    d: &Derivation,
) -> Result<(), ReplayError> {
    let mut allowed: Vec<&Closure> = seeds.iter().collect();
    allowed.extend(d.expansions());
    let r = Replay {
        sig,
        allowed,
        solver: Solver::default(),
    };
    r.node(d, &mut Vec::new())
}

struct Replay<'a> {
    sig: &'a Signature,
    allowed: Vec<&'a Closure>,
    solver: Solver,
}

impl Replay<'_> {
    fn fail<T>(&self, path: &[usize], message: impl Into<String>) -> Result<T, ReplayError> {
        Err(ReplayError {
            path: path.to_vec(),
            message: message.into(),
        })
    }

    fn holds(&self, g: &Goal, prop: &ArithProp, path: &[usize]) -> Result<(), ReplayError> {
        match self.solver.entails(&g.vars, &g.constraint, prop) {
            Entailment::Holds => Ok(()),
            other => self.fail(
                path,
                format!("{} |= {prop} is {other:?}", Context(&g.vars, &g.constraint)),
            ),
        }
    }

    fn premises(
        &self,
        d: &Derivation,
        expected: Vec<Goal>,
        path: &mut Vec<usize>,
    ) -> Result<(), ReplayError> {
        if d.children.len() != expected.len() {
            return self.fail(
                path,
                format!("{} premises, expected {}", d.children.len(), expected.len()),
            );
        }
        for (i, (c, e)) in d.children.iter().zip(expected).enumerate() {
            path.push(i);
            if c.goal != e {
                return self.fail(path, format!("premise {} does not match {}", c.goal, e));
            }
            self.node(c, path)?;
            path.pop();
        }
        Ok(())
    }

    fn node(&self, d: &Derivation, path: &mut Vec<usize>) -> Result<(), ReplayError> {
        for s in &d.sides {
            let now = self.solver.entails(&s.vars, &s.context, &s.prop);
            if now != s.result {
                return self.fail(
                    path,
                    format!("recorded {:?} for {s}, decided {now:?}", s.result),
                );
            }
        }
        stacker::maybe_grow(64 * 1024, 8 * 1024 * 1024, || self.node_inner(d, path))
    }

    fn node_inner(&self, d: &Derivation, path: &mut Vec<usize>) -> Result<(), ReplayError> {
        let g = &d.goal;
        use SessionType as T;
        match &d.rule {
            Rule::Bot => {
                self.holds(g, &ArithProp::False, path)?;
                self.premises(d, Vec::new(), path)
            }
            Rule::Refl => {
                let (Some(l), Some(r)) = (g.lhs.as_instance(), g.rhs.as_instance()) else {
                    return self.fail(path, "refl on a non-instantiation");
                };
                if l.name != r.name || l.args.len() != r.args.len() {
                    return self.fail(path, "refl on different names");
                }
                let eqs = ArithProp::conj(
                    l.args
                        .iter()
                        .zip(&r.args)
                        .map(|(a, b)| ArithProp::eq(a.clone(), b.clone())),
                );
                self.holds(g, &eqs, path)?;
                self.premises(d, Vec::new(), path)
            }
            Rule::Def(c) => {
                let (Some(l), Some(r)) = (g.lhs.as_instance(), g.rhs.as_instance()) else {
                    return self.fail(path, "def on a non-instantiation");
                };
                if c.lhs.name != l.name || c.rhs.name != r.name {
                    return self.fail(path, "def with a closure for other names");
                }
                if !self.allowed.contains(&c) {
                    return self.fail(
                        path,
                        "def with a closure that is neither seeded nor expanded",
                    );
                }
                self.holds(g, &def_condition(c, &l, &r, &g.vars), path)?;
                self.premises(d, Vec::new(), path)
            }
            Rule::Expd(c) => {
                let (Some(l), Some(r)) = (g.lhs.as_instance(), g.rhs.as_instance()) else {
                    return self.fail(path, "expd on a non-instantiation");
                };
                let own = Closure {
                    vars: g.vars.clone(),
                    constraint: g.constraint.clone(),
                    lhs: l,
                    rhs: r,
                };
                if *c != own {
                    return self.fail(path, "expd records a different closure");
                }
                let (Ok(a), Ok(b)) = (unfold(self.sig, &g.lhs), unfold(self.sig, &g.rhs)) else {
                    return self.fail(path, "expd of an undefined name");
                };
                self.premises(d, vec![g.sub(a, b)], path)
            }
            Rule::Plus | Rule::With => {
                let (ls, rs) = match (&d.rule, &g.lhs, &g.rhs) {
                    (Rule::Plus, T::Plus(ls), T::Plus(rs))
                    | (Rule::With, T::With(ls), T::With(rs)) => (ls, rs),
                    _ => return self.fail(path, "choice rule on other constructors"),
                };
                let lset: BTreeSet<&Label> = ls.iter().map(|(l, _)| l).collect();
                let rset: BTreeSet<&Label> = rs.iter().map(|(l, _)| l).collect();
                if lset != rset {
                    return self.fail(path, "label sets differ");
                }
                let expected = ls
                    .iter()
                    .map(|(lab, a)| {
                        let b = &rs
                            .iter()
                            .find(|(l2, _)| l2 == lab)
                            .expect("same label set")
                            .1;
                        g.sub(a.clone(), b.clone())
                    })
                    .collect();
                self.premises(d, expected, path)
            }
            Rule::Tensor | Rule::Lolli => {
                let (a1, a2, b1, b2) = match (&d.rule, &g.lhs, &g.rhs) {
                    (Rule::Tensor, T::Tensor(a1, a2), T::Tensor(b1, b2))
                    | (Rule::Lolli, T::Lolli(a1, a2), T::Lolli(b1, b2)) => (a1, a2, b1, b2),
                    _ => return self.fail(path, "pair rule on other constructors"),
                };
                let expected = vec![
                    g.sub((**a1).clone(), (**b1).clone()),
                    g.sub((**a2).clone(), (**b2).clone()),
                ];
                self.premises(d, expected, path)
            }
            Rule::One => {
                if g.lhs != T::One || g.rhs != T::One {
                    return self.fail(path, "one on other constructors");
                }
                self.premises(d, Vec::new(), path)
            }
            Rule::Assert | Rule::Assume => {
                let (phi, a, psi, b) = match (&d.rule, &g.lhs, &g.rhs) {
                    (Rule::Assert, T::Assert(phi, a), T::Assert(psi, b))
                    | (Rule::Assume, T::Assume(phi, a), T::Assume(psi, b)) => (phi, a, psi, b),
                    _ => return self.fail(path, "proposition rule on other constructors"),
                };
                self.holds(g, &phi.clone().iff(psi.clone()), path)?;
                let child = Goal {
                    vars: g.vars.clone(),
                    constraint: conjoin(&g.constraint, phi),
                    lhs: (**a).clone(),
                    rhs: (**b).clone(),
                };
                self.premises(d, vec![child], path)
            }
            Rule::Exists(k) | Rule::Forall(k) => {
                let (m, a, n, b) = match (&d.rule, &g.lhs, &g.rhs) {
                    (Rule::Exists(_), T::Exists(m, a), T::Exists(n, b))
                    | (Rule::Forall(_), T::Forall(m, a), T::Forall(n, b)) => (m, a, n, b),
                    _ => return self.fail(path, "quantifier rule on other constructors"),
                };
                if g.vars.contains(k) {
                    return self.fail(path, format!("{k} is not fresh"));
                }
                let kv = ArithExpr::Var(k.clone());
                let sa: Subst = [(m.clone(), kv.clone())].into();
                let sb: Subst = [(n.clone(), kv)].into();
                let mut vars = g.vars.clone();
                vars.push(k.clone());
                let child = Goal {
                    vars,
                    constraint: g.constraint.clone(),
                    lhs: subst_type(a, &sa),
                    rhs: subst_type(b, &sb),
                };
                self.premises(d, vec![child], path)
            }
        }
    }
}
