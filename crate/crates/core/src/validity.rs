//! Signature validity: contractiveness, distinct names, and constraint
//! respecting instantiations.
//!
//! Each body is walked under the context `𝒱 ; 𝒞` formed by the
//! definition's parameters and constraint. `?{φ}` and `!{φ}` add `φ` to
//! `𝒞`, the quantifiers add their variable to `𝒱`, and every instantiation
//! `V[ē]` must satisfy `𝒱 ; 𝒞 ⊨ φ[ē/n̄]` where `φ` is the constraint of `V`.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::{find_model, Entailment, Solver};
use crate::ast::{
    subst_prop, ArithExpr, ArithProp, FreeVars, GroundSubst, Name, SessionType, Signature, Subst,
};
use crate::syntax::{Context, SourceFile, Span};

/// Countermodel search budget.
const MAX_CANDIDATES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    NotContractive,
    DuplicateDefinition,
    DuplicateParameter,
    UndefinedName,
    Arity,
    UnboundVariable,
    /// The arithmetic refuted an instantiation's constraint.
    Entailment,
    /// The arithmetic could not decide an instantiation's constraint.
    Unverifiable,
}

/// `𝒱 ; 𝒞 ⊨ φ` together with its outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Obligation {
    pub vars: Vec<Name>,
    pub context: ArithProp,
    pub goal: ArithProp,
    pub result: Entailment,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |= {}", Context(&self.vars, &self.context), self.goal)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// The definition (or `eqtype` declaration, by index) where it occurs.
    pub location: Location,
    pub kind: ViolationKind,
    pub message: String,
    pub obligation: Option<Obligation>,
    pub countermodel: Option<GroundSubst>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Def(Name),
    EqDecl(usize),
    Query,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Def(n) => write!(f, "in definition of `{n}`"),
            Location::EqDecl(i) => write!(f, "in eqtype declaration #{}", i + 1),
            Location::Query => f.write_str("in query"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)?;
        if let Some(o) = &self.obligation {
            write!(f, "\n  obligation: {o}")?;
        }
        if let Some(s) = &self.countermodel {
            let parts: Vec<String> = s.0.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            write!(f, "\n  counterexample: {}", parts.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
    /// Entailments proved along the way.
    pub discharged: Vec<Obligation>,
}

impl ValidityReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_definite(&self) -> bool {
        self.violations
            .iter()
            .any(|v| v.kind != ViolationKind::Unverifiable)
    }

    /// 0 accepted, 1 some definite violation, 2 only unverifiable ones.
    pub fn exit_code(&self) -> i32 {
        if self.is_accepted() {
            0
        } else if self.has_definite() {
            1
        } else {
            2
        }
    }

    /// Renders the violations with `line:col` positions from `file`.
    pub fn render(&self, file: &SourceFile) -> String {
        let mut out = String::new();
        for v in &self.violations {
            let span: Option<Span> = match &v.location {
                Location::Def(n) => file.def_span(n),
                Location::EqDecl(i) => file.decl_spans.get(*i).copied(),
                Location::Query => None,
            };
            let label = if v.kind == ViolationKind::Unverifiable {
                "unverifiable"
            } else {
                "error"
            };
            match span {
                Some(s) => out.push_str(&format!("{}:{}: {label}: {v}\n", s.line, s.col)),
                None => out.push_str(&format!("{label}: {v}\n")),
            }
        }
        out
    }
}

pub fn check_signature(sig: &Signature, solver: &Solver) -> ValidityReport {
    let mut cx = Checker {
        sig,
        solver,
        report: ValidityReport::default(),
    };
    let mut seen = BTreeSet::new();
    for d in sig.defs() {
        let loc = Location::Def(d.name.clone());
        if !seen.insert(d.name.as_str()) {
            cx.violation(
                loc.clone(),
                ViolationKind::DuplicateDefinition,
                format!("`{}` is defined more than once", d.name),
            );
        }
        let mut ps = BTreeSet::new();
        for p in &d.params {
            if !ps.insert(p) {
                cx.violation(
                    loc.clone(),
                    ViolationKind::DuplicateParameter,
                    format!("parameter `{p}` is repeated"),
                );
            }
        }
        if d.body.is_var() {
            cx.violation(
                loc.clone(),
                ViolationKind::NotContractive,
                format!(
                    "body `{}` is a type variable, so the definition is not contractive",
                    d.body
                ),
            );
        }
        cx.check_prop_scope(&loc, &d.constraint, &d.params);
        let mut vars = d.params.clone();
        let mut ctx = vec![d.constraint.clone()];
        cx.walk(&loc, &d.body, &mut vars, &mut ctx);
    }
    for (i, e) in sig.eq_decls().iter().enumerate() {
        let loc = Location::EqDecl(i);
        cx.check_prop_scope(&loc, &e.constraint, &e.vars);
        let mut vars = e.vars.clone();
        let mut ctx = vec![e.constraint.clone()];
        cx.walk(&loc, &e.lhs.to_type(), &mut vars, &mut ctx);
        cx.walk(&loc, &e.rhs.to_type(), &mut vars, &mut ctx);
    }
    cx.report
}

/// `𝒱 ; 𝒞 ⊢ t valid` for a type supplied from outside the signature.
pub fn check_type(
    vars: &[Name],
    c: &ArithProp,
    t: &SessionType,
    sig: &Signature,
    solver: &Solver,
) -> ValidityReport {
    let mut cx = Checker {
        sig,
        solver,
        report: ValidityReport::default(),
    };
    cx.check_prop_scope(&Location::Query, c, vars);
    cx.walk(
        &Location::Query,
        t,
        &mut vars.to_vec(),
        &mut vec![c.clone()],
    );
    cx.report
}

struct Checker<'a> {
    sig: &'a Signature,
    solver: &'a Solver,
    report: ValidityReport,
}

impl Checker<'_> {
    fn violation(&mut self, location: Location, kind: ViolationKind, message: String) {
        self.report.violations.push(Violation {
            location,
            kind,
            message,
            obligation: None,
            countermodel: None,
        });
    }

    fn check_prop_scope(&mut self, loc: &Location, p: &ArithProp, vars: &[Name]) {
        for v in p.free_vars() {
            if !vars.contains(&v) {
                self.violation(
                    loc.clone(),
                    ViolationKind::UnboundVariable,
                    format!("variable `{v}` in `{p}` is not bound"),
                );
            }
        }
    }

    fn walk(
        &mut self,
        loc: &Location,
        t: &SessionType,
        vars: &mut Vec<Name>,
        ctx: &mut Vec<ArithProp>,
    ) {
        match t {
            SessionType::Plus(bs) | SessionType::With(bs) => {
                let mut labels = BTreeSet::new();
                for (l, a) in bs {
                    if !labels.insert(l) {
                        self.violation(
                            loc.clone(),
                            ViolationKind::DuplicateDefinition,
                            format!("label `{l}` occurs twice in `{t}`"),
                        );
                    }
                    self.walk(loc, a, vars, ctx);
                }
            }
            SessionType::Tensor(a, b) | SessionType::Lolli(a, b) => {
                self.walk(loc, a, vars, ctx);
                self.walk(loc, b, vars, ctx);
            }
            SessionType::One => {}
            SessionType::Assert(p, a) | SessionType::Assume(p, a) => {
                self.check_prop_scope(loc, p, vars);
                ctx.push(p.clone());
                self.walk(loc, a, vars, ctx);
                ctx.pop();
            }
            SessionType::Exists(v, a) | SessionType::Forall(v, a) => {
                vars.push(v.clone());
                self.walk(loc, a, vars, ctx);
                vars.pop();
            }
            SessionType::Var(name, args) => self.instantiation(loc, name, args, vars, ctx),
        }
    }

    fn instantiation(
        &mut self,
        loc: &Location,
        name: &Name,
        args: &[ArithExpr],
        vars: &[Name],
        ctx: &[ArithProp],
    ) {
        let inst = SessionType::Var(name.clone(), args.to_vec());
        let Some(def) = self.sig.lookup(name) else {
            self.violation(
                loc.clone(),
                ViolationKind::UndefinedName,
                format!("type `{name}` is not defined"),
            );
            return;
        };
        if def.params.len() != args.len() {
            self.violation(
                loc.clone(),
                ViolationKind::Arity,
                format!(
                    "`{name}` takes {} index argument(s) but `{inst}` supplies {}",
                    def.params.len(),
                    args.len()
                ),
            );
            return;
        }
        let mut unbound = false;
        for e in args {
            for v in e.free_vars() {
                if !vars.contains(&v) {
                    unbound = true;
                    self.violation(
                        loc.clone(),
                        ViolationKind::UnboundVariable,
                        format!("variable `{v}` in `{inst}` is not bound"),
                    );
                }
            }
        }
        if unbound {
            return;
        }
        let s: Subst = def
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect();
        let goal = subst_prop(&def.full_constraint(), &s);
        let context = ArithProp::conj(ctx.iter().cloned());
        let result = self.solver.entails(vars, &context, &goal);
        let obligation = Obligation {
            vars: vars.to_vec(),
            context,
            goal,
            result,
        };
        match result {
            Entailment::Holds => self.report.discharged.push(obligation),
            Entailment::Fails => {
                let counter = obligation
                    .context
                    .clone()
                    .and(obligation.goal.clone().not());
                let countermodel = find_model(vars, &counter, 64, MAX_CANDIDATES);
                self.report.violations.push(Violation {
                    location: loc.clone(),
                    kind: ViolationKind::Entailment,
                    message: format!("instantiation `{inst}` violates the constraint of `{name}`"),
                    obligation: Some(obligation),
                    countermodel,
                });
            }
            Entailment::Unknown => self.report.violations.push(Violation {
                location: loc.clone(),
                kind: ViolationKind::Unverifiable,
                message: format!(
                    "cannot decide whether `{inst}` satisfies the constraint of `{name}`"
                ),
                obligation: Some(obligation),
                countermodel: None,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_prop, parse_signature, parse_type};
    use num_bigint::BigInt;

    const QUEUE: &str = "type A = 1\n\
        type queue[n] = &{ins: A -o queue[n+1], \
                          del: +{none: ?{n = 0}. 1, some: ?{n > 0}. A * queue[n-1]}}";

    fn check(src: &str) -> ValidityReport {
        check_signature(&parse_signature(src).unwrap().signature, &Solver::default())
    }

    #[test]
    fn queue_is_valid() {
        let r = check(QUEUE);
        assert!(r.is_accepted(), "{:?}", r.violations);
        let goals: Vec<String> = r.discharged.iter().map(|o| o.to_string()).collect();
        assert!(goals.contains(&"{n} |= n+1 >= 0".to_string()), "{goals:?}");
        assert!(
            goals.contains(&"{n | n > 0} |= n-1 >= 0".to_string()),
            "{goals:?}"
        );
    }

    #[test]
    fn unguarded_predecessor_is_rejected() {
        let r = check("type q[n] = +{a: q[n-1]}");
        assert_eq!(r.exit_code(), 1);
        let v = &r.violations[0];
        assert_eq!(v.kind, ViolationKind::Entailment);
        assert_eq!(
            v.countermodel.as_ref().unwrap().get("n"),
            Some(&BigInt::from(0))
        );
    }

    #[test]
    fn non_contractive_alias() {
        let mut sig = parse_signature("type t2 = 1").unwrap().signature;
        sig.push_def(crate::ast::TypeDef::new(
            "t",
            &[],
            ArithProp::True,
            SessionType::var("t2", vec![]),
        ));
        let r = check_signature(&sig, &Solver::default());
        assert_eq!(r.violations[0].kind, ViolationKind::NotContractive);
    }

    #[test]
    fn query_types() {
        let sig = parse_signature(QUEUE).unwrap().signature;
        let s = Solver::default();
        let n = vec!["n".to_string()];
        let ok = check_type(
            &n,
            &ArithProp::True,
            &parse_type("queue[n+1]").unwrap(),
            &sig,
            &s,
        );
        assert!(ok.is_accepted());
        let bad = check_type(
            &[],
            &ArithProp::True,
            &parse_type("queue[0-1]").unwrap(),
            &sig,
            &s,
        );
        assert_eq!(bad.violations[0].kind, ViolationKind::Entailment);
        let vacuous = check_type(
            &n,
            &parse_prop("n > 0").unwrap(),
            &parse_type("?{n = 0}. queue[n-1]").unwrap(),
            &sig,
            &s,
        );
        assert!(vacuous.is_accepted());
    }

    #[test]
    fn quantified_index() {
        let r = check("type bin[n] = +{b0: ?{n > 0}. ?k. ?{n = 2*k}. bin[k], e: ?{n = 0}. 1}");
        assert!(r.is_accepted());
        let r = check("type f[n] = +{a: ?k. f[k-n]}");
        assert_eq!(r.violations[0].kind, ViolationKind::Entailment);
    }

    #[test]
    fn unbound_and_arity() {
        let r = check("type f[n] = +{a: f[m], b: f[n][n]}");
        let kinds: Vec<ViolationKind> = r.violations.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![ViolationKind::UnboundVariable, ViolationKind::Arity]
        );
    }

    #[test]
    fn non_linear_constraint_is_unverifiable() {
        let r = check("type f[n | n*n > 3] = +{a: f[n+1]}");
        assert_eq!(r.exit_code(), 2);
        assert_eq!(r.violations[0].kind, ViolationKind::Unverifiable);
    }

    #[test]
    fn stable_under_renaming() {
        let a = check("type q[n] = +{a: ?{n > 0}. q[n-1], b: q[n+1]}");
        let b = check("type q[m] = +{a: ?{m > 0}. q[m-1], b: q[m+1]}");
        assert_eq!(a.is_accepted(), b.is_accepted());
    }
}
