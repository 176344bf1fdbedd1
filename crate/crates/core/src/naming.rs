//! Internal names: rewrites a signature so that every definition body is a
//! single constructor whose continuations are all instantiations.
//!
//! ```text
//! type queue[n] = &{ins: %0[n], del: %1[n]}
//! type %0[n] = A -o queue[n+1]
//! type %1[n] = +{none: %2[n], some: %4[n]}
//! ...
//! type %5[n | n > 0] = A * queue[n-1]
//! ```
//!
//! Names are allocated depth-first, pre-order, with one counter shared by
//! the whole signature. An internal name is abstracted over the free
//! variables of its subterm, in the order they were bound, and carries the
//! dominating `?{φ}`/`!{φ}` constraints that speak about those variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arith::decide_closed;
use crate::ast::{ArithExpr, ArithProp, FreeVars, Instance, Name, SessionType, Signature, TypeDef};
use crate::syntax::rename_bound;

/// Where an internal name came from: a definition and the path of
/// constructor positions from its body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    pub def: Name,
    pub path: Vec<String>,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.def)
        } else {
            write!(f, "{}/{}", self.def, self.path.join("/"))
        }
    }
}

#[derive(Clone, Debug)]
pub struct InternalizedSignature {
    pub signature: Signature,
    pub origins: BTreeMap<Name, Origin>,
    next: usize,
}

impl InternalizedSignature {
    pub fn is_internal(&self, name: &str) -> bool {
        self.origins.contains_key(name)
    }

    pub fn internal_count(&self) -> usize {
        self.origins.len()
    }

    fn fresh(&mut self) -> Name {
        loop {
            let n = format!("%{}", self.next);
            self.next += 1;
            if self.signature.lookup(&n).is_none() {
                return n;
            }
        }
    }
}

pub fn internalize(sig: &Signature) -> InternalizedSignature {
    let mut out = InternalizedSignature {
        signature: Signature::new(Vec::new(), sig.eq_decls().to_vec()),
        origins: BTreeMap::new(),
        next: 0,
    };
    // reserve the original names so fresh ones cannot collide
    for d in sig.defs() {
        out.signature.push_def(TypeDef {
            body: SessionType::One,
            ..d.clone()
        });
    }
    let mut defs = Vec::new();
    for d in sig.defs() {
        let scope: BTreeSet<Name> = d.params.iter().cloned().collect();
        let body = rename_bound(&d.body, &scope);
        let mut pass = Pass {
            acc: &mut out,
            def: &d.name,
            emitted: Vec::new(),
        };
        let ctx = vec![d.constraint.clone()];
        let new_body = pass.constructor(&body, &mut d.params.clone(), &ctx, &mut Vec::new());
        let emitted = pass.emitted;
        defs.push(TypeDef {
            body: new_body,
            ..d.clone()
        });
        defs.extend(emitted);
    }
    out.signature = Signature::new(defs, sig.eq_decls().to_vec());
    out
}

/// Turns `t` into an instantiation usable as the start of an equality
/// check under `𝒱 ; 𝒞`. Instantiations are returned as they are; other
/// types get a fresh name `%N[𝒱 | 𝒞]`.
pub fn internalize_query(
    vars: &[Name],
    c: &ArithProp,
    t: &SessionType,
    acc: &mut InternalizedSignature,
) -> Instance {
    if let Some(inst) = t.as_instance() {
        return inst;
    }
    let name = acc.fresh();
    let scope: BTreeSet<Name> = vars.iter().cloned().collect();
    let t = rename_bound(t, &scope);
    let mut pass = Pass {
        acc,
        def: &name,
        emitted: Vec::new(),
    };
    let ctx = vec![c.clone()];
    let body = pass.constructor(&t, &mut vars.to_vec(), &ctx, &mut Vec::new());
    let emitted = pass.emitted;
    let args: Vec<ArithExpr> = vars.iter().map(|v| ArithExpr::Var(v.clone())).collect();
    acc.origins.insert(
        name.clone(),
        Origin {
            def: "query".to_string(),
            path: Vec::new(),
        },
    );
    let def = TypeDef {
        name: name.clone(),
        params: vars.to_vec(),
        constraint: c.clone(),
        body,
    };
    acc.signature.push_def(def);
    for d in emitted {
        acc.signature.push_def(d);
    }
    Instance { name, args }
}

struct Pass<'a> {
    acc: &'a mut InternalizedSignature,
    def: &'a Name,
    emitted: Vec<TypeDef>,
}

impl Pass<'_> {
    /// Keeps the top constructor of `t` and replaces each continuation by
    /// an instantiation.
    fn constructor(
        &mut self,
        t: &SessionType,
        scope: &mut Vec<Name>,
        ctx: &[ArithProp],
        path: &mut Vec<String>,
    ) -> SessionType {
        let mut cont = |this: &mut Self,
                        a: &SessionType,
                        step: &str,
                        scope: &mut Vec<Name>,
                        ctx: &[ArithProp]| {
            path.push(step.to_string());
            let r = this.continuation(a, scope, ctx, path);
            path.pop();
            r
        };
        match t {
            SessionType::Plus(bs) => SessionType::Plus(
                bs.iter()
                    .map(|(l, a)| (l.clone(), cont(self, a, l, scope, ctx)))
                    .collect(),
            ),
            SessionType::With(bs) => SessionType::With(
                bs.iter()
                    .map(|(l, a)| (l.clone(), cont(self, a, l, scope, ctx)))
                    .collect(),
            ),
            SessionType::Tensor(a, b) => {
                let a2 = cont(self, a, "fst", scope, ctx);
                SessionType::tensor(a2, cont(self, b, "snd", scope, ctx))
            }
            SessionType::Lolli(a, b) => {
                let a2 = cont(self, a, "fst", scope, ctx);
                SessionType::lolli(a2, cont(self, b, "snd", scope, ctx))
            }
            SessionType::One => SessionType::One,
            SessionType::Assert(p, a) | SessionType::Assume(p, a) => {
                let mut inner = ctx.to_vec();
                inner.push(p.clone());
                let step = if matches!(t, SessionType::Assert(..)) {
                    "assert"
                } else {
                    "assume"
                };
                let a2 = cont(self, a, step, scope, &inner);
                match t {
                    SessionType::Assert(..) => SessionType::assert(p.clone(), a2),
                    _ => SessionType::assume(p.clone(), a2),
                }
            }
            SessionType::Exists(v, a) | SessionType::Forall(v, a) => {
                scope.push(v.clone());
                let step = if matches!(t, SessionType::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                let a2 = cont(self, a, step, scope, ctx);
                scope.pop();
                match t {
                    SessionType::Exists(..) => SessionType::exists(v, a2),
                    _ => SessionType::forall(v, a2),
                }
            }
            SessionType::Var(..) => t.clone(),
        }
    }

    fn continuation(
        &mut self,
        a: &SessionType,
        scope: &mut Vec<Name>,
        ctx: &[ArithProp],
        path: &mut Vec<String>,
    ) -> SessionType {
        if a.is_var() {
            return a.clone();
        }
        let name = self.acc.fresh();
        self.acc.origins.insert(
            name.clone(),
            Origin {
                def: self.def.clone(),
                path: path.clone(),
            },
        );
        let fv = a.free_vars();
        let params: Vec<Name> = scope.iter().filter(|v| fv.contains(*v)).cloned().collect();
        let constraint = project(ctx, &params);
        // placeholder keeps the emission order pre-order
        let slot = self.emitted.len();
        self.emitted.push(TypeDef {
            name: name.clone(),
            params: params.clone(),
            constraint: constraint.clone(),
            body: SessionType::One,
        });
        let body = self.constructor(a, scope, ctx, path);
        self.emitted[slot].body = body;
        let args = params.iter().map(|v| ArithExpr::Var(v.clone())).collect();
        SessionType::Var(name, args)
    }
}

/// The part of `ctx` visible from `params`: conjuncts mentioning only
/// `params` are kept; the remainder is existentially projected, or dropped
/// when that projection is trivially true.
fn project(ctx: &[ArithProp], params: &[Name]) -> ArithProp {
    let mut keep = Vec::new();
    let mut rest = Vec::new();
    for c in ctx.iter().flat_map(|p| p.conjuncts()) {
        if c.free_vars().iter().all(|v| params.contains(v)) {
            keep.push(c.clone());
        } else {
            rest.push(c.clone());
        }
    }
    if !rest.is_empty() {
        let rest_p = ArithProp::conj(rest);
        let hidden: BTreeSet<Name> = rest_p
            .free_vars()
            .into_iter()
            .filter(|v| !params.contains(v))
            .collect();
        let projected = hidden
            .iter()
            .rev()
            .fold(rest_p, |acc, v| ArithProp::exists(v, acc));
        let trivial = projected.free_vars().is_empty() && decide_closed(&projected) == Ok(true);
        if !trivial {
            keep.push(projected);
        }
    }
    let mut seen = Vec::new();
    for k in keep {
        if !seen.contains(&k) {
            seen.push(k);
        }
    }
    ArithProp::conj(seen)
}
