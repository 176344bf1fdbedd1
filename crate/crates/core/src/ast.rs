//! Abstract syntax of refined session types.
//!
//! Arithmetic expressions and propositions index and constrain types; a
//! [`Signature`] collects type definitions `V[n̄ | φ] = A` together with
//! programmer-supplied equality declarations. Everything here is immutable
//! after construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops;

use num_bigint::BigInt;
use thiserror::Error;

pub type Name = String;
pub type Label = String;

/// Arithmetic expressions over natural-number variables.
///
/// Products of two non-constant expressions are representable so that the
/// non-linear normalizer has something to work on; the decision procedure
/// rejects them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithExpr {
    Const(BigInt),
    Var(Name),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Sub(Box<ArithExpr>, Box<ArithExpr>),
    Mul(Box<ArithExpr>, Box<ArithExpr>),
}

impl ArithExpr {
    pub fn int(i: i64) -> Self {
        ArithExpr::Const(BigInt::from(i))
    }

    pub fn var(name: &str) -> Self {
        ArithExpr::Var(name.to_string())
    }

    pub fn as_const(&self) -> Option<&BigInt> {
        match self {
            ArithExpr::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl ops::Add for ArithExpr {
    type Output = ArithExpr;
    fn add(self, rhs: ArithExpr) -> ArithExpr {
        ArithExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for ArithExpr {
    type Output = ArithExpr;
    fn sub(self, rhs: ArithExpr) -> ArithExpr {
        ArithExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for ArithExpr {
    type Output = ArithExpr;
    fn mul(self, rhs: ArithExpr) -> ArithExpr {
        ArithExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

/// Arithmetic propositions. Quantifiers range over the naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithProp {
    True,
    False,
    Eq(ArithExpr, ArithExpr),
    Gt(ArithExpr, ArithExpr),
    /// `i | e` with a positive constant divisor.
    Divides(BigInt, ArithExpr),
    And(Box<ArithProp>, Box<ArithProp>),
    Or(Box<ArithProp>, Box<ArithProp>),
    Not(Box<ArithProp>),
    Exists(Name, Box<ArithProp>),
    Forall(Name, Box<ArithProp>),
}

impl ArithProp {
    pub fn eq(a: ArithExpr, b: ArithExpr) -> Self {
        ArithProp::Eq(a, b)
    }

    pub fn gt(a: ArithExpr, b: ArithExpr) -> Self {
        ArithProp::Gt(a, b)
    }

    /// `a >= b`, spelled as `a > b \/ a = b`.
    pub fn ge(a: ArithExpr, b: ArithExpr) -> Self {
        ArithProp::Or(
            Box::new(ArithProp::Gt(a.clone(), b.clone())),
            Box::new(ArithProp::Eq(a, b)),
        )
    }

    pub fn and(self, other: ArithProp) -> Self {
        ArithProp::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: ArithProp) -> Self {
        ArithProp::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        ArithProp::Not(Box::new(self))
    }

    pub fn iff(self, other: ArithProp) -> Self {
        let fwd = self.clone().not().or(other.clone());
        let bwd = other.not().or(self);
        fwd.and(bwd)
    }

    pub fn exists(var: &str, body: ArithProp) -> Self {
        ArithProp::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: ArithProp) -> Self {
        ArithProp::Forall(var.to_string(), Box::new(body))
    }

    /// Conjunction of all items, skipping trivial `true`s.
    pub fn conj<I: IntoIterator<Item = ArithProp>>(items: I) -> Self {
        let mut acc: Option<ArithProp> = None;
        for p in items {
            if p == ArithProp::True {
                continue;
            }
            acc = Some(match acc {
                None => p,
                Some(a) => a.and(p),
            });
        }
        acc.unwrap_or(ArithProp::True)
    }

    /// Top-level conjuncts, flattening nested `/\`.
    pub fn conjuncts(&self) -> Vec<&ArithProp> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a ArithProp, out: &mut Vec<&'a ArithProp>) {
            match p {
                ArithProp::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                ArithProp::True => {}
                _ => out.push(p),
            }
        }
        go(self, &mut out);
        out
    }

    /// Nonnegativity of each variable: `v >= 0` for all of `vars`.
    pub fn nonneg<'a, I: IntoIterator<Item = &'a Name>>(vars: I) -> Self {
        ArithProp::conj(
            vars.into_iter()
                .map(|v| ArithProp::ge(ArithExpr::Var(v.clone()), ArithExpr::int(0))),
        )
    }
}

/// A defined type variable applied to index expressions, `V[ē]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub name: Name,
    pub args: Vec<ArithExpr>,
}

impl Instance {
    pub fn new(name: &str, args: Vec<ArithExpr>) -> Self {
        Instance {
            name: name.to_string(),
            args,
        }
    }

    pub fn to_type(&self) -> SessionType {
        SessionType::Var(self.name.clone(), self.args.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SessionType {
    /// `+{l: A, ...}`: the provider sends a label.
    Plus(Vec<(Label, SessionType)>),
    /// `&{l: A, ...}`: the provider receives a label.
    With(Vec<(Label, SessionType)>),
    Tensor(Box<SessionType>, Box<SessionType>),
    Lolli(Box<SessionType>, Box<SessionType>),
    One,
    Assert(ArithProp, Box<SessionType>),
    Assume(ArithProp, Box<SessionType>),
    Exists(Name, Box<SessionType>),
    Forall(Name, Box<SessionType>),
    Var(Name, Vec<ArithExpr>),
}

impl SessionType {
    pub fn var(name: &str, args: Vec<ArithExpr>) -> Self {
        SessionType::Var(name.to_string(), args)
    }

    pub fn plus(branches: Vec<(&str, SessionType)>) -> Self {
        SessionType::Plus(
            branches
                .into_iter()
                .map(|(l, t)| (l.to_string(), t))
                .collect(),
        )
    }

    pub fn with(branches: Vec<(&str, SessionType)>) -> Self {
        SessionType::With(
            branches
                .into_iter()
                .map(|(l, t)| (l.to_string(), t))
                .collect(),
        )
    }

    pub fn tensor(a: SessionType, b: SessionType) -> Self {
        SessionType::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: SessionType, b: SessionType) -> Self {
        SessionType::Lolli(Box::new(a), Box::new(b))
    }

    pub fn assert(p: ArithProp, t: SessionType) -> Self {
        SessionType::Assert(p, Box::new(t))
    }

    pub fn assume(p: ArithProp, t: SessionType) -> Self {
        SessionType::Assume(p, Box::new(t))
    }

    pub fn exists(v: &str, t: SessionType) -> Self {
        SessionType::Exists(v.to_string(), Box::new(t))
    }

    pub fn forall(v: &str, t: SessionType) -> Self {
        SessionType::Forall(v.to_string(), Box::new(t))
    }

    pub fn as_instance(&self) -> Option<Instance> {
        match self {
            SessionType::Var(n, args) => Some(Instance {
                name: n.clone(),
                args: args.clone(),
            }),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, SessionType::Var(..))
    }

    /// Short constructor name, used in diagnostics and traces.
    pub fn head(&self) -> &'static str {
        match self {
            SessionType::Plus(_) => "+{..}",
            SessionType::With(_) => "&{..}",
            SessionType::Tensor(..) => "*",
            SessionType::Lolli(..) => "-o",
            SessionType::One => "1",
            SessionType::Assert(..) => "?{..}",
            SessionType::Assume(..) => "!{..}",
            SessionType::Exists(..) => "?n",
            SessionType::Forall(..) => "!n",
            SessionType::Var(..) => "variable",
        }
    }

    /// Names of defined type variables referenced anywhere in the type.
    pub fn referenced_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            SessionType::Plus(bs) | SessionType::With(bs) => {
                bs.iter().for_each(|(_, t)| t.referenced_names(out))
            }
            SessionType::Tensor(a, b) | SessionType::Lolli(a, b) => {
                a.referenced_names(out);
                b.referenced_names(out);
            }
            SessionType::One => {}
            SessionType::Assert(_, t)
            | SessionType::Assume(_, t)
            | SessionType::Exists(_, t)
            | SessionType::Forall(_, t) => t.referenced_names(out),
            SessionType::Var(n, _) => {
                out.insert(n.clone());
            }
        }
    }
}

/// `V[n̄ | φ] = A`. The stored constraint is the explicit one; every
/// parameter additionally carries an implicit `n >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDef {
    pub name: Name,
    pub params: Vec<Name>,
    pub constraint: ArithProp,
    pub body: SessionType,
}

impl TypeDef {
    pub fn new(name: &str, params: &[&str], constraint: ArithProp, body: SessionType) -> Self {
        TypeDef {
            name: name.to_string(),
            params: params.iter().map(|p| p.to_string()).collect(),
            constraint,
            body,
        }
    }

    /// Parameters nonnegative, conjoined with the explicit constraint.
    pub fn full_constraint(&self) -> ArithProp {
        ArithProp::conj([ArithProp::nonneg(&self.params), self.constraint.clone()])
    }
}

/// `eqtype {𝒱 | 𝒞} V1[ē1] == V2[ē2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EqDecl {
    pub vars: Vec<Name>,
    pub constraint: ArithProp,
    pub lhs: Instance,
    pub rhs: Instance,
}

impl EqDecl {
    pub fn as_closure(&self) -> Closure {
        Closure {
            vars: self.vars.clone(),
            constraint: self.constraint.clone(),
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
    }
}

/// `⟨𝒱; 𝒞; V1[ē1] ≡ V2[ē2]⟩`. The constraint is explicit; the variables are
/// implicitly nonnegative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Closure {
    pub vars: Vec<Name>,
    pub constraint: ArithProp,
    pub lhs: Instance,
    pub rhs: Instance,
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    defs: Vec<TypeDef>,
    eq_decls: Vec<EqDecl>,
    index: HashMap<Name, usize>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.defs == other.defs && self.eq_decls == other.eq_decls
    }
}

impl Signature {
    /// Builds a signature. Later duplicates shadow nothing: lookups resolve to
    /// the first definition of a name (validity reports the duplicate).
    pub fn new(defs: Vec<TypeDef>, eq_decls: Vec<EqDecl>) -> Self {
        let mut index = HashMap::new();
        for (i, d) in defs.iter().enumerate() {
            index.entry(d.name.clone()).or_insert(i);
        }
        Signature {
            defs,
            eq_decls,
            index,
        }
    }

    pub fn defs(&self) -> &[TypeDef] {
        &self.defs
    }

    pub fn eq_decls(&self) -> &[EqDecl] {
        &self.eq_decls
    }

    pub fn lookup(&self, name: &str) -> Option<&TypeDef> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    pub fn push_def(&mut self, def: TypeDef) {
        self.index
            .entry(def.name.clone())
            .or_insert(self.defs.len());
        self.defs.push(def);
    }

    pub fn push_eq_decl(&mut self, decl: EqDecl) {
        self.eq_decls.push(decl);
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// Total assignment of natural numbers to arithmetic variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundSubst(pub BTreeMap<Name, BigInt>);

impl GroundSubst {
    pub fn new() -> Self {
        GroundSubst(BTreeMap::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, BigInt)>>(pairs: I) -> Self {
        GroundSubst(pairs.into_iter().collect())
    }

    pub fn get(&self, v: &str) -> Option<&BigInt> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: &str, value: BigInt) {
        self.0.insert(v.to_string(), value);
    }

    /// As an expression substitution.
    pub fn to_subst(&self) -> Subst {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), ArithExpr::Const(v.clone())))
            .collect()
    }
}

/// Simultaneous substitution of expressions for arithmetic variables.
pub type Subst = BTreeMap<Name, ArithExpr>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("undefined type name `{0}`")]
    UnknownName(Name),
    #[error("type `{name}` expects {expected} index argument(s), got {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
}

/// Expands one layer of definition: `V[ē]` becomes its body with `ē`
/// substituted for the parameters. Non-variable types are returned as is.
pub fn unfold(sig: &Signature, t: &SessionType) -> Result<SessionType, AstError> {
    match t {
        SessionType::Var(name, args) => {
            let def = sig
                .lookup(name)
                .ok_or_else(|| AstError::UnknownName(name.clone()))?;
            if def.params.len() != args.len() {
                return Err(AstError::Arity {
                    name: name.clone(),
                    expected: def.params.len(),
                    found: args.len(),
                });
            }
            let s: Subst = def
                .params
                .iter()
                .cloned()
                .zip(args.iter().cloned())
                .collect();
            Ok(subst_type(&def.body, &s))
        }
        other => Ok(other.clone()),
    }
}

// ---------------------------------------------------------------------------
// free variables

pub trait FreeVars {
    fn free_vars_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>);

    fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }
}

impl FreeVars for ArithExpr {
    fn free_vars_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            ArithExpr::Const(_) => {}
            ArithExpr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            ArithExpr::Add(a, b) | ArithExpr::Sub(a, b) | ArithExpr::Mul(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
        }
    }
}

impl FreeVars for ArithProp {
    fn free_vars_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            ArithProp::True | ArithProp::False => {}
            ArithProp::Eq(a, b) | ArithProp::Gt(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            ArithProp::Divides(_, e) => e.free_vars_into(bound, out),
            ArithProp::And(a, b) | ArithProp::Or(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            ArithProp::Not(a) => a.free_vars_into(bound, out),
            ArithProp::Exists(v, body) | ArithProp::Forall(v, body) => {
                bound.push(v.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }
}

impl FreeVars for SessionType {
    fn free_vars_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            SessionType::Plus(bs) | SessionType::With(bs) => {
                bs.iter().for_each(|(_, t)| t.free_vars_into(bound, out))
            }
            SessionType::Tensor(a, b) | SessionType::Lolli(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            SessionType::One => {}
            SessionType::Assert(p, t) | SessionType::Assume(p, t) => {
                p.free_vars_into(bound, out);
                t.free_vars_into(bound, out);
            }
            SessionType::Exists(v, t) | SessionType::Forall(v, t) => {
                bound.push(v.clone());
                t.free_vars_into(bound, out);
                bound.pop();
            }
            SessionType::Var(_, args) => args.iter().for_each(|e| e.free_vars_into(bound, out)),
        }
    }
}

impl FreeVars for Instance {
    fn free_vars_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        self.args.iter().for_each(|e| e.free_vars_into(bound, out))
    }
}

/// Free arithmetic variables of a type, proposition or expression.
pub fn free_arith_vars<T: FreeVars>(x: &T) -> BTreeSet<Name> {
    x.free_vars()
}

/// Every variable name occurring in `x`, free or bound.
pub fn all_var_names(t: &SessionType, out: &mut BTreeSet<Name>) {
    fn expr(e: &ArithExpr, out: &mut BTreeSet<Name>) {
        match e {
            ArithExpr::Const(_) => {}
            ArithExpr::Var(v) => {
                out.insert(v.clone());
            }
            ArithExpr::Add(a, b) | ArithExpr::Sub(a, b) | ArithExpr::Mul(a, b) => {
                expr(a, out);
                expr(b, out);
            }
        }
    }
    fn prop(p: &ArithProp, out: &mut BTreeSet<Name>) {
        match p {
            ArithProp::True | ArithProp::False => {}
            ArithProp::Eq(a, b) | ArithProp::Gt(a, b) => {
                expr(a, out);
                expr(b, out);
            }
            ArithProp::Divides(_, e) => expr(e, out),
            ArithProp::And(a, b) | ArithProp::Or(a, b) => {
                prop(a, out);
                prop(b, out);
            }
            ArithProp::Not(a) => prop(a, out),
            ArithProp::Exists(v, b) | ArithProp::Forall(v, b) => {
                out.insert(v.clone());
                prop(b, out);
            }
        }
    }
    match t {
        SessionType::Plus(bs) | SessionType::With(bs) => {
            bs.iter().for_each(|(_, t)| all_var_names(t, out))
        }
        SessionType::Tensor(a, b) | SessionType::Lolli(a, b) => {
            all_var_names(a, out);
            all_var_names(b, out);
        }
        SessionType::One => {}
        SessionType::Assert(p, t) | SessionType::Assume(p, t) => {
            prop(p, out);
            all_var_names(t, out);
        }
        SessionType::Exists(v, t) | SessionType::Forall(v, t) => {
            out.insert(v.clone());
            all_var_names(t, out);
        }
        SessionType::Var(_, args) => args.iter().for_each(|e| expr(e, out)),
    }
}

/// `base`, or `base` followed by the smallest positive counter such that
/// the result is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { base } else { stem };
    (1u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many candidates")
}

// ---------------------------------------------------------------------------
// substitution

pub fn subst_expr(e: &ArithExpr, s: &Subst) -> ArithExpr {
    match e {
        ArithExpr::Const(_) => e.clone(),
        ArithExpr::Var(v) => s.get(v).cloned().unwrap_or_else(|| e.clone()),
        ArithExpr::Add(a, b) => subst_expr(a, s) + subst_expr(b, s),
        ArithExpr::Sub(a, b) => subst_expr(a, s) - subst_expr(b, s),
        ArithExpr::Mul(a, b) => subst_expr(a, s) * subst_expr(b, s),
    }
}

/// Prepares to descend under a binder for `v`: drops `v` from the
/// substitution and, if `v` would capture a variable of the range, picks a
/// fresh name for it. Returns the (possibly renamed) binder and the inner
/// substitution.
fn enter_binder<T: FreeVars>(v: &Name, body: &T, s: &Subst) -> (Name, Subst) {
    let mut inner = s.clone();
    inner.remove(v);
    let body_fv = body.free_vars();
    inner.retain(|k, _| body_fv.contains(k));
    let mut range_fv = BTreeSet::new();
    for e in inner.values() {
        e.free_vars_into(&mut Vec::new(), &mut range_fv);
    }
    if range_fv.contains(v) {
        let mut avoid = range_fv;
        avoid.extend(body_fv);
        avoid.extend(inner.keys().cloned());
        let fresh = fresh_name(v, &avoid);
        inner.insert(v.clone(), ArithExpr::Var(fresh.clone()));
        (fresh, inner)
    } else {
        (v.clone(), inner)
    }
}

pub fn subst_prop(p: &ArithProp, s: &Subst) -> ArithProp {
    if s.is_empty() {
        return p.clone();
    }
    match p {
        ArithProp::True | ArithProp::False => p.clone(),
        ArithProp::Eq(a, b) => ArithProp::Eq(subst_expr(a, s), subst_expr(b, s)),
        ArithProp::Gt(a, b) => ArithProp::Gt(subst_expr(a, s), subst_expr(b, s)),
        ArithProp::Divides(d, e) => ArithProp::Divides(d.clone(), subst_expr(e, s)),
        ArithProp::And(a, b) => subst_prop(a, s).and(subst_prop(b, s)),
        ArithProp::Or(a, b) => subst_prop(a, s).or(subst_prop(b, s)),
        ArithProp::Not(a) => subst_prop(a, s).not(),
        ArithProp::Exists(v, body) => {
            let (v2, inner) = enter_binder(v, body.as_ref(), s);
            ArithProp::Exists(v2, Box::new(subst_prop(body, &inner)))
        }
        ArithProp::Forall(v, body) => {
            let (v2, inner) = enter_binder(v, body.as_ref(), s);
            ArithProp::Forall(v2, Box::new(subst_prop(body, &inner)))
        }
    }
}

pub fn subst_type(t: &SessionType, s: &Subst) -> SessionType {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        SessionType::Plus(bs) => SessionType::Plus(
            bs.iter()
                .map(|(l, a)| (l.clone(), subst_type(a, s)))
                .collect(),
        ),
        SessionType::With(bs) => SessionType::With(
            bs.iter()
                .map(|(l, a)| (l.clone(), subst_type(a, s)))
                .collect(),
        ),
        SessionType::Tensor(a, b) => SessionType::tensor(subst_type(a, s), subst_type(b, s)),
        SessionType::Lolli(a, b) => SessionType::lolli(subst_type(a, s), subst_type(b, s)),
        SessionType::One => SessionType::One,
        SessionType::Assert(p, a) => SessionType::assert(subst_prop(p, s), subst_type(a, s)),
        SessionType::Assume(p, a) => SessionType::assume(subst_prop(p, s), subst_type(a, s)),
        SessionType::Exists(v, a) => {
            let (v2, inner) = enter_binder(v, a.as_ref(), s);
            SessionType::Exists(v2, Box::new(subst_type(a, &inner)))
        }
        SessionType::Forall(v, a) => {
            let (v2, inner) = enter_binder(v, a.as_ref(), s);
            SessionType::Forall(v2, Box::new(subst_type(a, &inner)))
        }
        SessionType::Var(n, args) => {
            SessionType::Var(n.clone(), args.iter().map(|e| subst_expr(e, s)).collect())
        }
    }
}

pub fn subst_instance(i: &Instance, s: &Subst) -> Instance {
    Instance {
        name: i.name.clone(),
        args: i.args.iter().map(|e| subst_expr(e, s)).collect(),
    }
}

/// `substArith`: apply a ground substitution (or any expression
/// substitution) homomorphically, avoiding capture.
pub fn subst_arith(t: &SessionType, s: &GroundSubst) -> SessionType {
    subst_type(t, &s.to_subst())
}

/// Variable-for-variable renaming.
pub fn rename_type(t: &SessionType, renaming: &BTreeMap<Name, Name>) -> SessionType {
    let s: Subst = renaming
        .iter()
        .map(|(k, v)| (k.clone(), ArithExpr::Var(v.clone())))
        .collect();
    subst_type(t, &s)
}

// ---------------------------------------------------------------------------
// alpha equivalence

/// Structural equality up to the names of bound arithmetic variables.
pub fn alpha_eq_type(a: &SessionType, b: &SessionType) -> bool {
    AlphaEnv::default().types(a, b)
}

pub fn alpha_eq_prop(a: &ArithProp, b: &ArithProp) -> bool {
    AlphaEnv::default().props(a, b)
}

#[derive(Default)]
struct AlphaEnv {
    left: Vec<Name>,
    right: Vec<Name>,
}

impl AlphaEnv {
    fn var(&self, a: &Name, b: &Name) -> bool {
        let ia = self.left.iter().rposition(|x| x == a);
        let ib = self.right.iter().rposition(|x| x == b);
        match (ia, ib) {
            (Some(i), Some(j)) => i == j,
            (None, None) => a == b,
            _ => false,
        }
    }

    fn exprs(&self, a: &ArithExpr, b: &ArithExpr) -> bool {
        use ArithExpr::*;
        match (a, b) {
            (Const(x), Const(y)) => x == y,
            (Var(x), Var(y)) => self.var(x, y),
            (Add(a1, a2), Add(b1, b2))
            | (Sub(a1, a2), Sub(b1, b2))
            | (Mul(a1, a2), Mul(b1, b2)) => self.exprs(a1, b1) && self.exprs(a2, b2),
            _ => false,
        }
    }

    fn bind<F: FnOnce(&mut Self) -> bool>(&mut self, x: &Name, y: &Name, f: F) -> bool {
        self.left.push(x.clone());
        self.right.push(y.clone());
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn props(&mut self, a: &ArithProp, b: &ArithProp) -> bool {
        use ArithProp::*;
        match (a, b) {
            (True, True) | (False, False) => true,
            (Eq(a1, a2), Eq(b1, b2)) | (Gt(a1, a2), Gt(b1, b2)) => {
                self.exprs(a1, b1) && self.exprs(a2, b2)
            }
            (Divides(d1, e1), Divides(d2, e2)) => d1 == d2 && self.exprs(e1, e2),
            (And(a1, a2), And(b1, b2)) | (Or(a1, a2), Or(b1, b2)) => {
                self.props(a1, b1) && self.props(a2, b2)
            }
            (Not(x), Not(y)) => self.props(x, y),
            (Exists(x, p), Exists(y, q)) | (Forall(x, p), Forall(y, q)) => {
                self.bind(x, y, |env| env.props(p, q))
            }
            _ => false,
        }
    }

    fn types(&mut self, a: &SessionType, b: &SessionType) -> bool {
        use SessionType::*;
        match (a, b) {
            (Plus(xs), Plus(ys)) | (With(xs), With(ys)) => {
                xs.len() == ys.len()
                    && xs
                        .iter()
                        .zip(ys)
                        .all(|((l1, t1), (l2, t2))| l1 == l2 && self.types(t1, t2))
            }
            (Tensor(a1, a2), Tensor(b1, b2)) | (Lolli(a1, a2), Lolli(b1, b2)) => {
                self.types(a1, b1) && self.types(a2, b2)
            }
            (One, One) => true,
            (Assert(p, x), Assert(q, y)) | (Assume(p, x), Assume(q, y)) => {
                self.props(p, q) && self.types(x, y)
            }
            (Exists(v, x), Exists(w, y)) | (Forall(v, x), Forall(w, y)) => {
                self.bind(v, w, |env| env.types(x, y))
            }
            (Var(n, xs), Var(m, ys)) => {
                n == m && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.exprs(x, y))
            }
            _ => false,
        }
    }
}
