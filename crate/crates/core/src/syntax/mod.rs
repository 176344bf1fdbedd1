//! Concrete syntax for signatures, queries and equality declarations.
//!
//! ```text
//! type queue[n] = &{ins: A -o queue[n+1],
//!                   del: +{none: ?{n = 0}. 1,
//!                          some: ?{n > 0}. A * queue[n-1]}}
//! eqtype {x, y | true} intctr[x][y] == intctr[x+1][y+1]
//! ```
//!
//! `+{..}`/`&{..}` are internal/external choice, `*` and `-o` tensor and
//! lolli, `?{φ}.`/`!{φ}.` assert and assume, `?n.`/`!n.` the numeric
//! quantifiers. `%` starts a line comment unless it is directly followed by
//! a digit (internal names such as `%5`).

mod lexer;
mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use crate::ast::{fresh_name, ArithProp, EqDecl, FreeVars, Name, SessionType, Signature, TypeDef};

pub use print::{print_signature, print_type, Context};

use parser::{Decl, Parser};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub(crate) fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.start),
            line: self.line,
            col: self.col,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Lexical,
    Syntax,
    DuplicateDefinition,
    DuplicateParameter,
    UnboundTypeName,
    NotContractive,
    UndeclaredVariable,
}

impl DiagKind {
    /// Lexical and syntax errors stop parsing; the rest are reported after a
    /// complete parse.
    pub fn is_syntactic(self) -> bool {
        matches!(self, DiagKind::Lexical | DiagKind::Syntax)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub kind: DiagKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: error: {}",
            self.span.line, self.span.col, self.message
        )
    }
}

/// Diagnostics from a failed parse, in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn is_syntactic(&self) -> bool {
        self.0.iter().any(|d| d.kind.is_syntactic())
    }

    pub fn kinds(&self) -> Vec<DiagKind> {
        self.0.iter().map(|d| d.kind).collect()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

/// A parsed signature file with the source span of every declaration.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: Option<PathBuf>,
    pub text: String,
    pub signature: Signature,
    pub def_spans: Vec<Span>,
    pub decl_spans: Vec<Span>,
}

impl SourceFile {
    pub fn def_span(&self, name: &str) -> Option<Span> {
        self.signature
            .defs()
            .iter()
            .position(|d| d.name == name)
            .map(|i| self.def_spans[i])
    }
}

/// `{𝒱 | 𝒞} A == B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub vars: Vec<Name>,
    pub constraint: ArithProp,
    pub lhs: SessionType,
    pub rhs: SessionType,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} == {}",
            Context(&self.vars, &self.constraint),
            self.lhs,
            self.rhs
        )
    }
}

/// Parses a whole signature file. Bound arithmetic variables are renamed
/// apart from the enclosing parameters.
pub fn parse_signature(text: &str) -> Result<SourceFile, Diagnostics> {
    let toks = lexer::lex(text)?;
    let mut p = Parser::new(&toks);
    let mut defs: Vec<TypeDef> = Vec::new();
    let mut eqs = Vec::new();
    let mut def_spans = Vec::new();
    let mut decl_spans = Vec::new();
    while !p.at_eof() {
        match p.decl()? {
            Decl::Type(d, sp) => {
                defs.push(rename_def(d));
                def_spans.push(sp);
            }
            Decl::Eq(e, sp) => {
                eqs.push(rename_eq(e));
                decl_spans.push(sp);
            }
        }
    }

    let mut diags = Vec::new();
    let mut seen = BTreeSet::new();
    for (d, &sp) in defs.iter().zip(&def_spans) {
        if !seen.insert(d.name.clone()) {
            diags.push(Diagnostic {
                span: sp,
                kind: DiagKind::DuplicateDefinition,
                message: format!("type `{}` is defined more than once", d.name),
            });
        }
        let mut ps = BTreeSet::new();
        for q in &d.params {
            if !ps.insert(q) {
                diags.push(Diagnostic {
                    span: sp,
                    kind: DiagKind::DuplicateParameter,
                    message: format!("parameter `{q}` of `{}` is repeated", d.name),
                });
            }
        }
        if d.body.is_var() {
            diags.push(Diagnostic {
                span: sp,
                kind: DiagKind::NotContractive,
                message: format!(
                    "definition of `{}` is not contractive: its body is the type variable `{}`",
                    d.name, d.body
                ),
            });
        }
        let mut refs = BTreeSet::new();
        d.body.referenced_names(&mut refs);
        for r in refs.iter().filter(|r| !seen_or_later(r, &defs)) {
            diags.push(Diagnostic {
                span: sp,
                kind: DiagKind::UnboundTypeName,
                message: format!("type `{r}` used in `{}` is not defined", d.name),
            });
        }
    }
    for (e, &sp) in eqs.iter().zip(&decl_spans) {
        for inst in [&e.lhs, &e.rhs] {
            if !seen_or_later(&inst.name, &defs) {
                diags.push(Diagnostic {
                    span: sp,
                    kind: DiagKind::UnboundTypeName,
                    message: format!(
                        "type `{}` in equality declaration is not defined",
                        inst.name
                    ),
                });
            }
        }
        let mut fv = e.lhs.free_vars();
        fv.extend(e.rhs.free_vars());
        fv.extend(e.constraint.free_vars());
        for v in fv.iter().filter(|v| !e.vars.contains(v)) {
            diags.push(Diagnostic {
                span: sp,
                kind: DiagKind::UndeclaredVariable,
                message: format!("variable `{v}` is not declared in the equality's context"),
            });
        }
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    Ok(SourceFile {
        path: None,
        text: text.to_string(),
        signature: Signature::new(defs, eqs),
        def_spans,
        decl_spans,
    })
}

fn seen_or_later(name: &str, defs: &[TypeDef]) -> bool {
    defs.iter().any(|d| d.name == name)
}

/// Parses `{x, y | C} A == B` (the context is optional). Free variables of
/// the constraint and both types must be declared in the context.
pub fn parse_query(text: &str) -> Result<Query, Diagnostics> {
    let toks = lexer::lex(text)?;
    let mut p = Parser::new(&toks);
    let (vars, constraint) = if toks[0].0 == lexer::Tok::LBrace {
        p.context()?
    } else {
        (Vec::new(), ArithProp::True)
    };
    let lhs = p.ty()?;
    expect_eqeq(&mut p)?;
    let rhs = p.ty()?;
    p.expect_eof()?;
    let scope: BTreeSet<Name> = vars.iter().cloned().collect();
    let q = Query {
        constraint: rename_prop(&constraint, &scope),
        lhs: rename_bound(&lhs, &scope),
        rhs: rename_bound(&rhs, &scope),
        vars,
    };
    let mut fv = q.constraint.free_vars();
    fv.extend(q.lhs.free_vars());
    fv.extend(q.rhs.free_vars());
    let undeclared: Vec<Diagnostic> = fv
        .iter()
        .filter(|v| !q.vars.contains(v))
        .map(|v| Diagnostic {
            span: toks[0].1,
            kind: DiagKind::UndeclaredVariable,
            message: format!("variable `{v}` is not declared in the query context"),
        })
        .collect();
    if !undeclared.is_empty() {
        return Err(Diagnostics(undeclared));
    }
    Ok(q)
}

fn expect_eqeq(p: &mut Parser<'_>) -> Result<(), Diagnostic> {
    // reuse the declaration machinery's error reporting
    p.expect_tok_eqeq()
}

/// Parses a single session type; free variables are left as they are.
pub fn parse_type(text: &str) -> Result<SessionType, Diagnostics> {
    let toks = lexer::lex(text)?;
    let mut p = Parser::new(&toks);
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(rename_bound(&t, &t.free_vars()))
}

/// Parses a single arithmetic proposition.
pub fn parse_prop(text: &str) -> Result<ArithProp, Diagnostics> {
    let toks = lexer::lex(text)?;
    let mut p = Parser::new(&toks);
    let q = p.prop()?;
    p.expect_eof()?;
    Ok(rename_prop(&q, &q.free_vars()))
}

// ---------------------------------------------------------------------------
// renaming of bound variables

fn rename_def(d: TypeDef) -> TypeDef {
    let scope: BTreeSet<Name> = d.params.iter().cloned().collect();
    TypeDef {
        constraint: rename_prop(&d.constraint, &scope),
        body: rename_bound(&d.body, &scope),
        ..d
    }
}

fn rename_eq(e: EqDecl) -> EqDecl {
    let scope: BTreeSet<Name> = e.vars.iter().cloned().collect();
    EqDecl {
        constraint: rename_prop(&e.constraint, &scope),
        ..e
    }
}

/// Renames every binder that shadows a variable of `scope` (or an outer
/// binder) to a fresh name.
pub fn rename_bound(t: &SessionType, scope: &BTreeSet<Name>) -> SessionType {
    let mut avoid = scope.clone();
    crate::ast::all_var_names(t, &mut avoid);
    Renamer { avoid }.ty(t, &mut scope.clone())
}

fn rename_prop(p: &ArithProp, scope: &BTreeSet<Name>) -> ArithProp {
    let mut avoid = scope.clone();
    avoid.extend(p.free_vars());
    collect_prop_binders(p, &mut avoid);
    Renamer { avoid }.prop(p, &mut scope.clone())
}

fn collect_prop_binders(p: &ArithProp, out: &mut BTreeSet<Name>) {
    match p {
        ArithProp::And(a, b) | ArithProp::Or(a, b) => {
            collect_prop_binders(a, out);
            collect_prop_binders(b, out);
        }
        ArithProp::Not(a) => collect_prop_binders(a, out),
        ArithProp::Exists(v, b) | ArithProp::Forall(v, b) => {
            out.insert(v.clone());
            collect_prop_binders(b, out);
        }
        _ => {}
    }
}

struct Renamer {
    avoid: BTreeSet<Name>,
}

impl Renamer {
    fn binder(&mut self, v: &Name, scope: &BTreeSet<Name>) -> Option<Name> {
        if scope.contains(v) {
            let fresh = fresh_name(v, &self.avoid);
            self.avoid.insert(fresh.clone());
            Some(fresh)
        } else {
            None
        }
    }

    fn prop(&mut self, p: &ArithProp, scope: &mut BTreeSet<Name>) -> ArithProp {
        match p {
            ArithProp::And(a, b) => self.prop(a, scope).and(self.prop(b, scope)),
            ArithProp::Or(a, b) => self.prop(a, scope).or(self.prop(b, scope)),
            ArithProp::Not(a) => self.prop(a, scope).not(),
            ArithProp::Exists(v, body) | ArithProp::Forall(v, body) => {
                let (v2, body2) = match self.binder(v, scope) {
                    Some(fresh) => {
                        let s = [(v.clone(), crate::ast::ArithExpr::Var(fresh.clone()))].into();
                        (fresh, crate::ast::subst_prop(body, &s))
                    }
                    None => (v.clone(), (**body).clone()),
                };
                let fresh_in_scope = scope.insert(v2.clone());
                let inner = self.prop(&body2, scope);
                if fresh_in_scope {
                    scope.remove(&v2);
                }
                if matches!(p, ArithProp::Exists(..)) {
                    ArithProp::Exists(v2, Box::new(inner))
                } else {
                    ArithProp::Forall(v2, Box::new(inner))
                }
            }
            other => other.clone(),
        }
    }

    fn ty(&mut self, t: &SessionType, scope: &mut BTreeSet<Name>) -> SessionType {
        match t {
            SessionType::Plus(bs) => SessionType::Plus(
                bs.iter()
                    .map(|(l, a)| (l.clone(), self.ty(a, scope)))
                    .collect(),
            ),
            SessionType::With(bs) => SessionType::With(
                bs.iter()
                    .map(|(l, a)| (l.clone(), self.ty(a, scope)))
                    .collect(),
            ),
            SessionType::Tensor(a, b) => SessionType::tensor(self.ty(a, scope), self.ty(b, scope)),
            SessionType::Lolli(a, b) => SessionType::lolli(self.ty(a, scope), self.ty(b, scope)),
            SessionType::One => SessionType::One,
            SessionType::Assert(p, a) => {
                SessionType::assert(self.prop(p, scope), self.ty(a, scope))
            }
            SessionType::Assume(p, a) => {
                SessionType::assume(self.prop(p, scope), self.ty(a, scope))
            }
            SessionType::Exists(v, a) | SessionType::Forall(v, a) => {
                let (v2, a2) = match self.binder(v, scope) {
                    Some(fresh) => {
                        let s = [(v.clone(), crate::ast::ArithExpr::Var(fresh.clone()))].into();
                        (fresh, crate::ast::subst_type(a, &s))
                    }
                    None => (v.clone(), (**a).clone()),
                };
                let inserted = scope.insert(v2.clone());
                let inner = self.ty(&a2, scope);
                if inserted {
                    scope.remove(&v2);
                }
                if matches!(t, SessionType::Exists(..)) {
                    SessionType::Exists(v2, Box::new(inner))
                } else {
                    SessionType::Forall(v2, Box::new(inner))
                }
            }
            SessionType::Var(..) => t.clone(),
        }
    }
}
