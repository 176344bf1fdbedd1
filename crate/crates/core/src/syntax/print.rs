//! Surface-syntax rendering. Everything printed here parses back to an
//! equal AST (up to bound-variable names).

use std::fmt::{self, Display, Formatter, Write};

use crate::ast::{
    ArithExpr, ArithProp, Closure, EqDecl, Instance, Name, SessionType, Signature, TypeDef,
};

impl Display for ArithExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        expr(self, f, 0)
    }
}

// precedence: 0 = sum position, 1 = right operand of `-`, 2 = product operand
fn expr(e: &ArithExpr, f: &mut Formatter<'_>, prec: u8) -> fmt::Result {
    match e {
        ArithExpr::Const(c) if c.sign() == num_bigint::Sign::Minus => write!(f, "(0-{})", -c),
        ArithExpr::Const(c) => write!(f, "{c}"),
        ArithExpr::Var(v) => f.write_str(v),
        ArithExpr::Add(a, b) | ArithExpr::Sub(a, b) => {
            let op = if matches!(e, ArithExpr::Add(..)) {
                '+'
            } else {
                '-'
            };
            if prec > 0 {
                f.write_char('(')?;
            }
            expr(a, f, 0)?;
            f.write_char(op)?;
            expr(b, f, 1)?;
            if prec > 0 {
                f.write_char(')')?;
            }
            Ok(())
        }
        ArithExpr::Mul(a, b) => {
            if prec > 1 {
                f.write_char('(')?;
            }
            expr(a, f, 2)?;
            f.write_char('*')?;
            expr(b, f, 2)?;
            if prec > 1 {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for ArithProp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        prop(self, f, 0, true)
    }
}

/// `a > b \/ a = b` is how `a >= b` is represented.
fn as_ge(p: &ArithProp) -> Option<(&ArithExpr, &ArithExpr)> {
    if let ArithProp::Or(l, r) = p {
        if let (ArithProp::Gt(a, b), ArithProp::Eq(c, d)) = (l.as_ref(), r.as_ref()) {
            if a == c && b == d {
                return Some((a, b));
            }
        }
    }
    None
}

// precedence: 0 = top, 1 = operand of \/, 2 = operand of /\, 3 = operand of ~.
// `last` is false when more of the formula follows on the right, where a
// quantifier body would otherwise swallow it.
fn prop(p: &ArithProp, f: &mut Formatter<'_>, prec: u8, last: bool) -> fmt::Result {
    if let Some((a, b)) = as_ge(p) {
        return write!(f, "{a} >= {b}");
    }
    let paren =
        |f: &mut Formatter<'_>, need: bool, body: &dyn Fn(&mut Formatter<'_>) -> fmt::Result| {
            if need {
                f.write_char('(')?;
            }
            body(f)?;
            if need {
                f.write_char(')')?;
            }
            Ok(())
        };
    match p {
        ArithProp::True => f.write_str("true"),
        ArithProp::False => f.write_str("false"),
        ArithProp::Eq(a, b) => write!(f, "{a} = {b}"),
        ArithProp::Gt(a, b) => write!(f, "{a} > {b}"),
        ArithProp::Divides(d, e) => write!(f, "{d} | {e}"),
        ArithProp::Or(a, b) => paren(f, prec > 0, &|f| {
            prop(a, f, 0, false)?;
            f.write_str(" \\/ ")?;
            prop(b, f, 1, last || prec > 0)
        }),
        ArithProp::And(a, b) => paren(f, prec > 1, &|f| {
            prop(a, f, 1, false)?;
            f.write_str(" /\\ ")?;
            prop(b, f, 2, last || prec > 1)
        }),
        ArithProp::Not(a) => {
            f.write_char('~')?;
            paren(f, !matches!(a.as_ref(), ArithProp::Not(_)), &|f| {
                prop(a, f, 0, true)
            })
        }
        ArithProp::Exists(v, body) | ArithProp::Forall(v, body) => {
            let kw = if matches!(p, ArithProp::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            paren(f, prec > 0 || !last, &|f| {
                write!(f, "{kw} {v}. ")?;
                prop(body, f, 0, true)
            })
        }
    }
}

impl Display for SessionType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        ty(self, f, false)
    }
}

fn write_indices(f: &mut Formatter<'_>, args: &[ArithExpr]) -> fmt::Result {
    for a in args {
        write!(f, "[{a}]")?;
    }
    Ok(())
}

fn branches(f: &mut Formatter<'_>, open: &str, bs: &[(Name, SessionType)]) -> fmt::Result {
    f.write_str(open)?;
    for (i, (l, t)) in bs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{l}: ")?;
        ty(t, f, false)?;
    }
    f.write_char('}')
}

// `left` = printed as the left operand of `*` / `-o`
fn ty(t: &SessionType, f: &mut Formatter<'_>, left: bool) -> fmt::Result {
    let needs_paren = left
        && matches!(
            t,
            SessionType::Tensor(..)
                | SessionType::Lolli(..)
                | SessionType::Assert(..)
                | SessionType::Assume(..)
                | SessionType::Exists(..)
                | SessionType::Forall(..)
        );
    if needs_paren {
        f.write_char('(')?;
    }
    match t {
        SessionType::Plus(bs) => branches(f, "+{", bs)?,
        SessionType::With(bs) => branches(f, "&{", bs)?,
        SessionType::Tensor(a, b) => {
            ty(a, f, true)?;
            f.write_str(" * ")?;
            ty(b, f, false)?;
        }
        SessionType::Lolli(a, b) => {
            ty(a, f, true)?;
            f.write_str(" -o ")?;
            ty(b, f, false)?;
        }
        SessionType::One => f.write_char('1')?,
        SessionType::Assert(p, a) => {
            write!(f, "?{{{p}}}. ")?;
            ty(a, f, false)?;
        }
        SessionType::Assume(p, a) => {
            write!(f, "!{{{p}}}. ")?;
            ty(a, f, false)?;
        }
        SessionType::Exists(v, a) => {
            write!(f, "?{v}. ")?;
            ty(a, f, false)?;
        }
        SessionType::Forall(v, a) => {
            write!(f, "!{v}. ")?;
            ty(a, f, false)?;
        }
        SessionType::Var(n, args) => {
            f.write_str(n)?;
            write_indices(f, args)?;
        }
    }
    if needs_paren {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for Instance {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        write_indices(f, &self.args)
    }
}

/// Renders a variable context `{x, y | C}`.
pub struct Context<'a>(pub &'a [Name], pub &'a ArithProp);

impl Display for Context<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        f.write_str(&self.0.join(", "))?;
        if *self.1 != ArithProp::True {
            if !self.0.is_empty() {
                f.write_char(' ')?;
            }
            write!(f, "| {}", self.1)?;
        }
        f.write_char('}')
    }
}

impl Display for TypeDef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "type {}", self.name)?;
        let last = self.params.len().saturating_sub(1);
        for (i, p) in self.params.iter().enumerate() {
            if i == last && self.constraint != ArithProp::True {
                write!(f, "[{p} | {}]", self.constraint)?;
            } else {
                write!(f, "[{p}]")?;
            }
        }
        if self.params.is_empty() && self.constraint != ArithProp::True {
            // no parameter to hang the constraint on; it can only be closed
            write!(f, "[| {}]", self.constraint)?;
        }
        write!(f, " = {}", self.body)
    }
}

impl Display for EqDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eqtype {} {} == {}",
            Context(&self.vars, &self.constraint),
            self.lhs,
            self.rhs
        )
    }
}

impl Display for Closure {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}; {} == {}>",
            Context(&self.vars, &self.constraint),
            self.lhs,
            self.rhs
        )
    }
}

pub fn print_type(t: &SessionType) -> String {
    t.to_string()
}

/// One declaration per line, definitions first.
pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for d in sig.defs() {
        let _ = writeln!(out, "{d}");
    }
    for e in sig.eq_decls() {
        let _ = writeln!(out, "{e}");
    }
    out
}
