use num_traits::{One, Zero};

use super::lexer::Tok;
use super::{DiagKind, Diagnostic, Span};
use crate::ast::{ArithExpr, ArithProp, EqDecl, Instance, Name, SessionType, TypeDef};

const KEYWORDS: &[&str] = &["type", "eqtype", "exists", "forall", "true", "false"];

pub(crate) type PResult<T> = Result<T, Diagnostic>;

pub(crate) enum Decl {
    Type(TypeDef, Span),
    Eq(EqDecl, Span),
}

pub(crate) struct Parser<'a> {
    toks: &'a [(Tok, Span)],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [(Tok, Span)]) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: String) -> PResult<T> {
        Err(Diagnostic {
            span: self.span(),
            kind: DiagKind::Syntax,
            message,
        })
    }

    fn expect(&mut self, tok: &Tok) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> PResult<(Name, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    pub(crate) fn expect_tok_eqeq(&mut self) -> PResult<()> {
        self.expect(&Tok::EqEq).map(|_| ())
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(format!("unexpected {} after end of input", self.peek()))
        }
    }

    // ----------------------------------------------------------------- decls

    pub(crate) fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        if self.is_keyword("type") {
            self.bump();
            let (name, _) = self.ident("a type name")?;
            let (params, constraint) = self.params()?;
            self.expect(&Tok::Eq)?;
            let body = self.ty()?;
            let span = start.to(self.prev_span());
            Ok(Decl::Type(
                TypeDef {
                    name,
                    params,
                    constraint,
                    body,
                },
                span,
            ))
        } else if self.is_keyword("eqtype") {
            self.bump();
            let (vars, constraint) = if *self.peek() == Tok::LBrace {
                self.context()?
            } else {
                (Vec::new(), ArithProp::True)
            };
            let lhs = self.instance()?;
            self.expect(&Tok::EqEq)?;
            let rhs = self.instance()?;
            let span = start.to(self.prev_span());
            Ok(Decl::Eq(
                EqDecl {
                    vars,
                    constraint,
                    lhs,
                    rhs,
                },
                span,
            ))
        } else {
            self.error(format!(
                "expected `type` or `eqtype`, found {}",
                self.peek()
            ))
        }
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    /// `[n1][n2 | phi]` or `[n1, n2 | phi]`; constraints from several
    /// brackets are conjoined.
    fn params(&mut self) -> PResult<(Vec<Name>, ArithProp)> {
        let mut params = Vec::new();
        let mut constraint = ArithProp::True;
        while self.eat(&Tok::LBrack) {
            while *self.peek() != Tok::Bar {
                params.push(self.ident("a parameter name")?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            if self.eat(&Tok::Bar) {
                let p = self.prop()?;
                constraint = ArithProp::conj([constraint, p]);
            }
            self.expect(&Tok::RBrack)?;
        }
        Ok((params, constraint))
    }

    /// `{x, y | C}`, `{x, y}` or `{}`.
    pub(crate) fn context(&mut self) -> PResult<(Vec<Name>, ArithProp)> {
        self.expect(&Tok::LBrace)?;
        let mut vars = Vec::new();
        if matches!(self.peek(), Tok::Ident(_)) {
            loop {
                vars.push(self.ident("a variable name")?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let constraint = if self.eat(&Tok::Bar) {
            self.prop()?
        } else {
            ArithProp::True
        };
        self.expect(&Tok::RBrace)?;
        Ok((vars, constraint))
    }

    fn instance(&mut self) -> PResult<Instance> {
        let (name, _) = self.ident("a type name")?;
        let args = self.indices()?;
        Ok(Instance { name, args })
    }

    fn indices(&mut self) -> PResult<Vec<ArithExpr>> {
        let mut args = Vec::new();
        while self.eat(&Tok::LBrack) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrack)?;
        }
        Ok(args)
    }

    // ----------------------------------------------------------------- types

    pub(crate) fn ty(&mut self) -> PResult<SessionType> {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Question, Tok::LBrace) | (Tok::Bang, Tok::LBrace) => {
                let assert = *self.peek() == Tok::Question;
                self.bump();
                self.bump();
                let p = self.prop()?;
                self.expect(&Tok::RBrace)?;
                self.expect(&Tok::Dot)?;
                let t = self.ty()?;
                Ok(if assert {
                    SessionType::assert(p, t)
                } else {
                    SessionType::assume(p, t)
                })
            }
            (Tok::Question, Tok::Ident(_)) | (Tok::Bang, Tok::Ident(_)) => {
                let exists = *self.peek() == Tok::Question;
                self.bump();
                let (v, _) = self.ident("a variable name")?;
                self.expect(&Tok::Dot)?;
                let t = self.ty()?;
                Ok(if exists {
                    SessionType::Exists(v, Box::new(t))
                } else {
                    SessionType::Forall(v, Box::new(t))
                })
            }
            _ => {
                let left = self.atom_ty()?;
                match self.peek() {
                    Tok::Star => {
                        self.bump();
                        Ok(SessionType::tensor(left, self.ty()?))
                    }
                    Tok::Lolli => {
                        self.bump();
                        Ok(SessionType::lolli(left, self.ty()?))
                    }
                    _ => Ok(left),
                }
            }
        }
    }

    fn atom_ty(&mut self) -> PResult<SessionType> {
        match self.peek().clone() {
            Tok::Plus => {
                self.bump();
                Ok(SessionType::Plus(self.branches()?))
            }
            Tok::Amp => {
                self.bump();
                Ok(SessionType::With(self.branches()?))
            }
            Tok::Int(i) if i.is_one() => {
                self.bump();
                Ok(SessionType::One)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let inst = self.instance()?;
                Ok(inst.to_type())
            }
            other => self.error(format!("expected a session type, found {other}")),
        }
    }

    fn branches(&mut self) -> PResult<Vec<(Name, SessionType)>> {
        let open = self.expect(&Tok::LBrace)?;
        let mut out: Vec<(Name, SessionType)> = Vec::new();
        loop {
            if *self.peek() == Tok::RBrace {
                break;
            }
            let (label, lspan) = match self.peek().clone() {
                Tok::Ident(s) => (s, self.bump().1),
                other => return self.error(format!("expected a label, found {other}")),
            };
            if out.iter().any(|(l, _)| *l == label) {
                return Err(Diagnostic {
                    span: lspan,
                    kind: DiagKind::Syntax,
                    message: format!("duplicate label `{label}` in choice"),
                });
            }
            self.expect(&Tok::Colon)?;
            let t = self.ty()?;
            out.push((label, t));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBrace)?;
        if out.is_empty() {
            return Err(Diagnostic {
                span: open,
                kind: DiagKind::Syntax,
                message: "a choice needs at least one label".into(),
            });
        }
        Ok(out)
    }

    // ------------------------------------------------------------ propositions

    pub(crate) fn prop(&mut self) -> PResult<ArithProp> {
        let mut left = self.conj()?;
        while self.eat(&Tok::Or) {
            let right = self.conj()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn conj(&mut self) -> PResult<ArithProp> {
        let mut left = self.unary_prop()?;
        while self.eat(&Tok::And) {
            let right = self.unary_prop()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn unary_prop(&mut self) -> PResult<ArithProp> {
        if self.eat(&Tok::Tilde) {
            return Ok(self.unary_prop()?.not());
        }
        if self.is_keyword("exists") || self.is_keyword("forall") {
            let exists = self.is_keyword("exists");
            self.bump();
            let (v, _) = self.ident("a variable name")?;
            self.expect(&Tok::Dot)?;
            let body = self.prop()?;
            return Ok(if exists {
                ArithProp::Exists(v, Box::new(body))
            } else {
                ArithProp::Forall(v, Box::new(body))
            });
        }
        if self.is_keyword("true") {
            self.bump();
            return Ok(ArithProp::True);
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(ArithProp::False);
        }
        if *self.peek() == Tok::LParen {
            // `(` opens either a proposition or an expression on the left of
            // a comparison; try the comparison first.
            let save = self.pos;
            if let Ok(atom) = self.atom_prop() {
                return Ok(atom);
            }
            self.pos = save;
            self.bump();
            let p = self.prop()?;
            self.expect(&Tok::RParen)?;
            return Ok(p);
        }
        self.atom_prop()
    }

    fn atom_prop(&mut self) -> PResult<ArithProp> {
        if let (Tok::Int(d), Tok::Bar) = (self.peek().clone(), self.peek_at(1)) {
            let sp = self.span();
            self.bump();
            self.bump();
            if d.is_zero() {
                return Err(Diagnostic {
                    span: sp,
                    kind: DiagKind::Syntax,
                    message: "divisor must be positive".into(),
                });
            }
            let e = self.expr()?;
            return Ok(ArithProp::Divides(d, e));
        }
        let a = self.expr()?;
        let op = self.peek().clone();
        let mk: fn(ArithExpr, ArithExpr) -> ArithProp = match op {
            Tok::Eq => ArithProp::eq,
            Tok::Gt => ArithProp::gt,
            Tok::Lt => |a, b| ArithProp::gt(b, a),
            Tok::Ge => ArithProp::ge,
            Tok::Le => |a, b| ArithProp::ge(b, a),
            other => return self.error(format!("expected a comparison, found {other}")),
        };
        self.bump();
        let b = self.expr()?;
        Ok(mk(a, b))
    }

    // ------------------------------------------------------------- expressions

    pub(crate) fn expr(&mut self) -> PResult<ArithExpr> {
        let mut left = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    left = left + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    left = left - self.term()?;
                }
                _ => return Ok(left),
            }
        }
    }

    fn term(&mut self) -> PResult<ArithExpr> {
        let mut left = self.factor()?;
        while self.eat(&Tok::Star) {
            left = left * self.factor()?;
        }
        Ok(left)
    }

    fn factor(&mut self) -> PResult<ArithExpr> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(ArithExpr::Const(i))
            }
            Tok::Ident(_) => Ok(ArithExpr::Var(self.ident("a variable")?.0)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            other => self.error(format!("expected an arithmetic expression, found {other}")),
        }
    }
}
