use std::fmt;

use num_bigint::BigInt;

use super::{DiagKind, Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Bar,
    Plus,
    Minus,
    Star,
    Amp,
    Question,
    Bang,
    Lolli,
    Eq,
    EqEq,
    Gt,
    Lt,
    Ge,
    Le,
    And,
    Or,
    Tilde,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Bar => "|",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Amp => "&",
            Tok::Question => "?",
            Tok::Bang => "!",
            Tok::Lolli => "-o",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Gt => ">",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Le => "<=",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Tilde => "~",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `text` into tokens. `%` starts a comment running to the end of the
/// line, except that `%` immediately followed by a digit is an internal name
/// such as `%5`.
pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let end_of = |i: usize| chars.get(i).map(|&(b, _)| b).unwrap_or(text.len());

    while i < chars.len() {
        let (start, c) = chars[i];
        let span_at = |len: usize, line: u32, col: u32| Span {
            start,
            end: end_of(i + len),
            line,
            col,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            if chars.get(i + 1).is_some_and(|&(_, d)| d.is_ascii_digit()) {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                out.push((
                    Tok::Ident(text[start..end_of(j)].to_string()),
                    span_at(j - i, line, col),
                ));
                col += (j - i) as u32;
                i = j;
            } else {
                while i < chars.len() && chars[i].1 != '\n' {
                    i += 1;
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < chars.len() && is_ident_continue(chars[j].1) {
                j += 1;
            }
            out.push((
                Tok::Ident(text[start..end_of(j)].to_string()),
                span_at(j - i, line, col),
            ));
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let value: BigInt = text[start..end_of(j)].parse().expect("digits");
            out.push((Tok::Int(value), span_at(j - i, line, col)));
            col += (j - i) as u32;
            i = j;
            continue;
        }
        let next = chars.get(i + 1).map(|&(_, d)| d);
        let after = chars.get(i + 2).map(|&(_, d)| d);
        let (tok, len) = match (c, next) {
            ('-', Some('o')) if !after.is_some_and(is_ident_continue) => (Tok::Lolli, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('/', Some('\\')) => (Tok::And, 2),
            ('\\', Some('/')) => (Tok::Or, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            ('|', _) => (Tok::Bar, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('&', _) => (Tok::Amp, 1),
            ('?', _) => (Tok::Question, 1),
            ('!', _) => (Tok::Bang, 1),
            ('=', _) => (Tok::Eq, 1),
            ('>', _) => (Tok::Gt, 1),
            ('<', _) => (Tok::Lt, 1),
            ('~', _) => (Tok::Tilde, 1),
            _ => {
                return Err(Diagnostic {
                    span: span_at(1, line, col),
                    kind: DiagKind::Lexical,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, span_at(len, line, col)));
        col += len as u32;
        i += len;
    }
    out.push((
        Tok::Eof,
        Span {
            start: text.len(),
            end: text.len(),
            line,
            col,
        },
    ));
    Ok(out)
}
