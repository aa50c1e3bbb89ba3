//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! form  := iff
//! iff   := imp ("<->" imp)*
//! imp   := or ("->" imp)?
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := "!" unary | "[h]" unary | "[v]" unary | "<h>" unary | "<v>" unary | atom
//! atom  := ident | "T" | "F" | "(" form ")"
//! ```

use super::{bx, dia, implies, not, var, Axis, Formula};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Arrow,
    Iff,
    BoxOp(Axis),
    DiaOp(Axis),
    LParen,
    RParen,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let skip_ws = |mut j: usize| {
        while j < b.len() && b[j].is_ascii_whitespace() {
            j += 1;
        }
        j
    };
    // Reads `h`/`v` followed by `close`, tolerating inner whitespace.
    let axis_then = |j: usize, close: u8| -> Result<(Axis, usize)> {
        let j = skip_ws(j);
        let axis = match b.get(j) {
            Some(b'h') => Axis::H,
            Some(b'v') => Axis::V,
            _ => return Err(err(j, "expected axis h or v")),
        };
        let k = skip_ws(j + 1);
        if b.get(k) != Some(&close) {
            return Err(err(k, format!("expected '{}'", close as char)));
        }
        Ok((axis, k + 1))
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'!' => {
                i += 1;
                Tok::Not
            }
            b'&' => {
                i += 1;
                Tok::And
            }
            b'|' => {
                i += 1;
                Tok::Or
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'-' => {
                if b.get(i + 1) != Some(&b'>') {
                    return Err(err(i, "expected '->'"));
                }
                i += 2;
                Tok::Arrow
            }
            b'[' => {
                let (axis, j) = axis_then(i + 1, b']')?;
                i = j;
                Tok::BoxOp(axis)
            }
            b'<' => {
                if b.get(i + 1) == Some(&b'-') {
                    if b.get(i + 2) != Some(&b'>') {
                        return Err(err(i, "expected '<->'"));
                    }
                    i += 3;
                    Tok::Iff
                } else {
                    let (axis, j) = axis_then(i + 1, b'>')?;
                    i = j;
                    Tok::DiaOp(axis)
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                i = j;
                match word {
                    "T" => Tok::True,
                    "F" => Tok::False,
                    w => Tok::Ident(w.to_string()),
                }
            }
            _ => return Err(err(i, format!("unexpected character {:?}", c as char))),
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut left = self.imp()?;
        while self.eat(&Tok::Iff) {
            let right = self.imp()?;
            left = Formula::And(vec![
                implies(left.clone(), right.clone()),
                implies(right, left),
            ]);
        }
        Ok(left)
    }

    fn imp(&mut self) -> Result<Formula> {
        let left = self.or()?;
        if self.eat(&Tok::Arrow) {
            let right = self.imp()?;
            return Ok(implies(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut xs = vec![self.and()?];
        while self.eat(&Tok::Or) {
            xs.push(self.and()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Formula::Or(xs)
        })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut xs = vec![self.unary()?];
        while self.eat(&Tok::And) {
            xs.push(self.unary()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Formula::And(xs)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        let at = self.here();
        let Some(t) = self.peek().cloned() else {
            return Err(err(at, "unexpected end of input"));
        };
        self.pos += 1;
        match t {
            Tok::Not => Ok(not(self.unary()?)),
            Tok::BoxOp(a) => Ok(bx(a, self.unary()?)),
            Tok::DiaOp(a) => Ok(dia(a, self.unary()?)),
            Tok::Ident(s) => Ok(var(s)),
            Tok::True => Ok(Formula::Top),
            Tok::False => Ok(Formula::Bot),
            Tok::LParen => {
                let f = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(err(self.here(), "expected ')'"));
                }
                Ok(f)
            }
            other => Err(err(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse the concrete syntax. `<->` is expanded into a conjunction of two
/// implications; `->` is kept as an `Implies` node.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(err(p.here(), "trailing input"));
    }
    Ok(f)
}
