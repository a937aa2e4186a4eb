//! Recursive-descent parser for the formula syntax.
//!
//! Precedence from tightest: prefix `!`, `X`, `X^k`, `G`, `F`; then `&`;
//! then `|`; then `U` (right associative); then `->` (right associative).

use num_bigint::BigInt;

use crate::error::{Error, Result, TextPos};
use crate::predicate::Registry;
use crate::scalar::Rat;

use super::surface::{Lin, Rel, Surface};
use super::Formula;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    True,
    False,
    Pred,
    Ident(String),
    Bang,
    Amp,
    Bar,
    Until,
    Arrow,
    Next(usize),
    Globally,
    Eventually,
    LParen,
    RParen,
    /// `x[t][c]`, 1-based as written.
    Var(usize, usize),
    Num(Rat),
    Plus,
    Minus,
    Star,
    Rel(Rel),
    Eof,
}

struct Lexer {
    chars: Vec<char>,
    idx: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            idx: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> TextPos {
        TextPos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.idx + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.idx).copied()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(pos: TextPos, message: impl Into<String>) -> Error {
        Error::Parse {
            pos,
            message: message.into(),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn index(&mut self) -> Result<usize> {
        let pos = self.pos();
        if self.bump() != Some('[') {
            return Err(Self::err(pos, "expected `[`"));
        }
        let pos = self.pos();
        let d = self.digits();
        let v: usize = d.parse().map_err(|_| Self::err(pos, "expected an index"))?;
        let pos = self.pos();
        if self.bump() != Some(']') {
            return Err(Self::err(pos, "expected `]`"));
        }
        Ok(v)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, TextPos)>> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            // `#` starts a comment running to the end of the line
            if self.peek() == Some('#') {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
                continue;
            }
            let pos = self.pos();
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '&' => {
                    self.bump();
                    Tok::Amp
                }
                '|' => {
                    self.bump();
                    Tok::Bar
                }
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '-' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        Tok::Minus
                    }
                }
                '!' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Rel(Rel::Ne)
                    } else {
                        Tok::Bang
                    }
                }
                '>' | '<' => {
                    self.bump();
                    let strict = self.peek() != Some('=');
                    if !strict {
                        self.bump();
                    }
                    Tok::Rel(match (c, strict) {
                        ('>', true) => Rel::Gt,
                        ('>', false) => Rel::Ge,
                        ('<', true) => Rel::Lt,
                        _ => Rel::Le,
                    })
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                    }
                    Tok::Rel(Rel::Eq)
                }
                d if d.is_ascii_digit() => {
                    let p = self.digits();
                    let num = if self.peek() == Some('/') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                        let q = self.digits();
                        let q: BigInt = q.parse().expect("digits");
                        if q == BigInt::from(0) {
                            return Err(Self::err(pos, "zero denominator"));
                        }
                        Rat::new(p.parse::<BigInt>().expect("digits"), q)?
                    } else {
                        Rat::from_int(p.parse::<BigInt>().expect("digits"))
                    };
                    Tok::Num(num)
                }
                'x' if self.peek_at(1) == Some('[') => {
                    self.bump();
                    let t = self.index()?;
                    let c = self.index()?;
                    Tok::Var(t, c)
                }
                a if a.is_alphabetic() || a == '_' => {
                    let mut word = String::new();
                    while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                        word.push(c);
                        self.bump();
                    }
                    match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "pred" => Tok::Pred,
                        "U" => Tok::Until,
                        "G" => Tok::Globally,
                        "F" => Tok::Eventually,
                        "X" => {
                            if self.peek() == Some('^') {
                                self.bump();
                                let p = self.pos();
                                let d = self.digits();
                                Tok::Next(d.parse().map_err(|_| Self::err(p, "expected an exponent after `X^`"))?)
                            } else {
                                Tok::Next(1)
                            }
                        }
                        _ => Tok::Ident(word),
                    }
                }
                other => return Err(Self::err(pos, format!("unexpected character `{other}`"))),
            };
            out.push((tok, pos));
        }
    }
}

struct Parser<'r> {
    toks: Vec<(Tok, TextPos)>,
    idx: usize,
    dim: usize,
    preds: &'r Registry,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> TextPos {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn formula(&mut self) -> Result<Surface> {
        let lhs = self.until()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Surface::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Surface> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Surface::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Surface> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Surface::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Surface> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Surface::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Surface> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Surface::Not(Box::new(self.unary()?)))
            }
            Tok::Next(k) => {
                self.bump();
                Ok(Surface::Next(k, Box::new(self.unary()?)))
            }
            Tok::Globally => {
                self.bump();
                Ok(Surface::Globally(Box::new(self.unary()?)))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Surface::Eventually(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Surface> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Surface::True)
            }
            Tok::False => {
                self.bump();
                Ok(Surface::False)
            }
            Tok::Pred => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(name) => {
                        if !self.preds.contains(&name) {
                            return self.err(format!("unknown predicate `{name}`"));
                        }
                        self.bump();
                        Ok(Surface::Pred(name))
                    }
                    _ => self.err("expected a predicate name after `pred`"),
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(f)
            }
            Tok::Var(..) | Tok::Num(_) | Tok::Plus | Tok::Minus => {
                let lhs = self.linear()?;
                let Tok::Rel(rel) = self.peek().clone() else {
                    return self.err("expected a comparison operator");
                };
                self.bump();
                let rhs = self.linear()?;
                Ok(Surface::Cmp(lhs, rel, rhs))
            }
            Tok::Eof => self.err("unexpected end of input"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }

    fn linear(&mut self) -> Result<Lin> {
        let mut acc = Lin::default();
        let mut sign = Rat::one();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                sign = -Rat::one();
            }
            Tok::Plus => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let term = self.term()?;
            acc = acc.add(&term, &sign);
            match self.peek() {
                Tok::Plus => sign = Rat::one(),
                Tok::Minus => sign = -Rat::one(),
                _ => return Ok(acc),
            }
            self.bump();
        }
    }

    fn term(&mut self) -> Result<Lin> {
        match self.peek().clone() {
            Tok::Num(c) => {
                self.bump();
                let starred = *self.peek() == Tok::Star;
                if starred {
                    self.bump();
                }
                match self.peek().clone() {
                    Tok::Var(t, k) => {
                        let v = self.variable(t, k)?;
                        self.bump();
                        Ok(Lin::var(v.0, v.1, c))
                    }
                    _ if starred => self.err("expected a variable after `*`"),
                    _ => Ok(Lin::constant(c)),
                }
            }
            Tok::Var(t, k) => {
                let v = self.variable(t, k)?;
                self.bump();
                Ok(Lin::var(v.0, v.1, Rat::one()))
            }
            _ => self.err("expected a number or a variable"),
        }
    }

    fn variable(&self, t: usize, c: usize) -> Result<(usize, usize)> {
        if t == 0 {
            return self.err("position offsets start at 1");
        }
        if c == 0 || c > self.dim {
            return self.err(format!("component {c} is outside [1, {}]", self.dim));
        }
        Ok((t - 1, c - 1))
    }
}

/// Parse surface syntax, resolving predicates against `preds`.
pub fn parse_surface(text: &str, dim: usize, preds: &Registry) -> Result<Surface> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        idx: 0,
        dim,
        preds,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

/// Parse and desugar with a custom predicate registry.
pub fn parse_with(text: &str, dim: usize, preds: &Registry) -> Result<Formula> {
    parse_surface(text, dim, preds)?.desugar(dim)
}

/// Parse and desugar, with the built-in predicates available.
pub fn parse(text: &str, dim: usize) -> Result<Formula> {
    parse_with(text, dim, &Registry::with_builtins())
}
