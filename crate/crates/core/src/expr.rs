//! Form expressions such as `delta^2 - delta` or `E4^3 - 2*E6^2`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" uint)?
//! atom   := "delta" | "E4" | "E6" | uint | "(" expr ")"
//! ```

use std::fmt;

use crate::basis::GradedForm;
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::par::Execution;
use crate::series::{self, QSeries};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FormExpr {
    Delta,
    E4,
    E6,
    Int(u64),
    Add(Box<FormExpr>, Box<FormExpr>),
    Sub(Box<FormExpr>, Box<FormExpr>),
    Mul(Box<FormExpr>, Box<FormExpr>),
    Pow(Box<FormExpr>, u32),
}

impl FormExpr {
    fn precedence(&self) -> u8 {
        match self {
            FormExpr::Add(..) | FormExpr::Sub(..) => 1,
            FormExpr::Mul(..) => 2,
            FormExpr::Pow(..) => 3,
            _ => 4,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            FormExpr::Delta => write!(f, "delta"),
            FormExpr::E4 => write!(f, "E4"),
            FormExpr::E6 => write!(f, "E6"),
            FormExpr::Int(n) => write!(f, "{n}"),
            FormExpr::Add(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " + ")?;
                b.write_at(f, 2)
            }
            FormExpr::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " - ")?;
                b.write_at(f, 2)
            }
            FormExpr::Mul(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "*")?;
                b.write_at(f, 3)
            }
            FormExpr::Pow(a, n) => {
                a.write_at(f, 4)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for FormExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_form_expression(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn err(column: usize, message: &str) -> Error {
    Error::Parse { column, message: message.to_string() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(col, "integer literal too large"))?;
            out.push((Tok::Num(n), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(err(col, &format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn expr(&mut self) -> Result<FormExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = FormExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = FormExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<FormExpr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = FormExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<FormExpr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.column();
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = u32::try_from(*n).map_err(|_| err(col, "exponent too large"))?;
                self.pos += 1;
                Ok(FormExpr::Pow(Box::new(base), n))
            }
            _ => Err(err(col, "expected a non-negative integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<FormExpr> {
        let col = self.column();
        let Some(tok) = self.peek().cloned() else {
            return Err(err(col, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(FormExpr::Int(n)),
            Tok::Ident(name) => match name.as_str() {
                "delta" | "Delta" => Ok(FormExpr::Delta),
                "E4" | "e4" => Ok(FormExpr::E4),
                "E6" | "e6" => Ok(FormExpr::E6),
                _ => Err(err(col, "unsupported atom")),
            },
            Tok::Open => {
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(err(self.column(), "expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(err(col, "expected an atom")),
        }
    }
}

pub fn parse_form_expression(text: &str) -> Result<FormExpr> {
    let toks = tokenize(text)?;
    let end = text.chars().count() + 1;
    if toks.is_empty() {
        return Err(err(1, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.column(), "unexpected token"));
    }
    Ok(e)
}

/// A series with its weight; `None` marks a zero series, which fits any
/// weight.
struct Value {
    series: QSeries,
    weight: Option<u32>,
}

fn common_weight(p: Prime, a: u32, b: u32) -> Result<u32> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let d = hi - lo;
    if d % (p.get() as u32 - 1) == 0 && d != 2 {
        Ok(hi)
    } else {
        Err(Error::MixedWeight(a, b))
    }
}

fn eval(e: &FormExpr, p: Prime, prec: usize, exec: Execution) -> Result<Value> {
    let weighted = |series: QSeries, w: u32| Value { weight: (!series.is_zero()).then_some(w), series };
    Ok(match e {
        FormExpr::Delta => weighted(series::delta_power_with(p, 1, prec, exec), 12),
        FormExpr::E4 => weighted(series::eisenstein(p, 4, prec)?, 4),
        FormExpr::E6 => weighted(series::eisenstein(p, 6, prec)?, 6),
        FormExpr::Int(n) => weighted(QSeries::constant(p, p.reduce(*n), prec), 0),
        FormExpr::Pow(b, n) if **b == FormExpr::Delta => {
            weighted(series::delta_power_with(p, *n as u64, prec, exec), 12 * n)
        }
        FormExpr::Pow(b, n) => {
            let v = eval(b, p, prec, exec)?;
            if *n == 0 {
                return Ok(weighted(QSeries::one(p, prec), 0));
            }
            let w = v.weight.map(|w| w * n);
            let s = series::pow_with(&v.series, *n as u64, exec);
            Value { weight: w.filter(|_| !s.is_zero()), series: s }
        }
        FormExpr::Mul(a, b) => {
            let (x, y) = (eval(a, p, prec, exec)?, eval(b, p, prec, exec)?);
            let s = series::mul_with(&x.series, &y.series, exec)?;
            let w = x.weight.zip(y.weight).map(|(u, v)| u + v);
            Value { weight: w.filter(|_| !s.is_zero()), series: s }
        }
        FormExpr::Add(a, b) | FormExpr::Sub(a, b) => {
            let (x, y) = (eval(a, p, prec, exec)?, eval(b, p, prec, exec)?);
            let w = match (x.weight, y.weight) {
                (Some(u), Some(v)) => Some(common_weight(p, u, v)?),
                (u, v) => u.or(v),
            };
            let s = if matches!(e, FormExpr::Add(..)) { x.series.add(&y.series)? } else { x.series.sub(&y.series)? };
            Value { series: s, weight: w }
        }
    })
}

/// Evaluates to `prec` coefficients. Summands of different weights are
/// lifted to the larger one when the weights agree mod `p - 1`.
pub fn evaluate(e: &FormExpr, p: Prime, prec: usize) -> Result<GradedForm> {
    evaluate_with(e, p, prec, Execution::default())
}

pub fn evaluate_with(e: &FormExpr, p: Prime, prec: usize, exec: Execution) -> Result<GradedForm> {
    if prec == 0 {
        return Err(Error::PrecisionTooSmall { need: 1, got: 0 });
    }
    let v = eval(e, p, prec, exec)?;
    GradedForm::new(v.series, v.weight.unwrap_or(0))
}
