//! Coefficient expressions used by the catalog data files.
//!
//! Grammar: rational literals, identifiers, `+ - * /`, `^` with an integer
//! exponent, parentheses and `sqrt(..)`. Constraints are `lhs != rhs` or a
//! tuple form `(a, b) != (c, d)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::field::{Elem, Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("cannot parse {text:?} at byte {pos}: {reason}")]
    Parse { text: String, pos: usize, reason: String },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a square in {1}")]
    NotASquare(String, Field),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Env = BTreeMap<String, Elem>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
}

/// Which square root `sqrt` picks. `Flipped` negates every root, giving the
/// other branch of a family written with a single radical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Principal,
    Flipped,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { text, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, env: &Env, field: Field) -> Result<Elem, ExprError> {
        self.eval_branch(env, field, Branch::Principal)
    }

    pub fn eval_branch(&self, env: &Env, field: Field, branch: Branch) -> Result<Elem, ExprError> {
        let ev = |e: &Expr| e.eval_branch(env, field, branch);
        Ok(match self {
            Expr::Num(q) => Elem::from_rational(field, q).map_err(|e| match e {
                FieldError::DivisionByZero => ExprError::DivisionByZero,
                e => e.into(),
            })?,
            Expr::Var(v) => {
                let x = env.get(v).ok_or_else(|| ExprError::UnknownSymbol(v.clone()))?;
                if x.field() != field {
                    return Err(FieldError::FieldMismatch(x.field(), field).into());
                }
                x.clone()
            }
            Expr::Neg(a) => ev(a)?.neg_ref(),
            Expr::Add(a, b) => ev(a)?.try_add(&ev(b)?)?,
            Expr::Sub(a, b) => ev(a)?.try_sub(&ev(b)?)?,
            Expr::Mul(a, b) => ev(a)?.try_mul(&ev(b)?)?,
            Expr::Div(a, b) => {
                let d = ev(b)?;
                if d.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                ev(a)?.try_div(&d)?
            }
            Expr::Pow(a, k) => {
                let x = ev(a)?;
                if *k >= 0 {
                    x.pow(*k as u32)
                } else {
                    x.inv().map_err(|_| ExprError::DivisionByZero)?.pow(k.unsigned_abs())
                }
            }
            Expr::Sqrt(a) => {
                let x = ev(a)?;
                let r = x.try_sqrt().ok_or_else(|| ExprError::NotASquare(x.to_string(), field))?;
                match branch {
                    Branch::Principal => r,
                    Branch::Flipped => r.neg_ref(),
                }
            }
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn has_sqrt(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Sqrt(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_sqrt(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.has_sqrt() || b.has_sqrt(),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &str) -> ExprError {
        ExprError::Parse { text: self.text.to_string(), pos: self.pos, reason: reason.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.product()?;
        loop {
            if self.eat('+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
            } else if self.eat('-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.product()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat('/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    // unary minus binds looser than ^, so -x^2 = -(x^2)
    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg_paren = self.eat('(');
            let neg = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let k: i32 = self.text[start..self.pos].parse().map_err(|_| self.err("expected integer exponent"))?;
            if neg_paren && !self.eat(')') {
                return Err(self.err("expected )"));
            }
            return Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected )"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let n: BigInt = self.text[start..self.pos].parse().expect("digits");
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    self.pos += self.peek().unwrap().len_utf8();
                }
                let name = &self.text[start..self.pos];
                if name == "sqrt" {
                    if !self.eat('(') {
                        return Err(self.err("expected ( after sqrt"));
                    }
                    let e = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.err("expected )"));
                    }
                    return Ok(Expr::Sqrt(Box::new(e)));
                }
                Ok(Expr::Var(name.to_string()))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// `lhs != rhs`, componentwise for tuples: violated when every component matches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub text: String,
    lhs: Vec<Expr>,
    rhs: Vec<Expr>,
}

fn split_tuple(s: &str) -> Result<Vec<Expr>, ExprError> {
    let t = s.trim();
    if t.starts_with('(') && t.ends_with(')') && t.contains(',') {
        let inner = &t[1..t.len() - 1];
        let mut parts = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(Expr::parse(&inner[start..i])?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(Expr::parse(&inner[start..])?);
        Ok(parts)
    } else {
        Ok(vec![Expr::parse(t)?])
    }
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Constraint, ExprError> {
        let (l, r) = text.split_once("!=").ok_or_else(|| ExprError::Parse {
            text: text.to_string(),
            pos: 0,
            reason: "expected !=".to_string(),
        })?;
        let lhs = split_tuple(l)?;
        let rhs = split_tuple(r)?;
        if lhs.len() != rhs.len() {
            return Err(ExprError::Parse { text: text.to_string(), pos: 0, reason: "tuple arity mismatch".to_string() });
        }
        Ok(Constraint { text: text.to_string(), lhs, rhs })
    }

    /// Evaluation errors (a zero denominator, a missing root) count as violations.
    pub fn holds(&self, env: &Env, field: Field) -> bool {
        let mut all_equal = true;
        for (a, b) in self.lhs.iter().zip(&self.rhs) {
            match (a.eval(env, field), b.eval(env, field)) {
                (Ok(x), Ok(y)) => {
                    if x != y {
                        all_equal = false;
                    }
                }
                _ => return false,
            }
        }
        !all_equal
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.lhs.iter().chain(&self.rhs).flat_map(|e| e.vars()).collect()
    }
}

/// Parses `{name: rational string}` into an environment over `field`.
pub fn env_from_strings(args: &BTreeMap<String, String>, field: Field) -> Result<Env, ExprError> {
    args.iter().map(|(k, v)| Ok((k.clone(), Expr::parse(v)?.eval(&Env::new(), field)?))).collect()
}
