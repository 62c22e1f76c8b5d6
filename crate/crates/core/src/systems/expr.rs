//! Right-hand sides written as text.
//!
//! One expression per component over `t` and `y1..yd`. Operators are
//! `+ - * / ^` with the usual precedence (`^` binds tightest and is
//! right-associative; unary minus binds looser than `^`, so `-x^2 = -(x^2)`).
//! Functions: `sin cos exp abs` (one argument), `min max` (two) and
//! `g_pw(x, a, b)`, the piecewise-linear LCR characteristic.

use std::fmt;

use crate::error::{Error, Result};
use crate::problem::VectorField;
use crate::scalar::Real;
use crate::systems::g_piecewise;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Min,
    Max,
    GPiecewise,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "g_pw" => Func::GPiecewise,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Sin | Func::Cos | Func::Exp | Func::Abs => 1,
            Func::Min | Func::Max => 2,
            Func::GPiecewise => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::GPiecewise => "g_pw",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    /// Zero-based component index (`y1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with an integer literal exponent, evaluated by repeated
    /// multiplication so negative bases work.
    PowInt(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval<S: Real>(&self, t: S, y: &[S]) -> S {
        match self {
            Expr::Num(v) => S::from_f64(*v),
            Expr::Time => t,
            Expr::Var(i) => y[*i],
            Expr::Neg(e) => -e.eval(t, y),
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(t, y), r.eval(t, y));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Expr::PowInt(base, n) => base.eval(t, y).powi(*n),
            Expr::Call(func, args) => {
                let arg = |i: usize| args[i].eval(t, y);
                match func {
                    Func::Sin => arg(0).sin(),
                    Func::Cos => arg(0).cos(),
                    Func::Exp => arg(0).exp(),
                    Func::Abs => arg(0).abs(),
                    Func::Min => arg(0).min(arg(1)),
                    Func::Max => arg(0).max(arg(1)),
                    Func::GPiecewise => g_piecewise(arg(0), arg(1), arg(2)),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Time => f.write_str("t"),
            Expr::Var(i) => write!(f, "y{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::PowInt(b, n) => write!(f, "({b} ^ {n})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed system: one expression per component.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsExpr {
    exprs: Vec<Expr>,
}

impl RhsExpr {
    pub fn components(&self) -> &[Expr] {
        &self.exprs
    }
}

impl<S: Real> VectorField<S> for RhsExpr {
    fn dim(&self) -> usize {
        self.exprs.len()
    }

    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        for (d, e) in dy.iter_mut().zip(&self.exprs) {
            *d = e.eval(t, y);
        }
    }
}

/// Parses one expression per component; `y1..yd` refer to the `d` components.
pub fn parse_rhs<T: AsRef<str>>(sources: &[T]) -> Result<RhsExpr> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("at least one expression is required".into()));
    }
    let dim = sources.len();
    let exprs = sources
        .iter()
        .enumerate()
        .map(|(i, s)| Parser::new(s.as_ref(), i + 1, dim)?.parse())
        .collect::<Result<_>>()?;
    Ok(RhsExpr { exprs })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

/// Token with its 1-based column.
#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn tokenize(src: &str, expr: usize) -> Result<Vec<Spanned>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                expr,
                position: pos,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Spanned { tok: Tok::Num(value), pos });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(src[start..i].to_string()),
                pos,
            });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                let ch = src[i..].chars().next().unwrap_or(c);
                return Err(Error::Syntax {
                    expr,
                    position: pos,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push(Spanned { tok, pos });
        i += 1;
    }
    out.push(Spanned {
        tok: Tok::End,
        pos: src.len() + 1,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    expr: usize,
    dim: usize,
}

impl Parser {
    fn new(src: &str, expr: usize, dim: usize) -> Result<Self> {
        Ok(Self {
            toks: tokenize(src, expr)?,
            at: 0,
            expr,
            dim,
        })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, pos: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            expr: self.expr,
            position: pos,
            message: message.into(),
        }
    }

    fn parse(mut self) -> Result<Expr> {
        let e = self.additive()?;
        let next = self.peek();
        if next.tok != Tok::End {
            return Err(self.syntax(next.pos, format!("unexpected {:?}", next.tok)));
        }
        Ok(e)
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().tok {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let exponent = self.unary()?;
        let literal = match &exponent {
            Expr::Num(v) => Some(*v),
            Expr::Neg(inner) => match **inner {
                Expr::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        };
        Ok(match literal {
            Some(v) if v.fract() == 0.0 && v.abs() <= 64.0 => Expr::PowInt(Box::new(base), v as i32),
            _ => Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
        })
    }

    fn primary(&mut self) -> Result<Expr> {
        let Spanned { tok, pos } = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.additive()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(self.syntax(close.pos, "expected `)`"));
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    return self.call(name, pos);
                }
                self.variable(&name, pos)
            }
            Tok::End => Err(self.syntax(pos, "unexpected end of expression")),
            other => Err(self.syntax(pos, format!("unexpected {other:?}"))),
        }
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Expr> {
        if name == "t" {
            return Ok(Expr::Time);
        }
        if let Some(digits) = name.strip_prefix('y') {
            if let Ok(k) = digits.parse::<usize>() {
                if (1..=self.dim).contains(&k) && !digits.starts_with('0') {
                    return Ok(Expr::Var(k - 1));
                }
            }
        }
        Err(Error::UnknownIdentifier {
            expr: self.expr,
            position: pos,
            name: name.to_string(),
        })
    }

    fn call(&mut self, name: String, pos: usize) -> Result<Expr> {
        let func = Func::lookup(&name).ok_or_else(|| Error::UnknownIdentifier {
            expr: self.expr,
            position: pos,
            name: name.clone(),
        })?;
        self.bump(); // '('
        let mut args = Vec::new();
        if self.peek().tok == Tok::RParen {
            self.bump();
        } else {
            loop {
                args.push(self.additive()?);
                let sep = self.bump();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return Err(self.syntax(sep.pos, "expected `,` or `)`")),
                }
            }
        }
        if args.len() != func.arity() {
            return Err(Error::Arity {
                expr: self.expr,
                name,
                expected: func.arity(),
                found: args.len(),
            });
        }
        Ok(Expr::Call(func, args))
    }
}
