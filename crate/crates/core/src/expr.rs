//! A small expression grammar for functions of one complex variable.
//!
//! Supported: numbers, `i`, `pi`, `e`, one variable, `+ - * / ^`, unary minus,
//! implicit multiplication (`2z`, `3(z+1)`), and `exp`, `sin`, `cos`, `sqrt`, `log`.
//! Expressions built from the variable with integer powers convert to a [`RationalMap`].

use crate::holomorphic::{HoloError, RationalMap};
use crate::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token at {pos}")]
    UnexpectedToken { pos: usize },
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("not a rational expression: {0}")]
    NotRational(String),
    #[error(transparent)]
    Holo(#[from] HoloError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
}

impl Func {
    fn apply(self, x: C64) -> C64 {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
            Func::Log => x.ln(),
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(C64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when followed by digits, so `2e` stays `2 * e`
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError::UnexpectedChar { ch, pos: start })?;
            out.push((Tok::Num(v), start));
        } else if ch.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Op(ch), i));
            i += 1;
        } else {
            return Err(ExprError::UnexpectedChar { ch, pos: i });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(usize::MAX)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(
                self.peek(),
                Some(Tok::Num(_) | Tok::Ident(_) | Tok::Op('('))
            ) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

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
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        let tok = self.peek().cloned().ok_or(ExprError::UnexpectedEnd)?;
        self.at += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(C64::new(v, 0.0))),
            Tok::Op('(') => {
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.unexpected());
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "sqrt" => Some(Func::Sqrt),
                    "log" | "ln" => Some(Func::Log),
                    _ => None,
                };
                if let Some(f) = func {
                    if !self.eat('(') {
                        return Err(self.unexpected());
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.unexpected());
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    n if n == self.var => Ok(Expr::Var),
                    "i" => Ok(Expr::Num(C64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::Num(C64::new(std::f64::consts::PI, 0.0))),
                    "e" => Ok(Expr::Num(C64::new(std::f64::consts::E, 0.0))),
                    _ => Err(ExprError::UnknownIdent(name)),
                }
            }
            Tok::Op(_) => Err(ExprError::UnexpectedToken { pos }),
        }
    }

    fn unexpected(&self) -> ExprError {
        if self.at >= self.toks.len() {
            ExprError::UnexpectedEnd
        } else {
            ExprError::UnexpectedToken { pos: self.pos() }
        }
    }
}

impl Expr {
    /// Parses `src` with the given variable name.
    pub fn parse(src: &str, var: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            toks: lex(src)?,
            at: 0,
            var,
        };
        let e = p.sum()?;
        if p.at != p.toks.len() {
            return Err(p.unexpected());
        }
        Ok(e)
    }

    pub fn eval(&self, x: C64) -> C64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => match b.integer_constant() {
                Some(k) => a.eval(x).powi(k),
                None => a.eval(x).powc(b.eval(x)),
            },
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    fn depends_on_var(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_var(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_var() || b.depends_on_var(),
        }
    }

    fn integer_constant(&self) -> Option<i32> {
        if self.depends_on_var() {
            return None;
        }
        let v = self.eval(C64::new(0.0, 0.0));
        (v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= i32::MAX as f64).then_some(v.re as i32)
    }

    /// Converts to a rational map in normal form.
    pub fn to_rational(&self) -> Result<RationalMap, ExprError> {
        if !self.depends_on_var() {
            let v = self.eval(C64::new(0.0, 0.0));
            if !v.is_finite() {
                return Err(ExprError::NotRational("non-finite constant".into()));
            }
            return Ok(RationalMap::constant(v));
        }
        Ok(match self {
            Expr::Num(c) => RationalMap::constant(*c),
            Expr::Var => RationalMap::z(),
            Expr::Neg(a) => a.to_rational()?.neg(),
            Expr::Add(a, b) => a.to_rational()?.add(&b.to_rational()?),
            Expr::Sub(a, b) => a.to_rational()?.sub(&b.to_rational()?),
            Expr::Mul(a, b) => a.to_rational()?.mul(&b.to_rational()?),
            Expr::Div(a, b) => a.to_rational()?.div(&b.to_rational()?)?,
            Expr::Pow(a, b) => {
                let k = b
                    .integer_constant()
                    .ok_or_else(|| ExprError::NotRational("non-integer exponent".into()))?;
                a.to_rational()?.powi(k)?
            }
            Expr::Call(..) => {
                return Err(ExprError::NotRational(
                    "transcendental function of the variable".into(),
                ))
            }
        })
    }
}

/// Parses a rational map in the variable `z`.
pub fn parse_rational(src: &str) -> Result<RationalMap, ExprError> {
    Expr::parse(src, "z")?.to_rational()
}
