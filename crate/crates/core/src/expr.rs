//! Small arithmetic expression language for custom component fields.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numeric literals, the constant
//! `pi`, chart coordinates `x1..xn`, and the functions
//! `sin cos tan exp ln sqrt tanh`. `^` binds tightest and is right-associative.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::hyperdual::HyperDual;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, x: HyperDual) -> HyperDual {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src` with coordinates `x1..x{dim}` in scope.
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            dim,
        };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[HyperDual]) -> HyperDual {
        match self {
            Expr::Num(v) => HyperDual::constant(*v),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => match **b {
                Expr::Num(k) => a.eval(x).powf(k),
                _ => a.eval(x).pow(b.eval(x)),
            },
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let hd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
        self.eval(&hd).re
    }

    /// Wraps the expression as a field on a `dim`-dimensional chart.
    pub fn into_field(self) -> ScalarField {
        let e = Arc::new(self);
        ScalarField::new(move |x| e.eval(x))
    }
}

/// Parses and wraps in one step.
pub fn parse_field(src: &str, dim: usize) -> Result<ScalarField> {
    Ok(Expr::parse(src, dim)?.into_field())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // unary minus binds looser than `^`, so `-x^2 = -(x^2)`
    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.error(format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Parse {
                offset: start,
                message: format!("invalid number '{text}'"),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(f) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(format!("expected '(' after {name}")));
            }
            let arg = self.sum()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if idx >= 1 && idx <= self.dim {
                return Ok(Expr::Var(idx - 1));
            }
            return Err(Error::Parse {
                offset: start,
                message: format!("coordinate {name} out of range for dimension {}", self.dim),
            });
        }
        Err(Error::Parse {
            offset: start,
            message: format!("unknown identifier '{name}'"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ChartPoint;
    use crate::jet::{jet, jet_fd};

    fn v(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src, x.len().max(2)).unwrap().value(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(v("1 + 2 * 3", &[0.0, 0.0]), 7.0);
        assert_eq!(v("(1 + 2) * 3", &[0.0, 0.0]), 9.0);
        assert_eq!(v("2 ^ 3 ^ 2", &[0.0, 0.0]), 512.0);
        assert_eq!(v("-2 ^ 2", &[0.0, 0.0]), -4.0);
        assert_eq!(v("2 ^ -1", &[0.0, 0.0]), 0.5);
        assert_eq!(v("8 / 4 / 2", &[0.0, 0.0]), 1.0);
        assert_eq!(v("1 - 2 - 3", &[0.0, 0.0]), -4.0);
        assert_eq!(v("1.5e2 + .5", &[0.0, 0.0]), 150.5);
    }

    #[test]
    fn variables_and_functions() {
        let x = [0.3, -0.7];
        assert!((v("sin(x1) * cos(x2)", &x) - 0.3f64.sin() * (-0.7f64).cos()).abs() < 1e-15);
        assert!((v("exp(ln(2))", &x) - 2.0).abs() < 1e-15);
        assert!((v("sqrt(x1^2 + x2^2)", &x) - 0.58f64.sqrt()).abs() < 1e-15);
        assert!((v("tanh(x2) + tan(x1)", &x) - ((-0.7f64).tanh() + 0.3f64.tan())).abs() < 1e-15);
        assert!((v("pi", &x) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "", "1 +", "(1", "x3", "x0", "foo(1)", "sin 1", "1 $ 2", "2 3",
        ] {
            assert!(
                matches!(Expr::parse(bad, 2), Err(Error::Parse { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn jets_agree_with_finite_differences() {
        let f = parse_field("sin(x1*x2) + x3^2/(1 + x4^2) - exp(x1)*x2", 4).unwrap();
        let p = ChartPoint::new(vec![0.2, -0.4, 0.1, 0.3]).unwrap();
        let a = jet(&f, &p).unwrap();
        let b = jet_fd(&f, &p, 1e-5).unwrap();
        let (dv, dg, dh) = a.max_relative_diff(&b);
        assert!(dv < 1e-14 && dg < 1e-8 && dh < 1e-5, "{dv} {dg} {dh}");
    }
}
