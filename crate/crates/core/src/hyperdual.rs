//! Hyper-dual numbers `a + b·ε₁ + c·ε₂ + d·ε₁ε₂` with `ε₁² = ε₂² = 0`.
//!
//! Evaluating `f(p + ε₁·u + ε₂·v)` yields `f(p)`, the directional derivatives
//! `∇f·u`, `∇f·v` and the mixed second derivative `uᵀ H v`, all free of
//! truncation error.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, PartialEq, Default)]
pub struct HyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl fmt::Debug for HyperDual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {}ε₁ + {}ε₂ + {}ε₁ε₂",
            self.re, self.e1, self.e2, self.e12
        )
    }
}

impl HyperDual {
    pub const ZERO: HyperDual = HyperDual::constant(0.0);
    pub const ONE: HyperDual = HyperDual::constant(1.0);

    pub const fn new(re: f64, e1: f64, e2: f64, e12: f64) -> Self {
        Self { re, e1, e2, e12 }
    }

    pub const fn constant(re: f64) -> Self {
        Self::new(re, 0.0, 0.0, 0.0)
    }

    /// Applies a scalar function given its value and first two derivatives at `self.re`.
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            re: f0,
            e1: f1 * self.e1,
            e2: f1 * self.e2,
            e12: f1 * self.e12 + f2 * self.e1 * self.e2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.e1.is_finite() && self.e2.is_finite() && self.e12.is_finite()
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.re;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.re))
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.re;
        self.chain(self.re.ln(), r, -r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.re.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn tanh(self) -> Self {
        let t = self.re.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::ONE,
            1 => self,
            _ => {
                let nf = n as f64;
                let p2 = self.re.powi(n - 2);
                let p1 = p2 * self.re;
                self.chain(p1 * self.re, nf * p1, nf * (nf - 1.0) * p2)
            }
        }
    }

    pub fn powf(self, a: f64) -> Self {
        if a == a.trunc() && a.abs() < i32::MAX as f64 {
            return self.powi(a as i32);
        }
        let p2 = self.re.powf(a - 2.0);
        let p1 = p2 * self.re;
        self.chain(p1 * self.re, a * p1, a * (a - 1.0) * p2)
    }

    pub fn pow(self, e: HyperDual) -> Self {
        if e.e1 == 0.0 && e.e2 == 0.0 && e.e12 == 0.0 {
            return self.powf(e.re);
        }
        (e * self.ln()).exp()
    }
}

impl From<f64> for HyperDual {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.re + o.re,
            self.e1 + o.e1,
            self.e2 + o.e2,
            self.e12 + o.e12,
        )
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.re - o.re,
            self.e1 - o.e1,
            self.e2 - o.e2,
            self.e12 - o.e12,
        )
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re,
            self.re * o.e1 + self.e1 * o.re,
            self.re * o.e2 + self.e2 * o.re,
            self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Self {
            re: self.re + o,
            ..self
        }
    }
}

impl Sub<f64> for HyperDual {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Self {
            re: self.re - o,
            ..self
        }
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Self::new(self.re * o, self.e1 * o, self.e2 * o, self.e12 * o)
    }
}

impl Div<f64> for HyperDual {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl Add<HyperDual> for f64 {
    type Output = HyperDual;
    fn add(self, o: HyperDual) -> HyperDual {
        o + self
    }
}

impl Sub<HyperDual> for f64 {
    type Output = HyperDual;
    fn sub(self, o: HyperDual) -> HyperDual {
        -o + self
    }
}

impl Mul<HyperDual> for f64 {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        o * self
    }
}

impl Div<HyperDual> for f64 {
    type Output = HyperDual;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: HyperDual) -> HyperDual {
        o.recip() * self
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for HyperDual {
            fn $m(&mut self, o: Self) { *self = *self $op o; }
        }
        impl $tr<f64> for HyperDual {
            fn $m(&mut self, o: f64) { *self = *self $op o; }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl std::iter::Sum for HyperDual {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
