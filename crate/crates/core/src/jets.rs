//! Second-order forward-mode differentiation in three variables.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar function at
//! a point. Arithmetic on jets applies the exact first and second order
//! chain, product and quotient rules, so any expression built from seeded
//! variables yields its derivatives up to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Divisors with magnitude below this are treated as zero.
pub const DIV_EPS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("division by zero (divisor value {0:e})")]
    DivisionByZero(f64),
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
}

/// Value, gradient and symmetric Hessian of a scalar function of
/// `(x1, x2, x3)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }

    /// The identity map in variable `var` (0-based), evaluated at `point`.
    ///
    /// # Panics
    /// If `var > 2`.
    pub fn seed(point: [f64; 3], var: usize) -> Self {
        assert!(var < 3, "variable index {var} out of range");
        let mut grad = [0.0; 3];
        grad[var] = 1.0;
        Self {
            value: point[var],
            grad,
            hess: [[0.0; 3]; 3],
        }
    }

    /// Compose with a scalar function `h` given `h(v)`, `h'(v)`, `h''(v)` at
    /// `v = self.value`.
    pub fn chain(&self, h0: f64, h1: f64, h2: f64) -> Self {
        let mut out = Self::constant(h0);
        for i in 0..3 {
            out.grad[i] = h1 * self.grad[i];
        }
        for i in 0..3 {
            for j in i..3 {
                let v = h1 * self.hess[i][j] + h2 * self.grad[i] * self.grad[j];
                out.hess[i][j] = v;
                out.hess[j][i] = v;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.value *= s;
        out.grad.iter_mut().for_each(|g| *g *= s);
        out.hess.iter_mut().flatten().for_each(|h| *h *= s);
        out
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let v = self.value;
        if !(v.abs() >= DIV_EPS) {
            return Err(JetError::DivisionByZero(v));
        }
        let inv = 1.0 / v;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(*self * rhs.recip()?)
    }

    /// Integer power by repeated squaring. Negative exponents go through
    /// [`Jet2::recip`].
    pub fn powi(&self, n: i32) -> Result<Self, JetError> {
        let base = if n < 0 { self.recip()? } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::constant(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq;
            }
            e >>= 1;
            if e > 0 {
                sq = sq * sq;
            }
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let v = self.value;
        if !(v > 0.0) {
            return Err(JetError::Domain { func: "ln", value: v });
        }
        Ok(self.chain(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let v = self.value;
        if !(v > 0.0) {
            return Err(JetError::Domain { func: "sqrt", value: v });
        }
        let r = v.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * v)))
    }

    /// `|a|` as `sign(a) * a`; rejected at zero where it is not differentiable.
    pub fn abs(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v == 0.0 || v.is_nan() {
            return Err(JetError::Domain { func: "abs", value: v });
        }
        Ok(self.scale(v.signum()))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let mut out = self;
        out.value += rhs.value;
        for i in 0..3 {
            out.grad[i] += rhs.grad[i];
            for j in 0..3 {
                out.hess[i][j] += rhs.hess[i][j];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let (a, b) = (&self, &rhs);
        let mut out = Jet2::constant(a.value * b.value);
        for i in 0..3 {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
        }
        for i in 0..3 {
            for j in i..3 {
                let v = a.hess[i][j] * b.value + a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i] + a.value * b.hess[i][j];
                out.hess[i][j] = v;
                out.hess[j][i] = v;
            }
        }
        out
    }
}
