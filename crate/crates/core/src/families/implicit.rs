//! Coefficient functions that have no closed form: the antiderivative `F` of
//! `1/f1`, and the inverse of the log-sqrt antiderivative in its monotone and
//! glued forms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{Bindings, Expr, ExprError, UnivariateFn};
use crate::numerics::{Antiderivative, GluedSolution, LogSqrt, NumericsError};

fn numeric(name: &str, arg: f64) -> impl FnOnce(NumericsError) -> ExprError + '_ {
    move |e| ExprError::Function {
        name: name.to_string(),
        arg,
        message: e.to_string(),
    }
}

/// `F` with `F' = 1/f1`, where `f1` is an expression in `x1` alone.
#[derive(Debug)]
pub struct Primitive {
    name: String,
    f1: Expr,
    anti: Antiderivative,
}

impl Primitive {
    /// Anchored at the midpoint of the bounded interval `(lo, hi)`.
    pub fn new(name: &str, f1: Expr, lo: f64, hi: f64) -> Result<Self, NumericsError> {
        let g = f1.clone();
        let integrand = Arc::new(move |t: f64| match g.eval([t, 0.0, 0.0], &Bindings::new()) {
            Ok(v) => 1.0 / v,
            Err(_) => f64::NAN,
        });
        let anti = Antiderivative::new(integrand, 0.5 * (lo + hi), (lo, hi), None)?;
        Ok(Self {
            name: name.to_string(),
            f1,
            anti,
        })
    }

    pub fn antiderivative(&self) -> &Antiderivative {
        &self.anti
    }
}

impl UnivariateFn for Primitive {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, t: f64) -> Result<[f64; 3], ExprError> {
        let j = self.f1.eval_jet([t, 0.0, 0.0], &Bindings::new())?;
        let v = self.anti.value(t).map_err(numeric(&self.name, t))?;
        let f = j.value;
        Ok([v, 1.0 / f, -j.grad[0] / (f * f)])
    }
}

/// One log-sqrt coefficient: `f = 1/g` where `g` solves `g g'' = −k` and
/// `(g')² = 2k ln(z0/g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Factor {
    /// `g(x) = G(ε|x − x0|)`, symmetric about the critical point `x0`.
    Glued { z0: f64, x0: f64 },
    /// `g(x) = G(η x + d)` with `η = ±1`.
    Monotone { z0: f64, eta: f64, d: f64 },
}

impl Factor {
    pub fn z0(&self) -> f64 {
        match *self {
            Factor::Glued { z0, .. } | Factor::Monotone { z0, .. } => z0,
        }
    }
}

/// `x ↦ [g, g', g'']` for a glued factor.
#[derive(Debug)]
pub struct GluedFn {
    name: String,
    sol: GluedSolution,
}

impl GluedFn {
    pub fn new(name: &str, sol: GluedSolution) -> Self {
        Self {
            name: name.to_string(),
            sol,
        }
    }
}

impl UnivariateFn for GluedFn {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: f64) -> Result<[f64; 3], ExprError> {
        self.sol.eval(x).map_err(numeric(&self.name, x))
    }
}

/// `y ↦ [G, G', G'']` with `G` the inverse of the log-sqrt antiderivative.
#[derive(Debug)]
pub struct InverseFn {
    name: String,
    ls: LogSqrt,
}

impl InverseFn {
    pub fn new(name: &str, ls: LogSqrt) -> Self {
        Self {
            name: name.to_string(),
            ls,
        }
    }
}

impl UnivariateFn for InverseFn {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, y: f64) -> Result<[f64; 3], ExprError> {
        self.ls.inverse_jet(y).map_err(numeric(&self.name, y))
    }
}
