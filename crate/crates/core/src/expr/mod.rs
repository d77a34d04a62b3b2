//! A small expression language for metric coefficient functions.
//!
//! Expressions range over the coordinates `x1`, `x2`, `x3`, numeric literals,
//! named constants, `+ - * /`, integer powers `^n`, and the functions
//! `exp ln sin cos sqrt abs`. Named constants are late bound: one parsed
//! template can be evaluated under many parameter bindings.
//!
//! Coefficients that have no closed form (antiderivatives and their inverses)
//! enter the tree as [`Expr::Apply`] nodes wrapping a [`UnivariateFn`].

mod parser;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jets::{Jet2, JetError};

pub use parser::{parse, parse_bound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unbound constant `{0}`")]
    UnboundConstant(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{name} failed at {arg}: {message}")]
    Function { name: String, arg: f64, message: String },
}

/// Named constant values. `pi` is always available.
pub type Bindings = BTreeMap<String, f64>;

/// A set of coordinate variables, stored as a 3-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    pub const ALL: VarSet = VarSet(0b111);

    pub fn single(var: usize) -> Self {
        assert!(var < 3);
        VarSet(1 << var)
    }

    pub fn of(vars: &[usize]) -> Self {
        vars.iter().fold(Self::EMPTY, |s, &v| s.union(Self::single(v)))
    }

    pub fn contains(self, var: usize) -> bool {
        var < 3 && self.0 & (1 << var) != 0
    }

    pub fn union(self, other: Self) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn vars(self) -> impl Iterator<Item = usize> {
        (0..3).filter(move |&v| self.contains(v))
    }

    /// Variable names, e.g. `["x1", "x3"]`.
    pub fn names(self) -> Vec<String> {
        self.vars().map(|v| format!("x{}", v + 1)).collect()
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, ExprError> {
        names.iter().try_fold(Self::EMPTY, |acc, n| {
            let v = parser::variable_index(n.as_ref())
                .ok_or_else(|| ExprError::UnknownIdentifier(n.as_ref().to_string()))?;
            Ok(acc.union(Self::single(v)))
        })
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(","))
    }
}

/// Built-in elementary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, a: &Jet2) -> Result<Jet2, JetError> {
        match self {
            Func::Exp => Ok(a.exp()),
            Func::Ln => a.ln(),
            Func::Sin => Ok(a.sin()),
            Func::Cos => Ok(a.cos()),
            Func::Sqrt => a.sqrt(),
            Func::Abs => a.abs(),
        }
    }
}

/// A smooth real function of one real argument with known first and second
/// derivatives.
pub trait UnivariateFn: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// `[h(t), h'(t), h''(t)]`.
    fn eval(&self, t: f64) -> Result<[f64; 3], ExprError>;
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    /// Coordinate variable, 0-based.
    Var(usize),
    Const(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    Apply(Arc<dyn UnivariateFn>, Box<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Num(a), Num(b)) => a == b,
            (Var(a), Var(b)) => a == b,
            (Const(a), Const(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d)) | (Sub(a, b), Sub(c, d)) | (Mul(a, b), Mul(c, d)) | (Div(a, b), Div(c, d)) => {
                a == c && b == d
            }
            (Pow(a, n), Pow(b, m)) => n == m && a == b,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            (Apply(f, a), Apply(g, b)) => Arc::ptr_eq(f, g) && a == b,
            _ => false,
        }
    }
}

// Constructors used by the family builders.
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn apply(f: Arc<dyn UnivariateFn>, a: Expr) -> Expr {
        Expr::Apply(f, Box::new(a))
    }
}

impl Expr {
    /// The set of coordinate variables appearing in the tree.
    pub fn dependency_mask(&self) -> VarSet {
        use Expr::*;
        match self {
            Num(_) | Const(_) => VarSet::EMPTY,
            Var(i) => VarSet::single(*i),
            Neg(a) | Pow(a, _) | Call(_, a) | Apply(_, a) => a.dependency_mask(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.dependency_mask().union(b.dependency_mask()),
        }
    }

    /// Names of all constants referenced, sorted and deduplicated.
    pub fn constants(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Const(n) = e {
                out.push(n.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        use Expr::*;
        f(self);
        match self {
            Num(_) | Var(_) | Const(_) => {}
            Neg(a) | Pow(a, _) | Call(_, a) | Apply(_, a) => a.visit(f),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replace every bound constant by its value. Unbound names are an error.
    pub fn bind(&self, bindings: &Bindings) -> Result<Expr, ExprError> {
        use Expr::*;
        let b = |e: &Expr| e.bind(bindings).map(Box::new);
        Ok(match self {
            Num(v) => Num(*v),
            Var(i) => Var(*i),
            Const(name) => Num(lookup(name, bindings)?),
            Neg(a) => Neg(b(a)?),
            Add(x, y) => Add(b(x)?, b(y)?),
            Sub(x, y) => Sub(b(x)?, b(y)?),
            Mul(x, y) => Mul(b(x)?, b(y)?),
            Div(x, y) => Div(b(x)?, b(y)?),
            Pow(a, n) => Pow(b(a)?, *n),
            Call(f, a) => Call(*f, b(a)?),
            Apply(f, a) => Apply(f.clone(), b(a)?),
        })
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet(&self, point: [f64; 3], bindings: &Bindings) -> Result<Jet2, ExprError> {
        use Expr::*;
        Ok(match self {
            Num(v) => Jet2::constant(*v),
            Var(i) => Jet2::seed(point, *i),
            Const(name) => Jet2::constant(lookup(name, bindings)?),
            Neg(a) => -a.eval_jet(point, bindings)?,
            Add(a, b) => a.eval_jet(point, bindings)? + b.eval_jet(point, bindings)?,
            Sub(a, b) => a.eval_jet(point, bindings)? - b.eval_jet(point, bindings)?,
            Mul(a, b) => a.eval_jet(point, bindings)? * b.eval_jet(point, bindings)?,
            Div(a, b) => a.eval_jet(point, bindings)?.try_div(&b.eval_jet(point, bindings)?)?,
            Pow(a, n) => a.eval_jet(point, bindings)?.powi(*n)?,
            Call(f, a) => f.apply(&a.eval_jet(point, bindings)?)?,
            Apply(f, a) => {
                let inner = a.eval_jet(point, bindings)?;
                let [h0, h1, h2] = f.eval(inner.value)?;
                inner.chain(h0, h1, h2)
            }
        })
    }

    /// Plain value, without derivative bookkeeping.
    pub fn eval(&self, point: [f64; 3], bindings: &Bindings) -> Result<f64, ExprError> {
        use Expr::*;
        let ev = |e: &Expr| e.eval(point, bindings);
        Ok(match self {
            Num(v) => *v,
            Var(i) => point[*i],
            Const(name) => lookup(name, bindings)?,
            Neg(a) => -ev(a)?,
            Add(a, b) => ev(a)? + ev(b)?,
            Sub(a, b) => ev(a)? - ev(b)?,
            Mul(a, b) => ev(a)? * ev(b)?,
            Div(a, b) => {
                let d = ev(b)?;
                if !(d.abs() >= crate::jets::DIV_EPS) {
                    return Err(JetError::DivisionByZero(d).into());
                }
                ev(a)? / d
            }
            Pow(a, n) => {
                let v = ev(a)?;
                if *n < 0 && !(v.abs() >= crate::jets::DIV_EPS) {
                    return Err(JetError::DivisionByZero(v).into());
                }
                v.powi(*n)
            }
            Call(f, a) => f.apply(&Jet2::constant(ev(a)?))?.value,
            Apply(f, a) => f.eval(ev(a)?)?[0],
        })
    }
}

fn lookup(name: &str, bindings: &Bindings) -> Result<f64, ExprError> {
    match bindings.get(name) {
        Some(v) => Ok(*v),
        None if name == "pi" => Ok(std::f64::consts::PI),
        None => Err(ExprError::UnboundConstant(name.to_string())),
    }
}

/// Fully parenthesized rendering; output of [`parse`] reparses to the same
/// tree. `Apply` nodes print as `name(arg)` and do not reparse.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(0 - {:?})", -v),
            Num(v) => write!(f, "{v:?}"),
            Var(i) => write!(f, "x{}", i + 1),
            Const(n) => write!(f, "{n}"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, n) => write!(f, "({a}^{n})"),
            Call(func, a) => write!(f, "{}({a})", func.name()),
            Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_bindings() -> Bindings {
        Bindings::new()
    }

    #[test]
    fn reciprocal_linear_form() {
        let e = parse("1/(x1 + x2 + 3)").unwrap();
        let j = e.eval_jet([1.0, 1.0, 0.0], &no_bindings()).unwrap();
        assert!((j.value - 0.2).abs() < 1e-15);
        assert!((j.grad[0] + 0.04).abs() < 1e-15);
        assert!((j.grad[1] + 0.04).abs() < 1e-15);
        assert_eq!(j.grad[2], 0.0);
        // FD cross-check
        let h = 1e-5;
        let f = |t: f64| 1.0 / (t + 1.0 + 3.0);
        assert!(((f(1.0 + h) - f(1.0 - h)) / (2.0 * h) - j.grad[0]).abs() < 1e-9);
    }

    #[test]
    fn constant_expression() {
        let j = parse("2").unwrap().eval_jet([0.3, 0.1, 9.0], &no_bindings()).unwrap();
        assert_eq!(j, Jet2::constant(2.0));
    }

    #[test]
    fn log_of_zero_is_a_domain_error() {
        let r = parse("ln(x1)").unwrap().eval_jet([0.0, 1.0, 1.0], &no_bindings());
        assert!(matches!(r, Err(ExprError::Jet(JetError::Domain { .. }))));
    }

    #[test]
    fn unbound_constant() {
        let r = parse("k*x1").unwrap().eval_jet([1.0; 3], &no_bindings());
        assert_eq!(r, Err(ExprError::UnboundConstant("k".into())));
    }

    #[test]
    fn absent_variables_have_exactly_zero_rows() {
        let e = parse("exp(x1*x3) / (2 + sin(x3))").unwrap();
        assert_eq!(e.dependency_mask(), VarSet::of(&[0, 2]));
        let j = e.eval_jet([0.3, 0.7, -0.2], &no_bindings()).unwrap();
        assert_eq!(j.grad[1], 0.0);
        for k in 0..3 {
            assert_eq!(j.hess[1][k], 0.0);
            assert_eq!(j.hess[k][1], 0.0);
        }
    }

    #[test]
    fn bind_substitutes_and_pi_is_builtin() {
        let e = parse("k*cos(pi*x1)").unwrap();
        assert_eq!(e.constants(), vec!["k".to_string(), "pi".to_string()]);
        let mut b = Bindings::new();
        b.insert("k".into(), 2.0);
        let bound = e.bind(&b).unwrap();
        assert!(bound.constants().is_empty());
        assert!((bound.eval([1.0, 0.0, 0.0], &no_bindings()).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn plain_eval_matches_jet_value() {
        let e = parse("sqrt(x1^2 + 1) * abs(x2 - 3)^-2 + ln(x3)").unwrap();
        let p = [0.4, 1.1, 2.5];
        let a = e.eval(p, &no_bindings()).unwrap();
        let b = e.eval_jet(p, &no_bindings()).unwrap().value;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn varset_names() {
        let s = VarSet::from_names(&["x3", "x1"]).unwrap();
        assert_eq!(s.names(), vec!["x1", "x3"]);
        assert!(VarSet::from_names(&["x4"]).is_err());
        assert!(VarSet::single(0).is_subset(s));
        assert!(!VarSet::single(1).is_subset(s));
    }
}
