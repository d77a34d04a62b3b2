//! Constructors for the flat diagonal metrics, parameter validation against a
//! box, existence predicates for proper warped products, and random valid
//! parameter samplers.
//!
//! A [`FamilySpec`] is `{"kind", "params", "box"}`. Kinds and their parameters
//! are listed in [`catalog::CATALOG`]. Conventions:
//!
//! - Metrics are `g = Σ (dx^i)^2 / f_i^2`; classical warping functions are
//!   the reciprocals `1/f_i`.
//! - `F` (with `F' = 1/f1`) is anchored at the midpoint of `I1`, so the
//!   constants `c_j` in `k_j/(F − c_j)` are relative to that anchor.
//! - Log-sqrt factors are anchored at `z0`: `F(z0) = 0`. A glued factor
//!   is symmetric about its critical point `x0`; a monotone factor is
//!   `1/G(η x + d)` with `η x + d` inside `F(D)`.

pub mod catalog;
mod exists;
pub mod implicit;
mod sample;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::expr::{self, Bindings, Expr, VarSet};
use crate::metric::{BoxDomain, DiagonalMetric, MetricError, MetricFile, ZERO_COEFFICIENT};
use crate::numerics::{GluedSolution, LogSqrt, NumericsError};

pub use catalog::{Kind, KindInfo, CATALOG};
pub use exists::{proper_family_exists, Existence, Shape, SHAPES};
pub use implicit::Factor;
pub use sample::{sample_box, sample_spec};

pub type Params = Map<String, Value>;

/// A family kind, its parameters, and the box it lives on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: Kind,
    #[serde(default)]
    pub params: Params,
    #[serde(rename = "box")]
    pub domain: BoxDomain,
}

/// A constraint of the family that fails on the given box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub constraint: String,
    pub message: String,
    /// Interval where the constraint is seen to fail (an axis, or the range
    /// of a quantity that must avoid a value).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<[f64; 2]>,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("unknown family kind or shape `{0}`")]
    UnknownKind(String),
    #[error("{kind}: unknown parameter `{name}`")]
    UnknownParam { kind: &'static str, name: String },
    #[error("{kind}: missing parameter `{name}`")]
    MissingParam { kind: &'static str, name: String },
    #[error("parameter `{name}`: {message}")]
    BadParam { name: String, message: String },
    #[error("constraint violated: {}", join(.0))]
    ConstraintViolation(Vec<ValidationIssue>),
    #[error("NonFiniteLimit: {param} has z0 = {z0}; the limit of F at z0 is not finite")]
    NonFiniteLimit { param: String, z0: f64 },
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: NumericsError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("malformed family spec: {0}")]
    Malformed(String),
}

fn join(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

impl FamilySpec {
    pub fn new(kind: Kind, params: Params, domain: BoxDomain) -> Self {
        Self { kind, params, domain }
    }

    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        let v: Value = serde_json::from_str(text).map_err(|e| FamilyError::Malformed(e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self, FamilyError> {
        if let Some(kind) = v.get("kind").and_then(Value::as_str) {
            if kind.parse::<Kind>().is_err() {
                return Err(FamilyError::UnknownKind(kind.to_string()));
            }
        }
        serde_json::from_value(v).map_err(|e| FamilyError::Malformed(e.to_string()))
    }

    /// The catalogue example for `kind`.
    pub fn example(kind: Kind) -> Self {
        let info = kind.info();
        let params = serde_json::from_str(info.example).expect("catalogue example parses");
        let domain = BoxDomain::parse_cli(info.example_box).expect("catalogue box parses");
        Self::new(kind, params, domain)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}

/// Coefficients as they come out of assembly; `None` where a constraint
/// prevents construction.
struct Assembly {
    coeffs: [Option<Expr>; 3],
    deps: [VarSet; 3],
    issues: Vec<ValidationIssue>,
}

struct Ctx<'a> {
    spec: &'a FamilySpec,
    issues: Vec<ValidationIssue>,
}

fn axis_name(axis: usize) -> String {
    format!("I{}", axis + 1)
}

fn interval(a: f64, b: f64) -> String {
    format!("({a}, {b})")
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a FamilySpec) -> Result<Self, FamilyError> {
        let info = spec.kind.info();
        for key in spec.params.keys() {
            if !info.params.iter().any(|(n, _)| n == key) {
                return Err(FamilyError::UnknownParam {
                    kind: info.id,
                    name: key.clone(),
                });
            }
        }
        Ok(Self {
            spec,
            issues: Vec::new(),
        })
    }

    fn axis(&self, i: usize) -> (f64, f64) {
        self.spec.domain.axis(i)
    }

    fn issue(&mut self, constraint: impl Into<String>, message: impl Into<String>, witness: Option<[f64; 2]>) {
        self.issues.push(ValidationIssue {
            constraint: constraint.into(),
            message: message.into(),
            witness,
        });
    }

    fn raw(&self, name: &str) -> Option<&Value> {
        self.spec.params.get(name)
    }

    fn missing(&self, name: &str) -> FamilyError {
        FamilyError::MissingParam {
            kind: self.spec.kind.id(),
            name: name.to_string(),
        }
    }

    /// Numbers may also be written as strings such as `"inf"`.
    fn parse_num(name: &str, v: &Value) -> Result<f64, FamilyError> {
        let bad = |m: &str| FamilyError::BadParam {
            name: name.to_string(),
            message: m.to_string(),
        };
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| bad("not representable as f64")),
            Value::String(s) => s.trim().parse::<f64>().map_err(|_| bad("expected a number")),
            _ => Err(bad("expected a number")),
        }
    }

    fn num(&self, name: &str) -> Result<f64, FamilyError> {
        let v = self.raw(name).ok_or_else(|| self.missing(name))?;
        let x = Self::parse_num(name, v)?;
        if x.is_nan() {
            return Err(FamilyError::BadParam {
                name: name.to_string(),
                message: "NaN".into(),
            });
        }
        Ok(x)
    }

    fn finite(&self, name: &str) -> Result<f64, FamilyError> {
        let x = self.num(name)?;
        if !x.is_finite() {
            return Err(FamilyError::BadParam {
                name: name.to_string(),
                message: format!("{x} is not finite"),
            });
        }
        Ok(x)
    }

    fn finite_or(&self, name: &str, default: f64) -> Result<f64, FamilyError> {
        match self.raw(name) {
            Some(_) => self.finite(name),
            None => Ok(default),
        }
    }

    fn nonzero(&mut self, name: &str) -> Result<f64, FamilyError> {
        let x = self.finite(name)?;
        if x == 0.0 {
            self.issue(format!("{name}_nonzero"), format!("{name} must be nonzero"), None);
        }
        Ok(x)
    }

    fn nonzero_or(&mut self, name: &str, default: f64) -> Result<f64, FamilyError> {
        match self.raw(name) {
            Some(_) => self.nonzero(name),
            None => Ok(default),
        }
    }

    fn which(&self) -> Result<usize, FamilyError> {
        let w = self.finite_or("which", 3.0)?;
        if w == 2.0 || w == 3.0 {
            Ok(w as usize)
        } else {
            Err(FamilyError::BadParam {
                name: "which".into(),
                message: format!("must be 2 or 3, got {w}"),
            })
        }
    }

    /// A user expression in the single variable `x_{axis+1}`, checked for
    /// zeros on a fine sample of the axis.
    fn free_expr(&mut self, name: &str, axis: usize, default: Option<&str>) -> Result<Expr, FamilyError> {
        let src = match (self.raw(name), default) {
            (Some(Value::String(s)), _) => s.clone(),
            (Some(_), _) => {
                return Err(FamilyError::BadParam {
                    name: name.into(),
                    message: "expected an expression string".into(),
                })
            }
            (None, Some(d)) => d.to_string(),
            (None, None) => return Err(self.missing(name)),
        };
        let bad = |message: String| FamilyError::BadParam {
            name: name.into(),
            message,
        };
        let e = expr::parse(&src).map_err(|e| bad(e.to_string()))?;
        let e = e.bind(&Bindings::new()).map_err(|e| bad(e.to_string()))?;
        let deps = e.dependency_mask();
        if !deps.is_subset(VarSet::single(axis)) {
            return Err(bad(format!("may depend on x{} only, found {deps}", axis + 1)));
        }
        if let Some(at) = sampled_zero(&e, self.axis(axis), axis) {
            self.issue(
                format!("{name}_nonvanishing"),
                format!("{name} = {src} vanishes or is undefined near x{} = {at}", axis + 1),
                Some([at, at]),
            );
        }
        Ok(e)
    }

    fn factor(&self, name: &str) -> Result<Factor, FamilyError> {
        let v = self.raw(name).ok_or_else(|| self.missing(name))?;
        let obj = v.as_object().ok_or_else(|| FamilyError::BadParam {
            name: name.into(),
            message: "expected an object".into(),
        })?;
        let get = |k: &str| -> Result<Option<f64>, FamilyError> {
            obj.get(k)
                .map(|v| Self::parse_num(&format!("{name}.{k}"), v))
                .transpose()
        };
        for k in obj.keys() {
            if !["z0", "x0", "eta", "d"].contains(&k.as_str()) {
                return Err(FamilyError::BadParam {
                    name: name.into(),
                    message: format!("unknown field `{k}`"),
                });
            }
        }
        let z0 = get("z0")?.ok_or_else(|| self.missing(&format!("{name}.z0")))?;
        match (get("x0")?, get("eta")?, get("d")?) {
            (Some(x0), None, None) => Ok(Factor::Glued { z0, x0 }),
            (None, Some(eta), Some(d)) => Ok(Factor::Monotone { z0, eta, d }),
            _ => Err(FamilyError::BadParam {
                name: name.into(),
                message: "give either x0 (glued) or eta and d (monotone)".into(),
            }),
        }
    }

    /// `c ∉ I_axis`; the interval is open so its endpoints are allowed.
    fn outside_axis(&mut self, cname: &str, c: f64, axis: usize) {
        let (lo, hi) = self.axis(axis);
        if lo < c && c < hi {
            self.issue(
                format!("{cname}_outside_{}", axis_name(axis)),
                format!("{cname} = {c} lies in {} = {}", axis_name(axis), interval(lo, hi)),
                Some([lo, hi]),
            );
        }
    }

    fn outside_range(&mut self, cname: &str, c: f64, range: (f64, f64), what: &str) {
        let (a, b) = range;
        if a < c && c < b {
            self.issue(
                format!("{cname}_outside_{what}"),
                format!("{cname} = {c} lies in {what} = {}", interval(a, b)),
                Some([a, b]),
            );
        }
    }

    /// `a1 x1 + a2 x2 + c` has no zero on `I1 x I2`. Exact: the range of an
    /// affine function on an open box is the open interval between its
    /// infimum and supremum.
    fn affine_nonvanishing(&mut self, id: &str, text: &str, a: [f64; 2], c: f64) {
        let (lo, hi) = affine_range(&self.spec.domain, a, c);
        if lo < 0.0 && 0.0 < hi || (lo == hi && lo == 0.0) {
            self.issue(
                id.to_string(),
                format!(
                    "{text} takes every value in {} on I1 x I2, including 0",
                    interval(lo, hi)
                ),
                Some([lo, hi]),
            );
        }
    }

    fn bounded_axis(&mut self, axis: usize, why: &str) -> bool {
        if self.spec.domain.axis_bounded(axis) {
            return true;
        }
        let (lo, hi) = self.axis(axis);
        self.issue(
            format!("{}_bounded", axis_name(axis)),
            format!("{} = {} must be bounded: {why}", axis_name(axis), interval(lo, hi)),
            Some([lo, hi]),
        );
        false
    }

    /// Coefficient `i` as `k_i/(x_axis − c_i)` when it varies, else `k_i`.
    fn const_or_recip(&mut self, i: usize, axis: usize, varies: bool, required: bool) -> Result<Expr, FamilyError> {
        let kname = format!("k{}", i + 1);
        if !varies {
            let k = if required {
                self.nonzero(&kname)?
            } else {
                self.nonzero_or(&kname, 1.0)?
            };
            return Ok(konst(k));
        }
        let k = self.nonzero(&kname)?;
        let cname = format!("c{}", i + 1);
        let c = self.finite(&cname)?;
        self.outside_axis(&cname, c, axis);
        Ok(recip_linear(k, axis, c))
    }

    /// `F` on `I1` with `F' = 1/f1`, plus its range; `None` if `I1` is
    /// unbounded or `f1` already failed.
    fn primitive(&mut self, f1: &Expr) -> Result<Option<(Arc<implicit::Primitive>, (f64, f64))>, FamilyError> {
        if self.issues.iter().any(|i| i.constraint == "f1_nonvanishing") {
            return Ok(None);
        }
        if !self.bounded_axis(0, "F is tabulated by quadrature over I1") {
            return Ok(None);
        }
        let (lo, hi) = self.axis(0);
        let numeric = |source| FamilyError::Numeric {
            context: "antiderivative of 1/f1".into(),
            source,
        };
        let p = implicit::Primitive::new("F", f1.clone(), lo, hi).map_err(numeric)?;
        let range = p.antiderivative().range().map_err(numeric)?;
        Ok(Some((Arc::new(p), range)))
    }

    /// One log-sqrt coefficient `1/g(x_axis)` with parameter `k`.
    fn log_sqrt(&mut self, name: &str, k: f64, axis: usize) -> Result<Option<Expr>, FamilyError> {
        let fac = self.factor(name)?;
        let z0 = fac.z0();
        if z0 == 0.0 || !z0.is_finite() {
            return Err(FamilyError::NonFiniteLimit {
                param: name.to_string(),
                z0,
            });
        }
        if k == 0.0 {
            return Ok(None);
        }
        let numeric = |source| FamilyError::Numeric {
            context: format!("log-sqrt factor {name}"),
            source,
        };
        let ls = LogSqrt::new(k, z0).map_err(numeric)?;
        let (lo, hi) = self.axis(axis);
        let fname = format!("g{}", &name[1..]);
        let var = Expr::var(axis);
        match fac {
            Factor::Glued { x0, .. } => {
                if !x0.is_finite() {
                    return Err(FamilyError::BadParam {
                        name: format!("{name}.x0"),
                        message: format!("{x0} is not finite"),
                    });
                }
                let sol = GluedSolution::new(k, z0, x0).map_err(numeric)?;
                let w = sol.half_width().map_err(numeric)?;
                if !(lo < x0 && x0 < hi) {
                    self.issue(
                        format!("{name}_x0_in_{}", axis_name(axis)),
                        format!(
                            "{name}.x0 = {x0} must lie in {} = {}",
                            axis_name(axis),
                            interval(lo, hi)
                        ),
                        Some([lo, hi]),
                    );
                    return Ok(None);
                }
                let reach = (x0 - lo).max(hi - x0);
                if reach > w {
                    self.issue(
                        format!("{name}_within_range"),
                        format!(
                            "{} = {} reaches {reach} from x0 = {x0}, beyond the half-width {w} of F(D)",
                            axis_name(axis),
                            interval(lo, hi)
                        ),
                        Some([x0 - w, x0 + w]),
                    );
                    return Ok(None);
                }
                let g = Expr::apply(Arc::new(implicit::GluedFn::new(&fname, sol)), var);
                Ok(Some(Expr::div(Expr::num(1.0), g)))
            }
            Factor::Monotone { eta, d, .. } => {
                if eta != 1.0 && eta != -1.0 {
                    return Err(FamilyError::BadParam {
                        name: format!("{name}.eta"),
                        message: format!("must be 1 or -1, got {eta}"),
                    });
                }
                if !d.is_finite() {
                    return Err(FamilyError::BadParam {
                        name: format!("{name}.d"),
                        message: format!("{d} is not finite"),
                    });
                }
                let (ra, rb) = ls.range().map_err(numeric)?;
                let (ya, yb) = if eta > 0.0 { (lo + d, hi + d) } else { (d - hi, d - lo) };
                if ya < ra || yb > rb {
                    self.issue(
                        format!("{name}_within_range"),
                        format!(
                            "eta x + d sweeps {} on {}, outside F(D) = {}",
                            interval(ya, yb),
                            axis_name(axis),
                            interval(ra, rb)
                        ),
                        Some([ya, yb]),
                    );
                    return Ok(None);
                }
                let arg = Expr::add(Expr::mul(Expr::num(eta), var), Expr::num(d));
                let g = Expr::apply(Arc::new(implicit::InverseFn::new(&fname, ls)), arg);
                Ok(Some(Expr::div(Expr::num(1.0), g)))
            }
        }
    }
}

/// Parse a closed-form template with numeric bindings.
fn closed(text: &str, vals: &[(&str, f64)]) -> Expr {
    let b: Bindings = vals.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    expr::parse_bound(text, &b)
        .and_then(|e| e.bind(&b))
        .unwrap_or_else(|e| panic!("template `{text}`: {e}"))
}

fn konst(k: f64) -> Expr {
    Expr::num(k)
}

/// `k/(x_axis − c)`.
fn recip_linear(k: f64, axis: usize, c: f64) -> Expr {
    Expr::div(Expr::num(k), Expr::sub(Expr::var(axis), Expr::num(c)))
}

/// `k/(F(x1) − c)`.
fn recip_primitive(k: f64, f: &Arc<implicit::Primitive>, c: f64) -> Expr {
    let fx = Expr::apply(f.clone(), Expr::var(0));
    Expr::div(Expr::num(k), Expr::sub(fx, Expr::num(c)))
}

/// A point of the axis near which `e` vanishes or fails, from a dense
/// sample; unbounded axes are sampled on a window of width 100.
fn sampled_zero(e: &Expr, (lo, hi): (f64, f64), axis: usize) -> Option<f64> {
    const N: usize = 1025;
    let (a, b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 100.0),
        (false, true) => (hi - 100.0, hi),
        (false, false) => (-50.0, 50.0),
    };
    let mut sign = 0.0;
    for i in 1..N {
        let t = a + (b - a) * i as f64 / N as f64;
        let mut p = [0.0; 3];
        p[axis] = t;
        match e.eval(p, &Bindings::new()) {
            Ok(v) if v.is_finite() && v.abs() > ZERO_COEFFICIENT => {
                if sign == 0.0 {
                    sign = v.signum();
                } else if v.signum() != sign {
                    return Some(t);
                }
            }
            _ => return Some(t),
        }
    }
    None
}

/// `a·b` with `0·∞ = 0`.
fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Infimum and supremum of `a1 x1 + a2 x2 + c` over `I1 x I2`.
pub fn affine_range(domain: &BoxDomain, a: [f64; 2], c: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (c, c);
    for (i, &ai) in a.iter().enumerate() {
        let (l, h) = domain.axis(i);
        let (p, q) = (mul0(ai, l), mul0(ai, h));
        lo += p.min(q);
        hi += p.max(q);
    }
    (lo, hi)
}

/// Minimum and maximum of `cos` over `[a, b]`.
fn cos_range(a: f64, b: f64) -> (f64, f64) {
    if !(a.is_finite() && b.is_finite()) || b - a >= 2.0 * std::f64::consts::PI {
        return (-1.0, 1.0);
    }
    let tau = 2.0 * std::f64::consts::PI;
    let hits = |phase: f64| ((a - phase) / tau).ceil() <= ((b - phase) / tau).floor();
    let (ca, cb) = (a.cos(), b.cos());
    let max = if hits(0.0) { 1.0 } else { ca.max(cb) };
    let min = if hits(std::f64::consts::PI) { -1.0 } else { ca.min(cb) };
    (min, max)
}

/// For kinds whose coefficients are each a constant or `k/(x_axis − c)`:
/// the axis of each reciprocal-linear coefficient, and the declared
/// dependencies.
pub(crate) fn recip_forms(kind: Kind) -> Option<([Option<usize>; 3], [VarSet; 3])> {
    use Kind::*;
    let x1 = VarSet::single(0);
    let x2 = VarSet::single(1);
    let x3 = VarSet::single(2);
    let bi = [VarSet::EMPTY, x1, x1];
    let seq = [VarSet::EMPTY, x1, VarSet::of(&[0, 1])];
    Some(match kind {
        T2_5_1 => ([None; 3], [x2, x3, x1]),
        T2_5_2 => ([None, None, Some(0)], [x2, x3, x1]),
        T2_5_3 => ([Some(1), None, None], [x2, x3, x1]),
        T2_5_4 => ([None, Some(2), None], [x2, x3, x1]),
        T2_8_1 => ([None; 3], [x3, x3, x1]),
        T2_8_2 => ([Some(2), None, None], [x3, x3, x1]),
        T2_8_3 => ([None, Some(2), None], [x3, x3, x1]),
        T2_8_4 => ([None, None, Some(0)], [x3, x3, x1]),
        T2_8_5 => ([Some(2), None, Some(0)], [x3, x3, x1]),
        T3_5_1 => ([None; 3], bi),
        T3_5_2 => ([None, None, Some(0)], bi),
        T3_5_3 => ([None, Some(0), None], bi),
        T3_7_1 => ([None; 3], seq),
        T3_7_2 => ([None, None, Some(0)], seq),
        T3_7_3 => ([None, None, Some(1)], seq),
        T3_7_5 => ([None, Some(0), None], seq),
        _ => return None,
    })
}

fn assemble(spec: &FamilySpec) -> Result<Assembly, FamilyError> {
    use Kind::*;
    let mut cx = Ctx::new(spec)?;
    let x1 = VarSet::single(0);
    let x2 = VarSet::single(1);
    let x3 = VarSet::single(2);
    let x12 = VarSet::of(&[0, 1]);
    let none = VarSet::EMPTY;
    let some = |e: Expr| Some(e);

    let (coeffs, deps): ([Option<Expr>; 3], [VarSet; 3]) = match spec.kind {
        T2_1_2 | T2_1_3 => {
            let f1 = cx.free_expr("f1", 0, None)?;
            let (kf, cname, kc, kname) = if spec.kind == T2_1_2 {
                ("k3", "c3", "k2", 3)
            } else {
                ("k2", "c2", "k3", 2)
            };
            let k = cx.nonzero(kf)?;
            let c = cx.finite(cname)?;
            let kconst = cx.nonzero_or(kc, 1.0)?;
            let f = match cx.primitive(&f1)? {
                Some((p, range)) => {
                    cx.outside_range(cname, c, range, "F(I1)");
                    Some(recip_primitive(k, &p, c))
                }
                None => None,
            };
            let mut out = [some(f1), some(konst(kconst)), some(konst(kconst))];
            out[kname - 1] = f;
            (out, [x1, x1, x1])
        }
        C2_2 | C2_3 => {
            let j = cx.which()?;
            let i = 5 - j;
            let kj = cx.nonzero_or(&format!("k{j}"), 1.0)?;
            let ki = cx.nonzero_or(&format!("k{i}"), 1.0)?;
            let cj_name = format!("c{j}");
            let cj = cx.finite(&cj_name)?;
            if cx.raw(&format!("c{i}")).is_some() {
                return Err(FamilyError::BadParam {
                    name: format!("c{i}"),
                    message: format!("only c{j} applies when which = {j}"),
                });
            }
            let mut out: [Option<Expr>; 3] = [None, None, None];
            if spec.kind == C2_2 {
                let c0 = cx.nonzero("c0")?;
                let c1 = cx.nonzero("c1")?;
                // exp(−c0 x1) is monotone, so its range over I1 comes from the ends
                let (lo, hi) = cx.axis(0);
                let (ea, eb) = ((-c0 * lo).exp(), (-c0 * hi).exp());
                cx.outside_range(&cj_name, cj, (ea.min(eb), ea.max(eb)), "exp(-c0 I1)");
                out[0] = some(closed("c1*exp(c0*x1)", &[("c1", c1), ("c0", c0)]));
                out[j - 1] = some(closed("k/(exp(-c0*x1) - c)", &[("k", kj), ("c0", c0), ("c", cj)]));
            } else {
                let k1 = cx.nonzero("k1")?;
                cx.outside_axis(&cj_name, cj, 0);
                out[0] = some(konst(k1));
                out[j - 1] = some(recip_linear(kj, 0, cj));
            }
            out[i - 1] = some(konst(ki));
            (out, [x1, x1, x1])
        }
        T2_5_1 | T2_5_2 | T2_5_3 | T2_5_4 | T2_8_1 | T2_8_2 | T2_8_3 | T2_8_4 | T2_8_5 | T3_5_1 | T3_5_2 | T3_5_3
        | T3_7_1 | T3_7_2 | T3_7_3 | T3_7_5 => {
            // each coefficient is a constant or k/(x_axis − c)
            let (forms, deps) = recip_forms(spec.kind).expect("listed kind");
            let info = spec.kind.info();
            let mut out: [Option<Expr>; 3] = [None, None, None];
            for (i, form) in forms.iter().enumerate() {
                let kname = format!("k{}", i + 1);
                let declared = info.params.iter().find(|(n, _)| *n == kname);
                out[i] = match (form, declared) {
                    (_, None) => some(konst(1.0)),
                    (Some(axis), Some(_)) => {
                        let k = cx.nonzero(&kname)?;
                        let cname = format!("c{}", i + 1);
                        let c = cx.finite(&cname)?;
                        cx.outside_axis(&cname, c, *axis);
                        some(recip_linear(k, *axis, c))
                    }
                    (None, Some((_, doc))) => {
                        let k = if doc.contains("default") {
                            cx.nonzero_or(&kname, 1.0)?
                        } else {
                            cx.nonzero(&kname)?
                        };
                        some(konst(k))
                    }
                };
            }
            (out, deps)
        }
        T2_6_1 | T2_6_2 | T2_6_3 => {
            let f1 = cx.free_expr("f1", 0, None)?;
            let (f2, f3) = match spec.kind {
                T2_6_1 => (
                    some(konst(cx.nonzero_or("k2", 1.0)?)),
                    some(konst(cx.nonzero_or("k3", 1.0)?)),
                ),
                T2_6_2 => {
                    let k2 = cx.nonzero_or("k2", 1.0)?;
                    let k3 = cx.nonzero("k3")?;
                    let c3 = cx.finite("c3")?;
                    cx.outside_axis("c3", c3, 1);
                    (some(konst(k2)), some(recip_linear(k3, 1, c3)))
                }
                _ => {
                    let k2 = cx.nonzero("k2")?;
                    let c2 = cx.finite("c2")?;
                    let k3 = cx.nonzero_or("k3", 1.0)?;
                    let f2 = cx.primitive(&f1)?.map(|(p, range)| {
                        cx.outside_range("c2", c2, range, "F(I1)");
                        recip_primitive(k2, &p, c2)
                    });
                    (f2, some(konst(k3)))
                }
            };
            ([some(f1), f2, f3], [x1, x1, x2])
        }
        T2_7_1 | T2_7_2 => {
            let f1 = cx.free_expr("f1", 0, None)?;
            let f3 = cx.free_expr("f3", 2, None)?;
            let f2 = if spec.kind == T2_7_1 {
                some(konst(cx.nonzero_or("k2", 1.0)?))
            } else {
                let k2 = cx.nonzero("k2")?;
                let c2 = cx.finite("c2")?;
                cx.primitive(&f1)?.map(|(p, range)| {
                    cx.outside_range("c2", c2, range, "F(I1)");
                    recip_primitive(k2, &p, c2)
                })
            };
            ([some(f1), f2, some(f3)], [x1, x1, x3])
        }
        T2_8_6 => {
            let k1 = cx.nonzero("k1")?;
            let k2 = cx.nonzero_or("k2", 1.0)?;
            let f1 = cx.log_sqrt("f1", k1, 2)?;
            let f3 = cx.log_sqrt("f3", -k1, 0)?;
            ([f1, some(konst(k2)), f3], [x3, x3, x1])
        }
        T2_9_1 | T2_9_2 | T2_9_3 | T2_9_4 => {
            let f3 = cx.free_expr("f3", 2, Some("1"))?;
            let (v1, v2) = match spec.kind {
                T2_9_1 => (false, false),
                T2_9_2 => (true, false),
                T2_9_3 => (false, true),
                _ => (true, true),
            };
            let required = spec.kind == T2_9_1;
            let f1 = cx.const_or_recip(0, 1, v1, required)?;
            let f2 = cx.const_or_recip(1, 0, v2, required)?;
            ([some(f1), some(f2), some(f3)], [x2, x1, x3])
        }
        T2_9_5 => {
            let k1 = cx.nonzero("k1")?;
            let f3 = cx.free_expr("f3", 2, Some("1"))?;
            let f1 = cx.log_sqrt("f1", k1, 1)?;
            let f2 = cx.log_sqrt("f2", -k1, 0)?;
            ([f1, f2, some(f3)], [x2, x1, x3])
        }
        T3_1 => {
            let k = cx.nonzero("k")?;
            ([some(konst(1.0)), some(konst(k)), some(konst(k))], [none, x1, x1])
        }
        T3_3 | T3_8 => {
            let c1 = cx.finite("c1")?;
            let c2 = cx.finite("c2")?;
            let c3 = cx.finite("c3")?;
            cx.affine_nonvanishing("affine_nonvanishing", "c1 x1 + c2 x2 + c3", [c1, c2], c3);
            let f3 = closed("1/(c1*x1 + c2*x2 + c3)", &[("c1", c1), ("c2", c2), ("c3", c3)]);
            if spec.kind == T3_3 {
                ([some(konst(1.0)), some(konst(1.0)), some(f3)], [none, none, x12])
            } else {
                let k = cx.nonzero("k")?;
                ([some(konst(k)), some(konst(k)), some(f3)], [x3, x3, x12])
            }
        }
        T3_7_4 => {
            let k2 = cx.nonzero_or("k2", 1.0)?;
            let k3 = cx.nonzero("k3")?;
            let c1 = cx.nonzero("c1")?;
            let c2 = cx.finite("c2")?;
            cx.affine_nonvanishing("affine_nonvanishing", "c1 x1 + x2 + c2", [c1, 1.0], c2);
            let f3 = closed("k3/(c1*x1 + x2 + c2)", &[("k3", k3), ("c1", c1), ("c2", c2)]);
            ([some(konst(1.0)), some(konst(k2)), some(f3)], [none, x1, x12])
        }
        T3_7_6 | T3_7_7 => {
            let k2 = cx.nonzero("k2")?;
            let k3 = cx.nonzero("k3")?;
            let c2 = cx.finite("c2")?;
            let c3 = cx.finite("c3")?;
            cx.outside_axis("c2", c2, 0);
            // θ = x2/k2 − c3 over I2
            let (lo2, hi2) = cx.axis(1);
            let (ta, tb) = {
                let (p, q) = (lo2 / k2 - c3, hi2 / k2 - c3);
                (p.min(q), p.max(q))
            };
            let vals = [("k2", k2), ("k3", k3), ("c2", c2), ("c3", c3)];
            let f2 = recip_linear(k2, 0, c2);
            let f3 = if spec.kind == T3_7_6 {
                if ta < -FRAC_PI_2 || tb > FRAC_PI_2 {
                    cx.issue(
                        "cos_window",
                        format!("x2/k2 - c3 sweeps {} on I2, leaving [-pi/2, pi/2]", interval(ta, tb)),
                        Some([ta, tb]),
                    );
                }
                closed("k3/((x1 - c2)*cos(x2/k2 - c3))", &vals)
            } else {
                let c1 = cx.nonzero("c1")?;
                let (lo1, hi1) = cx.axis(0);
                let (ua, ub) = {
                    let (p, q) = (mul0(c1, lo1 - c2), mul0(c1, hi1 - c2));
                    (p.min(q), p.max(q))
                };
                let (ca, cb) = cos_range(ta, tb);
                let prods = [mul0(ua, ca), mul0(ua, cb), mul0(ub, ca), mul0(ub, cb)];
                let pmin = prods.iter().cloned().fold(f64::INFINITY, f64::min);
                let pmax = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !(pmin > -1.0 || pmax < -1.0) {
                    cx.issue(
                        "denominator_nonvanishing",
                        format!(
                            "c1 (x1 - c2) cos(x2/k2 - c3) ranges over {} on I1 x I2, which reaches -1",
                            interval(pmin, pmax)
                        ),
                        Some([pmin, pmax]),
                    );
                }
                let mut v = vals.to_vec();
                v.push(("c1", c1));
                closed("k3/(1 + c1*(x1 - c2)*cos(x2/k2 - c3))", &v)
            };
            ([some(konst(1.0)), some(f2), some(f3)], [none, x1, x12])
        }
    };
    Ok(Assembly {
        coeffs,
        deps,
        issues: cx.issues,
    })
}

/// Constraints of `spec.kind` that fail on `spec.domain`; empty when the
/// family can be built there.
pub fn validate_spec(spec: &FamilySpec) -> Result<Vec<ValidationIssue>, FamilyError> {
    Ok(assemble(spec)?.issues)
}

/// The flat metric of the family, after validation.
pub fn build_family(spec: &FamilySpec) -> Result<DiagonalMetric, FamilyError> {
    let a = assemble(spec)?;
    if !a.issues.is_empty() {
        return Err(FamilyError::ConstraintViolation(a.issues));
    }
    let coeffs = a.coeffs.map(|c| c.expect("valid assembly has every coefficient"));
    Ok(DiagonalMetric::new(coeffs, spec.domain, a.deps)?)
}

/// The metric file written for a family: expression renderings of the
/// coefficients plus the family echo, which is what gets rebuilt on load.
pub fn metric_file(spec: &FamilySpec) -> Result<MetricFile, FamilyError> {
    let mut file = build_family(spec)?.to_file();
    file.family = Some(spec.to_value());
    Ok(file)
}

/// Load a metric file, rebuilding from the family echo when present.
pub fn load_metric(file: &MetricFile) -> Result<DiagonalMetric, FamilyError> {
    match &file.family {
        Some(v) => build_family(&FamilySpec::from_value(v.clone())?),
        None => Ok(file.to_metric()?),
    }
}
