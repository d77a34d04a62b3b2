//! Box domains and diagonal metrics
//! `g = (dx1)^2/f1^2 + (dx2)^2/f2^2 + (dx3)^2/f3^2`.
//!
//! The orthonormal frame is `E_i = f_i ∂/∂x^i`. All curvature quantities are
//! expressed through the six frame functions
//! `a_ij = (f_j / f_i) ∂f_i/∂x^j` (i ≠ j) and their frame derivatives
//! `E_k(a_ij)`, collected in [`FrameData`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, Bindings, Expr, ExprError, VarSet};
use crate::jets::Jet2;

/// Coefficients with magnitude below this make the frame meaningless.
pub const ZERO_COEFFICIENT: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("point {0:?} is not strictly inside the box")]
    OutsideDomain([f64; 3]),
    #[error("f{} = {value:e} vanishes at {point:?}", index + 1)]
    ZeroCoefficient { index: usize, point: [f64; 3], value: f64 },
    #[error("f{} depends on {found} but only {declared} is declared", index + 1)]
    DependencyMismatch {
        index: usize,
        found: VarSet,
        declared: VarSet,
    },
    #[error("metric.{0} required")]
    MissingField(&'static str),
    #[error("malformed metric: {0}")]
    Malformed(String),
    #[error("at {point:?}: {source}")]
    Expr {
        point: [f64; 3],
        #[source]
        source: ExprError,
    },
    #[error("in f{}: {source}", index + 1)]
    Definition {
        index: usize,
        #[source]
        source: ExprError,
    },
}

/// Product of three open intervals; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxDomain {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self, MetricError> {
        for i in 0..3 {
            if lo[i].is_nan() || hi[i].is_nan() || !(lo[i] < hi[i]) {
                return Err(MetricError::InvalidBox(format!(
                    "axis {} needs lo < hi, got ({}, {})",
                    i + 1,
                    lo[i],
                    hi[i]
                )));
            }
            if lo[i] == f64::INFINITY || hi[i] == f64::NEG_INFINITY {
                return Err(MetricError::InvalidBox(format!("axis {} is empty", i + 1)));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(lo: f64, hi: f64) -> Self {
        Self::new([lo; 3], [hi; 3]).expect("valid cube")
    }

    pub fn whole_space() -> Self {
        Self::cube(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn axis(&self, i: usize) -> (f64, f64) {
        (self.lo[i], self.hi[i])
    }

    /// Strict (open-interval) membership.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| self.lo[i] < p[i] && p[i] < self.hi[i])
    }

    pub fn axis_bounded(&self, i: usize) -> bool {
        self.lo[i].is_finite() && self.hi[i].is_finite()
    }

    pub fn bounded(&self) -> bool {
        (0..3).all(|i| self.axis_bounded(i))
    }

    /// Midpoint of each axis; finite endpoints are offset by one when the
    /// other side is infinite, and 0 is used for the whole line.
    pub fn center(&self) -> [f64; 3] {
        std::array::from_fn(|i| match (self.lo[i].is_finite(), self.hi[i].is_finite()) {
            (true, true) => 0.5 * (self.lo[i] + self.hi[i]),
            (true, false) => self.lo[i] + 1.0,
            (false, true) => self.hi[i] - 1.0,
            (false, false) => 0.0,
        })
    }

    /// Parse `"lo,hi:lo,hi:lo,hi"` with `inf`/`-inf` tokens; `"inf"` alone
    /// means all of R^3.
    pub fn parse_cli(text: &str) -> Result<Self, MetricError> {
        let text = text.trim();
        if text == "inf" || text == "R3" {
            return Ok(Self::whole_space());
        }
        let axes: Vec<&str> = text.split(':').collect();
        if axes.len() != 3 {
            return Err(MetricError::InvalidBox(format!(
                "expected three `lo,hi` pairs separated by `:`, got `{text}`"
            )));
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (i, ax) in axes.iter().enumerate() {
            let (a, b) = ax
                .split_once(',')
                .ok_or_else(|| MetricError::InvalidBox(format!("axis `{ax}` needs `lo,hi`")))?;
            lo[i] = parse_bound(a)?;
            hi[i] = parse_bound(b)?;
        }
        Self::new(lo, hi)
    }
}

pub(crate) fn parse_bound(s: &str) -> Result<f64, MetricError> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| MetricError::InvalidBox(format!("bad bound `{t}`"))),
    }
}

impl fmt::Display for BoxDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{v}")
            }
        };
        let parts: Vec<String> = (0..3).map(|i| format!("{},{}", b(self.lo[i]), b(self.hi[i]))).collect();
        write!(f, "{}", parts.join(":"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundRepr {
    Num(f64),
    Text(String),
}

impl BoundRepr {
    fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            BoundRepr::Num(v)
        } else if v > 0.0 {
            BoundRepr::Text("inf".into())
        } else {
            BoundRepr::Text("-inf".into())
        }
    }

    fn to_f64(&self) -> Result<f64, MetricError> {
        match self {
            BoundRepr::Num(v) => Ok(*v),
            BoundRepr::Text(s) => parse_bound(s),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    lo: [BoundRepr; 3],
    hi: [BoundRepr; 3],
}

impl Serialize for BoxDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BoxRepr {
            lo: self.lo.map(BoundRepr::from_f64),
            hi: self.hi.map(BoundRepr::from_f64),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoxDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = BoxRepr::deserialize(d)?;
        let conv = |b: &[BoundRepr; 3]| -> Result<[f64; 3], MetricError> {
            Ok([b[0].to_f64()?, b[1].to_f64()?, b[2].to_f64()?])
        };
        let lo = conv(&r.lo).map_err(D::Error::custom)?;
        let hi = conv(&r.hi).map_err(D::Error::custom)?;
        BoxDomain::new(lo, hi).map_err(D::Error::custom)
    }
}

/// A diagonal metric with three nowhere-zero coefficient functions on a box.
#[derive(Debug, Clone)]
pub struct DiagonalMetric {
    coeffs: [Expr; 3],
    domain: BoxDomain,
    declared: [VarSet; 3],
}

impl DiagonalMetric {
    /// `coeffs` must be fully bound (no free constants).
    pub fn new(coeffs: [Expr; 3], domain: BoxDomain, declared: [VarSet; 3]) -> Result<Self, MetricError> {
        for (i, e) in coeffs.iter().enumerate() {
            if let Some(c) = e.constants().into_iter().find(|c| c != "pi") {
                return Err(MetricError::Definition {
                    index: i,
                    source: ExprError::UnboundConstant(c),
                });
            }
            let found = e.dependency_mask();
            if !found.is_subset(declared[i]) {
                return Err(MetricError::DependencyMismatch {
                    index: i,
                    found,
                    declared: declared[i],
                });
            }
        }
        Ok(Self {
            coeffs,
            domain,
            declared,
        })
    }

    /// Parse three expression strings under `constants`. Declared
    /// dependencies default to all three variables.
    pub fn from_strs(
        f: [&str; 3],
        constants: &Bindings,
        domain: BoxDomain,
        declared: Option<[VarSet; 3]>,
    ) -> Result<Self, MetricError> {
        let mut coeffs = Vec::with_capacity(3);
        for (i, src) in f.iter().enumerate() {
            let e = expr::parse_bound(src, constants)
                .and_then(|e| e.bind(constants))
                .map_err(|source| MetricError::Definition { index: i, source })?;
            coeffs.push(e);
        }
        let coeffs: [Expr; 3] = coeffs.try_into().expect("three coefficients");
        Self::new(coeffs, domain, declared.unwrap_or([VarSet::ALL; 3]))
    }

    pub fn coeffs(&self) -> &[Expr; 3] {
        &self.coeffs
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn declared_deps(&self) -> [VarSet; 3] {
        self.declared
    }

    /// Replace coefficient `i`, keeping the declared dependency of the old one
    /// widened by whatever the new expression uses.
    pub fn with_coeff(&self, i: usize, e: Expr) -> Self {
        let mut out = self.clone();
        out.declared[i] = out.declared[i].union(e.dependency_mask());
        out.coeffs[i] = e;
        out
    }

    fn expr_err(p: [f64; 3]) -> impl Fn(ExprError) -> MetricError {
        move |source| MetricError::Expr { point: p, source }
    }

    pub fn check_point(&self, p: [f64; 3]) -> Result<(), MetricError> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(MetricError::OutsideDomain(p))
        }
    }

    /// Jets of `f1, f2, f3` at `p`, checked nonzero.
    pub fn coefficient_jets(&self, p: [f64; 3]) -> Result<[Jet2; 3], MetricError> {
        self.check_point(p)?;
        let empty = Bindings::new();
        let mut out = [Jet2::default(); 3];
        for i in 0..3 {
            let j = self.coeffs[i].eval_jet(p, &empty).map_err(Self::expr_err(p))?;
            if !(j.value.abs() >= ZERO_COEFFICIENT) {
                return Err(MetricError::ZeroCoefficient {
                    index: i,
                    point: p,
                    value: j.value,
                });
            }
            out[i] = j;
        }
        Ok(out)
    }

    /// Coefficient values only; used by finite-difference oracles.
    pub fn coefficient_values(&self, p: [f64; 3]) -> Result<[f64; 3], MetricError> {
        let empty = Bindings::new();
        let mut out = [0.0; 3];
        for i in 0..3 {
            let v = self.coeffs[i].eval(p, &empty).map_err(Self::expr_err(p))?;
            if !(v.abs() >= ZERO_COEFFICIENT) {
                return Err(MetricError::ZeroCoefficient {
                    index: i,
                    point: p,
                    value: v,
                });
            }
            out[i] = v;
        }
        Ok(out)
    }

    pub fn frame_quantities(&self, p: [f64; 3]) -> Result<FrameData, MetricError> {
        Ok(FrameData::from_jets(&self.coefficient_jets(p)?))
    }

    /// Serializable description. Expressions are rendered with
    /// [`Expr`]'s `Display`.
    pub fn to_file(&self) -> MetricFile {
        MetricFile {
            domain: Some(self.domain),
            f1: Some(self.coeffs[0].to_string()),
            f2: Some(self.coeffs[1].to_string()),
            f3: Some(self.coeffs[2].to_string()),
            constants: Bindings::new(),
            deps: Some(self.declared.map(|d| d.names())),
            family: None,
        }
    }
}

/// Frame functions at a point.
///
/// `a[i][j] = (f_j / f_i) ∂_j f_i` for `i ≠ j` (diagonal unused) and
/// `da[k][i][j] = E_k(a_ij) = f_k ∂_k a_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameData {
    pub a: [[f64; 3]; 3],
    pub da: [[[f64; 3]; 3]; 3],
    pub f: [f64; 3],
}

impl FrameData {
    pub fn from_jets(f: &[Jet2; 3]) -> Self {
        let mut out = FrameData {
            f: f.map(|j| j.value),
            ..Default::default()
        };
        for i in 0..3 {
            let fi = f[i].value;
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let fj = f[j].value;
                let dj_fi = f[i].grad[j];
                out.a[i][j] = fj / fi * dj_fi;
                for k in 0..3 {
                    // ∂_k (f_j ∂_j f_i / f_i)
                    let dk =
                        f[j].grad[k] * dj_fi / fi + fj * f[i].hess[k][j] / fi - fj * dj_fi * f[i].grad[k] / (fi * fi);
                    out.da[k][i][j] = f[k].value * dk;
                }
            }
        }
        out
    }

    /// `E_k(a_ij)` with 0-based indices.
    #[inline]
    pub fn e(&self, k: usize, i: usize, j: usize) -> f64 {
        self.da[k][i][j]
    }
}

/// Levi-Civita connection in the orthonormal frame: `gamma[i][j][k]` is the
/// coefficient of `E_k` in `∇_{E_i} E_j`.
///
/// `∇_{E_i} E_i = Σ_{k≠i} a_ik E_k` and `∇_{E_i} E_j = -a_ij E_i` for `j ≠ i`.
pub fn connection_table(fd: &FrameData) -> [[[f64; 3]; 3]; 3] {
    let mut g = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                g[i][i][j] = fd.a[i][j];
                g[i][j][i] = -fd.a[i][j];
            }
        }
    }
    g
}

/// On-disk metric description.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct MetricFile {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f3: Option<String>,
    #[serde(default, skip_serializing_if = "Bindings::is_empty")]
    pub constants: Bindings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deps: Option<[Vec<String>; 3]>,
    /// Family spec echo for metrics that came out of a family constructor.
    /// When present it is the authoritative source: quadrature-defined
    /// coefficients have no expression-string form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<serde_json::Value>,
}

impl MetricFile {
    pub fn from_json(text: &str) -> Result<Self, MetricError> {
        serde_json::from_str(text).map_err(|e| MetricError::Malformed(e.to_string()))
    }

    /// Build the metric from the expression fields (ignores `family`).
    pub fn to_metric(&self) -> Result<DiagonalMetric, MetricError> {
        let domain = self.domain.ok_or(MetricError::MissingField("box"))?;
        let f1 = self.f1.as_deref().ok_or(MetricError::MissingField("f1"))?;
        let f2 = self.f2.as_deref().ok_or(MetricError::MissingField("f2"))?;
        let f3 = self.f3.as_deref().ok_or(MetricError::MissingField("f3"))?;
        let deps = match &self.deps {
            Some(d) => {
                let mut out = [VarSet::EMPTY; 3];
                for i in 0..3 {
                    out[i] =
                        VarSet::from_names(&d[i]).map_err(|source| MetricError::Definition { index: i, source })?;
                }
                Some(out)
            }
            None => None,
        };
        DiagonalMetric::from_strs([f1, f2, f3], &self.constants, domain, deps)
    }
}
