//! Grids, flatness reports, a finite-difference curvature oracle and bump
//! perturbations for negative controls.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{ricci_from_frame, riemann_from_frame, RicciMatrix};
use crate::expr::{Expr, Func};
use crate::metric::{BoxDomain, DiagonalMetric, MetricError};

pub const DEFAULT_INSET: f64 = 1e-3;
pub const DEFAULT_GRID: usize = 17;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const FD_STEP: f64 = 1e-4;
/// Ricci entries below this magnitude are excluded from relative comparison.
pub const FD_MASK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("axis {} is unbounded; give a truncation window", .0 + 1)]
    Unbounded(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {point:?} is closer than {clearance} to the boundary")]
    Clearance { point: [f64; 3], clearance: f64 },
    #[error("perturbation amplitude must be nonzero")]
    ZeroAmplitude,
    #[error("bad bump: {0}")]
    BadBump(String),
}

/// Uniform tensor grid strictly inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// Fraction of each axis width removed from both ends.
    pub inset: f64,
    /// Window per axis, required where the box is unbounded.
    #[serde(default)]
    pub truncation: [Option<(f64, f64)>; 3],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(DEFAULT_GRID)
    }
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            inset: DEFAULT_INSET,
            truncation: [None; 3],
        }
    }

    pub fn truncate(mut self, axis: usize, lo: f64, hi: f64) -> Self {
        self.truncation[axis] = Some((lo, hi));
        self
    }

    /// Sampled interval on `axis` before the inset is applied.
    pub fn window(&self, domain: &BoxDomain, axis: usize) -> Result<(f64, f64), VerifyError> {
        let (mut lo, mut hi) = domain.axis(axis);
        if let Some((a, b)) = self.truncation[axis] {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(VerifyError::InvalidGrid(format!(
                    "truncation ({a}, {b}) on axis {}",
                    axis + 1
                )));
            }
            lo = lo.max(a);
            hi = hi.min(b);
            if !(lo < hi) {
                return Err(VerifyError::InvalidGrid(format!(
                    "truncation on axis {} misses the box",
                    axis + 1
                )));
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(VerifyError::Unbounded(axis));
        }
        Ok((lo, hi))
    }

    pub fn axis_points(&self, domain: &BoxDomain, axis: usize) -> Result<Vec<f64>, VerifyError> {
        if self.n < 2 {
            return Err(VerifyError::InvalidGrid(format!("need n >= 2, got {}", self.n)));
        }
        if !(self.inset > 0.0 && self.inset < 0.5) {
            return Err(VerifyError::InvalidGrid(format!(
                "inset {} outside (0, 0.5)",
                self.inset
            )));
        }
        let (lo, hi) = self.window(domain, axis)?;
        let d = (hi - lo) * self.inset;
        let (a, b) = (lo + d, hi - d);
        let step = (b - a) / (self.n - 1) as f64;
        Ok((0..self.n)
            .map(|i| if i + 1 == self.n { b } else { a + step * i as f64 })
            .collect())
    }

    /// All grid points in lexicographic order (`x1` slowest).
    pub fn points(&self, domain: &BoxDomain) -> Result<Vec<[f64; 3]>, VerifyError> {
        let ax: Vec<Vec<f64>> = (0..3).map(|i| self.axis_points(domain, i)).collect::<Result<_, _>>()?;
        let mut out = Vec::with_capacity(self.n.pow(3));
        for &x in &ax[0] {
            for &y in &ax[1] {
                for &z in &ax[2] {
                    out.push([x, y, z]);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub point: [f64; 3],
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub max_ric: f64,
    pub max_riem: f64,
    pub argmax_point: Option<[f64; 3]>,
    pub grid: GridSpec,
    pub points: usize,
    pub tol: f64,
    pub flat: bool,
    pub per_point_errors: Vec<PointError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<serde_json::Value>,
}

/// Per-point curvature summary, used for CSV dumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub point: [f64; 3],
    pub ric: RicciMatrix,
    pub max_riem: f64,
}

pub fn sample(m: &DiagonalMetric, p: [f64; 3]) -> Result<PointSample, MetricError> {
    let fd = m.frame_quantities(p)?;
    let ric = ricci_from_frame(&fd);
    let max_riem = riemann_from_frame(&fd).max_abs();
    if !ric.max_abs().is_finite() || !max_riem.is_finite() {
        return Err(MetricError::Malformed(format!("non-finite curvature at {p:?}")));
    }
    Ok(PointSample {
        point: p,
        ric,
        max_riem,
    })
}

pub fn sample_grid(m: &DiagonalMetric, grid: &GridSpec) -> Result<Vec<Result<PointSample, PointError>>, VerifyError> {
    let pts = grid.points(m.domain())?;
    Ok(pts
        .par_iter()
        .map(|&p| {
            sample(m, p).map_err(|e| PointError {
                point: p,
                message: e.to_string(),
            })
        })
        .collect())
}

/// Evaluate curvature on the grid and compare the largest Ricci entry with
/// `tol`. Point failures are logged in the report and make it non-flat.
pub fn flatness_report(m: &DiagonalMetric, grid: &GridSpec, tol: f64) -> Result<FlatnessReport, VerifyError> {
    if !(tol > 0.0) {
        return Err(VerifyError::InvalidGrid(format!("tolerance {tol} must be positive")));
    }
    let samples = sample_grid(m, grid)?;
    let points = samples.len();
    let mut max_ric = 0.0;
    let mut max_riem: f64 = 0.0;
    let mut argmax = None;
    let mut errors = Vec::new();
    // sequential, in grid order: ties keep the lexicographically smallest point
    for s in samples {
        match s {
            Ok(s) => {
                let r = s.ric.max_abs();
                if argmax.is_none() || r > max_ric {
                    max_ric = r;
                    argmax = Some(s.point);
                }
                max_riem = max_riem.max(s.max_riem);
            }
            Err(e) => errors.push(e),
        }
    }
    Ok(FlatnessReport {
        max_ric,
        max_riem,
        argmax_point: argmax,
        grid: grid.clone(),
        points,
        tol,
        flat: errors.is_empty() && max_ric <= tol,
        per_point_errors: errors,
        spec: None,
    })
}

pub fn write_csv<W: Write>(out: &mut W, samples: &[Result<PointSample, PointError>]) -> std::io::Result<()> {
    writeln!(out, "x1,x2,x3,ric11,ric12,ric13,ric22,ric23,ric33,max_riem,error")?;
    for s in samples {
        match s {
            Ok(s) => {
                let [x, y, z] = s.point;
                let r = &s.ric.ric;
                writeln!(
                    out,
                    "{x},{y},{z},{},{},{},{},{},{},{},",
                    r[0][0], r[0][1], r[0][2], r[1][1], r[1][2], r[2][2], s.max_riem
                )?;
            }
            Err(e) => {
                let [x, y, z] = e.point;
                writeln!(out, "{x},{y},{z},,,,,,,,\"{}\"", e.message.replace('"', "'"))?;
            }
        }
    }
    Ok(())
}

/// Result of comparing the frame-formula Ricci tensor with the
/// coordinate finite-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdComparison {
    /// Max relative deviation over entries with `|Ric| >= FD_MASK`; 0 if none.
    pub max_rel: f64,
    pub max_abs: f64,
    pub formula: RicciMatrix,
    pub oracle: RicciMatrix,
}

type Gamma = [[[f64; 3]; 3]; 3];

fn metric_diag(m: &DiagonalMetric, p: [f64; 3]) -> Result<[f64; 3], MetricError> {
    Ok(m.coefficient_values(p)?.map(|f| 1.0 / (f * f)))
}

fn shifted(p: [f64; 3], axis: usize, d: f64) -> [f64; 3] {
    let mut q = p;
    q[axis] += d;
    q
}

/// Coordinate Christoffel symbols `gamma[k][i][j] = Γ^k_ij` from central
/// differences of the diagonal metric.
fn christoffel(m: &DiagonalMetric, p: [f64; 3], h: f64) -> Result<Gamma, MetricError> {
    let g = metric_diag(m, p)?;
    // dg[a][i] = ∂_a g_ii
    let mut dg = [[0.0; 3]; 3];
    for a in 0..3 {
        let gp = metric_diag(m, shifted(p, a, h))?;
        let gm = metric_diag(m, shifted(p, a, -h))?;
        for i in 0..3 {
            dg[a][i] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let mut gam = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                // ½ g^kk (∂_i g_jk + ∂_j g_ik − ∂_k g_ij)
                let mut s = 0.0;
                if j == k {
                    s += dg[i][k];
                }
                if i == k {
                    s += dg[j][k];
                }
                if i == j {
                    s -= dg[k][i];
                }
                gam[k][i][j] = 0.5 * s / g[k];
            }
        }
    }
    Ok(gam)
}

/// Coordinate Ricci tensor of `m` at `p` by nested central differences.
pub fn fd_coordinate_ricci(m: &DiagonalMetric, p: [f64; 3], h: f64) -> Result<[[f64; 3]; 3], MetricError> {
    let gam = christoffel(m, p, h)?;
    // dgam[a][k][i][j] = ∂_a Γ^k_ij
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        let gp = christoffel(m, shifted(p, a, h), h)?;
        let gm = christoffel(m, shifted(p, a, -h), h)?;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dgam[a][k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
                }
            }
        }
    }
    let mut ric = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += dgam[k][k][i][j] - dgam[j][k][i][k];
                for l in 0..3 {
                    s += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                }
            }
            ric[i][j] = s;
        }
    }
    Ok(ric)
}

pub fn fd_crosscheck(m: &DiagonalMetric, p: [f64; 3]) -> Result<FdComparison, VerifyError> {
    let h = FD_STEP;
    let dom = m.domain();
    let clearance = 2.0 * h;
    if (0..3).any(|i| !(p[i] - clearance > dom.lo[i] && p[i] + clearance < dom.hi[i])) {
        return Err(VerifyError::Clearance { point: p, clearance });
    }
    let fd = m.frame_quantities(p)?;
    let formula = ricci_from_frame(&fd);
    let coord = fd_coordinate_ricci(m, p, h)?;
    let mut oracle = RicciMatrix::default();
    for i in 0..3 {
        for j in 0..3 {
            // E_i = f_i ∂_i
            oracle.ric[i][j] = fd.f[i] * fd.f[j] * coord[i][j];
        }
    }
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = (formula.ric[i][j], oracle.ric[i][j]);
            let d = (a - b).abs();
            max_abs = max_abs.max(d);
            if a.abs() >= FD_MASK {
                max_rel = max_rel.max(d / a.abs());
            }
        }
    }
    Ok(FdComparison {
        max_rel,
        max_abs,
        formula,
        oracle,
    })
}

/// Gaussian bump factor `1 + amplitude·exp(−|x − center|²/width²)` applied
/// to coefficient `index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub index: usize,
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
}

impl Bump {
    pub fn centered(m: &DiagonalMetric, index: usize, amplitude: f64, width: f64) -> Self {
        Self {
            index,
            amplitude,
            center: m.domain().center(),
            width,
        }
    }

    fn check(&self, domain: &BoxDomain) -> Result<(), VerifyError> {
        if !(1..=3).contains(&self.index) {
            return Err(VerifyError::BadBump(format!(
                "coefficient index {} not in 1..3",
                self.index
            )));
        }
        if self.amplitude == 0.0 {
            return Err(VerifyError::ZeroAmplitude);
        }
        if !(self.amplitude > -1.0) || !self.amplitude.is_finite() {
            return Err(VerifyError::BadBump(format!(
                "amplitude {} would let the coefficient vanish",
                self.amplitude
            )));
        }
        if !(self.width > 0.0) {
            return Err(VerifyError::BadBump(format!("width {} must be positive", self.width)));
        }
        for i in 0..3 {
            let c = self.center[i];
            if !(c - self.width > domain.lo[i] && c + self.width < domain.hi[i]) {
                return Err(VerifyError::BadBump(format!(
                    "support radius {} around {:?} leaves the box on axis {}",
                    self.width,
                    self.center,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn factor(&self) -> Expr {
        let mut r2 = None;
        for i in 0..3 {
            let d = Expr::sub(Expr::var(i), Expr::num(self.center[i]));
            let sq = Expr::Pow(Box::new(d), 2);
            r2 = Some(match r2 {
                None => sq,
                Some(acc) => Expr::add(acc, sq),
            });
        }
        let arg = Expr::Neg(Box::new(Expr::div(
            r2.expect("three terms"),
            Expr::num(self.width * self.width),
        )));
        Expr::add(
            Expr::num(1.0),
            Expr::mul(Expr::num(self.amplitude), Expr::call(Func::Exp, arg)),
        )
    }

    pub fn apply(&self, m: &DiagonalMetric) -> Result<DiagonalMetric, VerifyError> {
        self.check(m.domain())?;
        let i = self.index - 1;
        Ok(m.with_coeff(i, Expr::mul(m.coeffs()[i].clone(), self.factor())))
    }

    /// Divide the bump factor back out.
    pub fn remove(&self, m: &DiagonalMetric) -> Result<DiagonalMetric, VerifyError> {
        self.check(m.domain())?;
        let i = self.index - 1;
        Ok(m.with_coeff(i, Expr::div(m.coeffs()[i].clone(), self.factor())))
    }
}

pub fn perturb(
    m: &DiagonalMetric,
    index: usize,
    amplitude: f64,
    center: [f64; 3],
    width: f64,
) -> Result<DiagonalMetric, VerifyError> {
    Bump {
        index,
        amplitude,
        center,
        width,
    }
    .apply(m)
}
