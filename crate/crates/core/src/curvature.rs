//! Riemann and Ricci tensors of a diagonal metric in its orthonormal frame.
//!
//! `Riem[i][j][k][l] = g(R(E_i, E_j) E_k, E_l)` with
//! `R(X, Y) = ∇_X ∇_Y − ∇_Y ∇_X − ∇_[X,Y]`, and
//! `Ric[j][k] = Σ_i Riem[i][j][k][i]`. Indices are 0-based in code.
//!
//! Riemann and Ricci are transcribed from separate closed forms in the frame
//! functions `a_ij`, `E_k(a_ij)`, so the contraction identity between them is
//! a real check.

use serde::{Deserialize, Serialize};

use crate::metric::{DiagonalMetric, FrameData, MetricError};
use crate::verify::{self, FlatnessReport, GridSpec, VerifyError};

pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiemannComponents(pub Tensor4);

impl RiemannComponents {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[i][j][k][l]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ_i Riem[i][j][k][i]`.
    pub fn contract(&self) -> RicciMatrix {
        let mut ric = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                ric[j][k] = (0..3).map(|i| self.0[i][j][k][i]).sum();
            }
        }
        RicciMatrix { ric }
    }

    /// Largest violation of the antisymmetries, pair symmetry and the first
    /// Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = r[i][j][k][l];
                        worst = worst
                            .max((v + r[j][i][k][l]).abs())
                            .max((v + r[i][j][l][k]).abs())
                            .max((v - r[k][l][i][j]).abs())
                            .max((v + r[j][k][i][l] + r[k][i][j][l]).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (a, b) in self
            .0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .zip(other.0.iter().flatten().flatten().flatten())
        {
            m = m.max((a - b).abs());
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RicciMatrix {
    pub ric: [[f64; 3]; 3],
}

impl RicciMatrix {
    pub fn scalar(&self) -> f64 {
        self.ric[0][0] + self.ric[1][1] + self.ric[2][2]
    }

    pub fn max_abs(&self) -> f64 {
        self.ric.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.ric[i][j] - other.ric[i][j]).abs());
            }
        }
        m
    }
}

/// Riemann tensor from frame data.
pub fn riemann_from_frame(fd: &FrameData) -> RiemannComponents {
    // 1-based accessors keep the formulas readable
    let a = |i: usize, j: usize| fd.a[i - 1][j - 1];
    let e = |k: usize, i: usize, j: usize| fd.da[k - 1][i - 1][j - 1];

    let sec12 = e(1, 2, 1) + e(2, 1, 2) - a(2, 1).powi(2) - a(1, 2).powi(2) - a(1, 3) * a(2, 3);
    let sec13 = e(1, 3, 1) + e(3, 1, 3) - a(3, 1).powi(2) - a(1, 3).powi(2) - a(1, 2) * a(3, 2);
    let sec23 = e(2, 3, 2) + e(3, 2, 3) - a(3, 2).powi(2) - a(2, 3).powi(2) - a(2, 1) * a(3, 1);
    let b = e(1, 2, 3) + a(2, 1) * (a(1, 3) - a(2, 3));
    let c = e(2, 1, 3) + a(1, 2) * (a(2, 3) - a(1, 3));
    let d = e(1, 3, 2) + a(3, 1) * (a(1, 2) - a(3, 2));
    let g = e(2, 3, 1) + a(3, 2) * (a(2, 1) - a(3, 1));
    let h = e(3, 1, 2) + a(1, 3) * (a(3, 2) - a(1, 2));
    let k = e(3, 2, 1) + a(2, 3) * (a(3, 1) - a(2, 1));

    // (i, j, k, l) 1-based; every nonzero (i≠j, k, l) class appears once
    let table: [((usize, usize, usize, usize), f64); 18] = [
        ((1, 2, 2, 1), sec12),
        ((1, 2, 2, 3), b),
        ((2, 1, 1, 2), sec12),
        ((2, 1, 1, 3), c),
        ((1, 3, 3, 1), sec13),
        ((1, 3, 3, 2), d),
        ((2, 3, 3, 1), g),
        ((2, 3, 3, 2), sec23),
        ((3, 1, 1, 2), h),
        ((3, 1, 1, 3), sec13),
        ((3, 2, 2, 1), k),
        ((3, 2, 2, 3), sec23),
        ((1, 2, 3, 1), c),
        ((1, 2, 3, 2), -b),
        ((2, 3, 1, 2), k),
        ((2, 3, 1, 3), -g),
        ((3, 1, 2, 1), -h),
        ((3, 1, 2, 3), d),
    ];

    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    // R(E_j,E_i) = −R(E_i,E_j) fills the other orientation
    for &((i, j, kk, l), v) in &table {
        r[i - 1][j - 1][kk - 1][l - 1] = v;
        r[j - 1][i - 1][kk - 1][l - 1] = -v;
    }
    RiemannComponents(r)
}

/// Ricci tensor from its own closed forms (not by contracting Riemann).
pub fn ricci_from_frame(fd: &FrameData) -> RicciMatrix {
    let a = |i: usize, j: usize| fd.a[i - 1][j - 1];
    let e = |k: usize, i: usize, j: usize| fd.da[k - 1][i - 1][j - 1];

    let r11 = e(1, 2, 1) + e(1, 3, 1) + e(2, 1, 2) + e(3, 1, 3)
        - a(2, 1).powi(2)
        - a(1, 2).powi(2)
        - a(3, 1).powi(2)
        - a(1, 3).powi(2)
        - a(1, 2) * a(3, 2)
        - a(1, 3) * a(2, 3);
    let r22 = e(1, 2, 1) + e(2, 1, 2) + e(2, 3, 2) + e(3, 2, 3)
        - a(2, 1).powi(2)
        - a(1, 2).powi(2)
        - a(3, 2).powi(2)
        - a(2, 3).powi(2)
        - a(1, 3) * a(2, 3)
        - a(2, 1) * a(3, 1);
    let r33 = e(1, 3, 1) + e(2, 3, 2) + e(3, 1, 3) + e(3, 2, 3)
        - a(3, 1).powi(2)
        - a(1, 3).powi(2)
        - a(3, 2).powi(2)
        - a(2, 3).powi(2)
        - a(1, 2) * a(3, 2)
        - a(2, 1) * a(3, 1);
    let r12 = e(1, 3, 2) + a(3, 1) * (a(1, 2) - a(3, 2));
    let r13 = e(1, 2, 3) + a(2, 1) * (a(1, 3) - a(2, 3));
    let r23 = e(2, 1, 3) + a(1, 2) * (a(2, 3) - a(1, 3));

    RicciMatrix {
        ric: [[r11, r12, r13], [r12, r22, r23], [r13, r23, r33]],
    }
}

pub fn riemann(m: &DiagonalMetric, p: [f64; 3]) -> Result<RiemannComponents, MetricError> {
    Ok(riemann_from_frame(&m.frame_quantities(p)?))
}

pub fn ricci(m: &DiagonalMetric, p: [f64; 3]) -> Result<RicciMatrix, MetricError> {
    Ok(ricci_from_frame(&m.frame_quantities(p)?))
}

/// In dimension three the curvature tensor is determined by Ricci:
///
/// `Riem[i][j][k][l] = δ_il Ric_jk + δ_jk Ric_il − δ_ik Ric_jl − δ_jl Ric_ik
///   − (S/2)(δ_il δ_jk − δ_ik δ_jl)`.
pub fn reconstruct_riemann(ric: &RicciMatrix) -> RiemannComponents {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let r = &ric.ric;
    let s = ric.scalar();
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[i][j][k][l] = d(i, l) * r[j][k] + d(j, k) * r[i][l]
                        - d(i, k) * r[j][l]
                        - d(j, l) * r[i][k]
                        - 0.5 * s * (d(i, l) * d(j, k) - d(i, k) * d(j, l));
                }
            }
        }
    }
    RiemannComponents(out)
}

/// Grid maximum of Ricci and Riemann magnitudes; see [`verify::flatness_report`].
pub fn flatness_margin(m: &DiagonalMetric, grid: &GridSpec, tol: f64) -> Result<FlatnessReport, VerifyError> {
    verify::flatness_report(m, grid, tol)
}
