use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use super::quadrature::integrate_offset;
use super::NumericsError;

/// Number of Chebyshev nodes in the cached table.
pub const TABLE_NODES: usize = 1024;
const SEGMENT_TOL: f64 = 1e-13;
const INVERT_TOL: f64 = 1e-12;

pub type Integrand = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `(e, d) ↦ φ(e + d)`, evaluated without forming `e + d` where that loses
/// precision.
pub type OffsetIntegrand = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

struct Table {
    /// Increasing; contains the anchor.
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// +1 if F increases, -1 if it decreases.
    sign: f64,
}

/// `F(x) = ∫_anchor^x φ` on an open interval.
///
/// Values are served from a table of cumulative integrals at Chebyshev
/// nodes of a finite window, plus one short quadrature from the nearest
/// node below `x`. The table is built on first use.
pub struct Antiderivative {
    integrand: Integrand,
    offset_form: Option<OffsetIntegrand>,
    anchor: f64,
    domain: (f64, f64),
    window: (f64, f64),
    table: OnceLock<Result<Table, NumericsError>>,
    limits: OnceLock<(f64, f64)>,
}

impl fmt::Debug for Antiderivative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Antiderivative")
            .field("anchor", &self.anchor)
            .field("domain", &self.domain)
            .field("window", &self.window)
            .finish()
    }
}

impl Antiderivative {
    /// `anchor` may be a finite endpoint of `domain`, in which case `F` is
    /// the improper integral from that endpoint. `window` must be finite and
    /// is required when the domain is unbounded.
    pub fn new(
        integrand: Integrand,
        anchor: f64,
        domain: (f64, f64),
        window: Option<(f64, f64)>,
    ) -> Result<Self, NumericsError> {
        let (lo, hi) = domain;
        if !(lo < hi) {
            return Err(NumericsError::InvalidArgument(format!("empty domain ({lo}, {hi})")));
        }
        if !(anchor.is_finite() && lo <= anchor && anchor <= hi) {
            return Err(NumericsError::InvalidArgument(format!(
                "anchor {anchor} not in [{lo}, {hi}]"
            )));
        }
        let window = match window {
            Some((a, b)) => (a.max(lo), b.min(hi)),
            None => (lo, hi),
        };
        if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
            return Err(NumericsError::InvalidArgument(format!(
                "unbounded domain ({lo}, {hi}) needs a finite table window"
            )));
        }
        if !(window.0 <= anchor && anchor <= window.1) {
            return Err(NumericsError::InvalidArgument(format!(
                "anchor {anchor} outside the table window"
            )));
        }
        Ok(Self {
            integrand,
            offset_form: None,
            anchor,
            domain,
            window,
            table: OnceLock::new(),
            limits: OnceLock::new(),
        })
    }

    pub fn with_offset_form(mut self, g: OffsetIntegrand) -> Self {
        self.offset_form = Some(g);
        self
    }

    fn phi(&self, e: f64, d: f64) -> f64 {
        match &self.offset_form {
            Some(g) => g(e, d),
            None => (self.integrand)(e + d),
        }
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.integrand)(x)
    }

    fn build_table(&self) -> Result<Table, NumericsError> {
        let (a, b) = self.window;
        let n = TABLE_NODES;
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| {
                let t = ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
                0.5 * (a + b) - 0.5 * (b - a) * t
            })
            .filter(|x| *x > a && *x < b && *x != self.anchor)
            .collect();
        nodes.push(self.anchor);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let mut sign = 0.0;
        for &x in &nodes {
            let v = self.integrand(x);
            if !v.is_finite() && x == self.anchor {
                continue;
            }
            if !v.is_finite() {
                return Err(NumericsError::NonFinite(x));
            }
            let s = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign == 0.0 {
                sign = s;
            } else if s != 0.0 && s != sign {
                return Err(NumericsError::InvalidArgument(format!(
                    "integrand changes sign near {x}; antiderivative is not monotone"
                )));
            }
        }
        if sign == 0.0 {
            return Err(NumericsError::InvalidArgument("integrand vanishes identically".into()));
        }

        let ia = nodes.iter().position(|x| *x == self.anchor).expect("anchor is a node");
        let mut values = vec![0.0; nodes.len()];
        let f = |e: f64, d: f64| self.phi(e, d);
        for i in ia + 1..nodes.len() {
            values[i] = values[i - 1] + integrate_offset(&f, nodes[i - 1], nodes[i], SEGMENT_TOL)?;
        }
        for i in (0..ia).rev() {
            values[i] = values[i + 1] + integrate_offset(&f, nodes[i + 1], nodes[i], SEGMENT_TOL)?;
        }
        Ok(Table { nodes, values, sign })
    }

    fn table(&self) -> Result<&Table, NumericsError> {
        self.table
            .get_or_init(|| self.build_table())
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Force construction of the cache.
    pub fn prepare(&self) -> Result<(), NumericsError> {
        self.table().map(|_| ())
    }

    fn in_closure(&self, x: f64) -> bool {
        let (lo, hi) = self.domain;
        (lo < x && x < hi) || x == self.anchor
    }

    /// `F(x)`, absolute error about `1e-10` or better.
    pub fn value(&self, x: f64) -> Result<f64, NumericsError> {
        if !self.in_closure(x) {
            return Err(NumericsError::OutsideDomain {
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        self.value_unchecked(x)
    }

    fn value_unchecked(&self, x: f64) -> Result<f64, NumericsError> {
        if x == self.anchor {
            return Ok(0.0);
        }
        let t = self.table()?;
        let i = match t.nodes.partition_point(|n| *n <= x) {
            0 => 0,
            p => p - 1,
        };
        let f = |e: f64, d: f64| self.phi(e, d);
        Ok(t.values[i] + integrate_offset(&f, t.nodes[i], x, SEGMENT_TOL)?)
    }

    /// Direct quadrature from the anchor, bypassing the table.
    pub fn quadrature(&self, x: f64, tol: f64) -> Result<f64, NumericsError> {
        let f = |e: f64, d: f64| self.phi(e, d);
        integrate_offset(&f, self.anchor, x, tol)
    }

    /// Limits of `F` at the two domain endpoints. Infinite endpoints and
    /// divergent improper integrals give infinite limits.
    pub fn limits(&self) -> Result<(f64, f64), NumericsError> {
        let t = self.table()?;
        if let Some(l) = self.limits.get() {
            return Ok(*l);
        }
        let f = |e: f64, d: f64| self.phi(e, d);
        let end = |e: f64, node: usize, dir: f64| -> Result<f64, NumericsError> {
            if e == self.anchor {
                return Ok(0.0);
            }
            if !e.is_finite() {
                return Ok(dir * t.sign * f64::INFINITY);
            }
            match integrate_offset(&f, t.nodes[node], e, SEGMENT_TOL) {
                Ok(v) => Ok(t.values[node] + v),
                Err(NumericsError::NonIntegrableSingularity { .. }) => Ok(dir * t.sign * f64::INFINITY),
                Err(e) => Err(e),
            }
        };
        let lo = end(self.domain.0, 0, -1.0)?;
        let hi = end(self.domain.1, t.nodes.len() - 1, 1.0)?;
        let _ = self.limits.set((lo, hi));
        Ok((lo, hi))
    }

    /// Open range `F(domain)` as `(min, max)`.
    pub fn range(&self) -> Result<(f64, f64), NumericsError> {
        let (a, b) = self.limits()?;
        Ok((a.min(b), a.max(b)))
    }

    /// Solve `F(z) = y`; `|F(z) − y| ≤ 1e-12` unless `z` is pinned to
    /// floating-point resolution first.
    pub fn invert(&self, y: f64) -> Result<f64, NumericsError> {
        if !y.is_finite() {
            return Err(NumericsError::InvalidArgument(format!("cannot invert at {y}")));
        }
        if y == 0.0 {
            return Ok(self.anchor);
        }
        let t = self.table()?;
        let (lim_lo, lim_hi) = self.limits()?;
        let (rmin, rmax) = (lim_lo.min(lim_hi), lim_lo.max(lim_hi));
        if y < rmin - INVERT_TOL || y > rmax + INVERT_TOL {
            return Err(NumericsError::OutOfRange { y, lo: rmin, hi: rmax });
        }
        // work with G(z) = sign·(F(z) − y), increasing in z
        let s = t.sign;
        let target = s * y;
        let vals = |i: usize| s * t.values[i];
        let n = t.nodes.len();
        let (zl, zr) = if target < vals(0) {
            let e = self.domain.0;
            if (s * lim_lo - target).abs() <= INVERT_TOL && e.is_finite() {
                return Ok(e);
            }
            if e.is_finite() {
                (e, t.nodes[0])
            } else {
                self.expand(t.nodes[0], -1.0, target)?
            }
        } else if target > vals(n - 1) {
            let e = self.domain.1;
            if (s * lim_hi - target).abs() <= INVERT_TOL && e.is_finite() {
                return Ok(e);
            }
            if e.is_finite() {
                (t.nodes[n - 1], e)
            } else {
                self.expand(t.nodes[n - 1], 1.0, target)?
            }
        } else {
            let i = (0..n - 1)
                .position(|i| vals(i) <= target && target <= vals(i + 1))
                .unwrap_or(n - 2);
            (t.nodes[i], t.nodes[i + 1])
        };
        self.solve(zl, zr, y)
    }

    fn expand(&self, start: f64, dir: f64, target: f64) -> Result<(f64, f64), NumericsError> {
        let s = self.table()?.sign;
        let width = self.window.1 - self.window.0;
        let mut prev = start;
        let mut step = width;
        for _ in 0..200 {
            let z = prev + dir * step;
            if !z.is_finite() {
                break;
            }
            let v = s * self.value_unchecked(z)?;
            if (dir > 0.0 && v >= target) || (dir < 0.0 && v <= target) {
                return Ok(if dir > 0.0 { (prev, z) } else { (z, prev) });
            }
            prev = z;
            step *= 2.0;
        }
        Err(NumericsError::OutOfRange {
            y: s * target,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        })
    }

    /// Safeguarded Newton on a bracket `[zl, zr]`.
    fn solve(&self, mut zl: f64, mut zr: f64, y: f64) -> Result<f64, NumericsError> {
        let s = self.table()?.sign;
        let g = |z: f64| -> Result<f64, NumericsError> {
            let (lo, hi) = self.domain;
            if z <= lo || z >= hi {
                let (a, b) = self.limits()?;
                return Ok(s * ((if z <= lo { a } else { b }) - y));
            }
            Ok(s * (self.value_unchecked(z)? - y))
        };
        let mut z = 0.5 * (zl + zr);
        let mut best = (f64::INFINITY, z);
        for _ in 0..300 {
            let gz = g(z)?;
            if gz.abs() < best.0 {
                best = (gz.abs(), z);
            }
            if gz.abs() <= INVERT_TOL {
                return Ok(z);
            }
            if gz < 0.0 {
                zl = z;
            } else {
                zr = z;
            }
            let slope = s * self.integrand(z);
            let newton = z - gz / slope;
            let next = if newton.is_finite() && newton > zl && newton < zr {
                newton
            } else {
                0.5 * (zl + zr)
            };
            if next == z || !(zl < next && next < zr) {
                break;
            }
            z = next;
        }
        Ok(best.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_recip() -> Antiderivative {
        // ∫_0^x e^{-s} ds = 1 − e^{-x}
        Antiderivative::new(Arc::new(|s: f64| (-s).exp()), 0.0, (-1.0, 3.0), None).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let a = exp_recip();
        assert_eq!(a.value(0.0).unwrap(), 0.0);
        let v = a.value(1.0).unwrap();
        assert!((v - 0.632_120_558_828_557_7).abs() < 1e-10);
        let v = a.value(-0.5).unwrap();
        assert!((v - (1.0 - 0.5f64.exp())).abs() < 1e-10);
        assert!(a.value(3.0).is_err());
    }

    #[test]
    fn closed_form_inverse() {
        let a = exp_recip();
        let z = a.invert(0.5).unwrap();
        assert!((z - 2f64.ln()).abs() < 1e-11);
        assert_eq!(a.invert(0.0).unwrap(), 0.0);
        // sup F = 1 − e^{-3}
        assert!(matches!(a.invert(0.99), Err(NumericsError::OutOfRange { .. })));
        let (lo, hi) = a.range().unwrap();
        assert!((hi - (1.0 - (-3.0f64).exp())).abs() < 1e-10);
        assert!((lo - (1.0 - 1f64.exp())).abs() < 1e-10);
    }

    #[test]
    fn round_trip_random_points() {
        let a = Antiderivative::new(Arc::new(|s: f64| 1.0 / (2.0 + s.sin())), 0.3, (-2.0, 2.0), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = rng.gen_range(-1.99..1.99);
            let y = a.value(x).unwrap();
            let back = a.invert(y).unwrap();
            assert!((back - x).abs() <= 1e-10, "{x} -> {y} -> {back}");
            let direct = a.quadrature(x, 1e-12).unwrap();
            assert!((direct - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn decreasing_antiderivative_inverts() {
        let a = Antiderivative::new(Arc::new(|s: f64| -1.0 - s * s), 0.0, (-1.0, 1.0), None).unwrap();
        // F(x) = −x − x³/3
        let z = a.invert(-0.5).unwrap();
        assert!((-z - z * z * z / 3.0 + 0.5).abs() < 1e-11);
    }

    #[test]
    fn unbounded_domain_needs_window_and_expands() {
        let f: Integrand = Arc::new(|_| 1.0);
        assert!(Antiderivative::new(f.clone(), 0.0, (0.0, f64::INFINITY), None).is_err());
        let a = Antiderivative::new(f, 0.0, (0.0, f64::INFINITY), Some((0.0, 1.0))).unwrap();
        assert!((a.invert(37.5).unwrap() - 37.5).abs() < 1e-10);
        assert_eq!(a.range().unwrap(), (0.0, f64::INFINITY));
    }

    #[test]
    fn sign_change_is_rejected() {
        let a = Antiderivative::new(Arc::new(|s: f64| s), 0.5, (-1.0, 1.0), None).unwrap();
        assert!(a.value(0.7).is_err());
    }
}
