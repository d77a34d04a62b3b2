use std::sync::Arc;

use super::antiderivative::Antiderivative;
use super::NumericsError;

/// Half-width of the neighborhood of the gluing point where the local
/// Taylor model replaces the inverse antiderivative.
pub const GLUE_DELTA: f64 = 1e-4;

/// The antiderivative of `φ(z) = 1/√(−2k ln|z| + r)` with `r = 2k ln|z0|`,
/// i.e. `φ(z) = 1/√(2k ln(z0/z))`, on the maximal interval `D` having `z0`
/// as an endpoint, anchored so that `F(z0) = 0`.
///
/// Its inverse `G` solves `(G')² = 2k ln(z0/G)` and `G'' = −k/G`.
///
/// | k | z0 | D |
/// |---|----|---|
/// | > 0 | > 0 | (0, z0) |
/// | > 0 | < 0 | (z0, 0) |
/// | < 0 | > 0 | (z0, ∞) |
/// | < 0 | < 0 | (−∞, z0) |
#[derive(Debug)]
pub struct LogSqrt {
    k: f64,
    z0: f64,
    anti: Antiderivative,
}

impl LogSqrt {
    pub fn new(k: f64, z0: f64) -> Result<Self, NumericsError> {
        if !(k.is_finite() && k != 0.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "k = {k} must be finite and nonzero"
            )));
        }
        if !(z0.is_finite() && z0 != 0.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "z0 = {z0} must be finite and nonzero"
            )));
        }
        let domain = match (k > 0.0, z0 > 0.0) {
            (true, true) => (0.0, z0),
            (true, false) => (z0, 0.0),
            (false, true) => (z0, f64::INFINITY),
            (false, false) => (f64::NEG_INFINITY, z0),
        };
        let window = match (k > 0.0, z0 > 0.0) {
            (true, _) => None,
            (false, true) => Some((z0, z0 + 8.0 * z0.abs())),
            (false, false) => Some((z0 - 8.0 * z0.abs(), z0)),
        };
        let phi = move |z: f64| {
            let q = 2.0 * k * (z0 / z).ln();
            if q > 0.0 {
                1.0 / q.sqrt()
            } else {
                f64::INFINITY
            }
        };
        // ln(z0/(e + d)) = ln(z0/e) − ln(1 + d/e); the first term is constant
        // in d, so rounding stays smooth near z0.
        let phi_offset = move |e: f64, d: f64| {
            let l = if e == 0.0 {
                (z0 / d).ln()
            } else {
                ((z0 - e) / e).ln_1p() - (d / e).ln_1p()
            };
            let q = 2.0 * k * l;
            if q > 0.0 {
                1.0 / q.sqrt()
            } else {
                f64::INFINITY
            }
        };
        let anti = Antiderivative::new(Arc::new(phi), z0, domain, window)?.with_offset_form(Arc::new(phi_offset));
        Ok(Self { k, z0, anti })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// `r = 2k ln|z0|`.
    pub fn r(&self) -> f64 {
        2.0 * self.k * self.z0.abs().ln()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.anti.domain()
    }

    /// `ε = sign(−k z0)`: the direction of `F(D)` away from 0.
    pub fn epsilon(&self) -> f64 {
        (-self.k * self.z0).signum()
    }

    pub fn antiderivative(&self) -> &Antiderivative {
        &self.anti
    }

    pub fn value(&self, z: f64) -> Result<f64, NumericsError> {
        self.anti.value(z)
    }

    /// `F(D)` as an ordered open interval; one end is 0.
    pub fn range(&self) -> Result<(f64, f64), NumericsError> {
        self.anti.range()
    }

    /// `G(y)`, `G'(y)`, `G''(y)` for `G = F⁻¹`.
    pub fn inverse_jet(&self, y: f64) -> Result<[f64; 3], NumericsError> {
        let z = self.anti.invert(y)?;
        let (lo, hi) = self.domain();
        if !(lo < z && z < hi) && z != self.z0 {
            return Err(NumericsError::OutOfRange { y, lo, hi });
        }
        let q = 2.0 * self.k * (self.z0 / z).ln();
        Ok([z, q.max(0.0).sqrt(), -self.k / z])
    }
}

/// The solution of `g g'' = −k` with `g(x0) = z0`, `g'(x0) = 0`, built as
/// `g(x) = G(ε|x − x0|)` away from `x0` and by its Taylor model
/// `z0 − k t²/(2 z0) − k² t⁴/(24 z0³)` for `|t| < GLUE_DELTA`.
#[derive(Debug)]
pub struct GluedSolution {
    pub ls: LogSqrt,
    pub x0: f64,
}

impl GluedSolution {
    pub fn new(k: f64, z0: f64, x0: f64) -> Result<Self, NumericsError> {
        if !x0.is_finite() {
            return Err(NumericsError::InvalidArgument(format!("x0 = {x0}")));
        }
        Ok(Self {
            ls: LogSqrt::new(k, z0)?,
            x0,
        })
    }

    /// Largest `|x − x0|` on which the solution exists (infinite when `k < 0`).
    pub fn half_width(&self) -> Result<f64, NumericsError> {
        let (a, b) = self.ls.range()?;
        Ok(a.abs().max(b.abs()))
    }

    /// `[g, g', g'']` at `x`.
    pub fn eval(&self, x: f64) -> Result<[f64; 3], NumericsError> {
        let (k, z0) = (self.ls.k, self.ls.z0);
        let t = x - self.x0;
        if t.abs() < GLUE_DELTA {
            let a = -k / (2.0 * z0);
            let b = -k * k / (24.0 * z0.powi(3));
            let t2 = t * t;
            return Ok([
                z0 + a * t2 + b * t2 * t2,
                2.0 * a * t + 4.0 * b * t2 * t,
                2.0 * a + 12.0 * b * t2,
            ]);
        }
        let eps = self.ls.epsilon();
        let [g, g1, g2] = self.ls.inverse_jet(eps * t.abs())?;
        Ok([g, g1 * eps * t.signum(), g2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_and_signs() {
        let a = LogSqrt::new(1.0, 1.0).unwrap();
        assert_eq!(a.domain(), (0.0, 1.0));
        assert_eq!(a.epsilon(), -1.0);
        assert_eq!(a.r(), 0.0);
        let b = LogSqrt::new(-1.0, -2.0).unwrap();
        assert_eq!(b.domain(), (f64::NEG_INFINITY, -2.0));
        assert_eq!(b.epsilon(), -1.0);
        assert!(LogSqrt::new(0.0, 1.0).is_err());
        assert!(LogSqrt::new(1.0, 0.0).is_err());
    }

    #[test]
    fn range_width_for_positive_k() {
        // |z0| √(π / 2k)
        for (k, z0) in [(1.0, 1.0), (0.5, -1.3), (2.0, 0.7)] {
            let a = LogSqrt::new(k, z0).unwrap();
            let (lo, hi) = a.range().unwrap();
            let w = z0.abs() * (std::f64::consts::PI / (2.0 * k)).sqrt();
            if a.epsilon() < 0.0 {
                assert_eq!(hi, 0.0);
                assert!((lo + w).abs() < 1e-9, "{lo} vs {w}");
            } else {
                assert_eq!(lo, 0.0);
                assert!((hi - w).abs() < 1e-9, "{hi} vs {w}");
            }
        }
        let c = LogSqrt::new(-1.0, 1.0).unwrap();
        assert_eq!(c.range().unwrap(), (0.0, f64::INFINITY));
    }

    #[test]
    fn inverse_satisfies_first_integral() {
        let a = LogSqrt::new(-0.8, 1.2).unwrap();
        for y in [0.05, 0.4, 1.0, 3.0] {
            let [z, g1, g2] = a.inverse_jet(y).unwrap();
            assert!((a.value(z).unwrap() - y).abs() < 1e-11);
            // G' = 1/φ(G)
            assert!((g1 * a.antiderivative().integrand(z) - 1.0).abs() < 1e-12);
            assert!((g2 * z - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn glued_initial_data() {
        let g = GluedSolution::new(1.0, 1.0, 0.0).unwrap();
        let [v, d1, d2] = g.eval(0.0).unwrap();
        assert_eq!((v, d1, d2), (1.0, 0.0, -1.0));
        // branches meet the model continuously at the switch radius
        for s in [-1.0, 1.0] {
            let inside = g.eval(s * (GLUE_DELTA * 0.999_999)).unwrap();
            let outside = g.eval(s * GLUE_DELTA).unwrap();
            assert!((inside[0] - outside[0]).abs() < 1e-12);
            assert!((inside[1] - outside[1]).abs() < 1e-9);
        }
        // symmetric in x − x0
        let l = g.eval(-0.2).unwrap();
        let r = g.eval(0.2).unwrap();
        assert!((l[0] - r[0]).abs() < 1e-14 && (l[1] + r[1]).abs() < 1e-14);
    }
}
