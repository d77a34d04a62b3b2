use super::NumericsError;

/// Default absolute tolerance for antiderivative values.
pub const QUAD_TOL: f64 = 1e-10;
/// Maximum bisection depth of the adaptive rule.
pub const MAX_DEPTH: u32 = 60;
const MIN_DEPTH: u32 = 3;

struct Simpson<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    a0: f64,
    b0: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    fn eval(&self, x: f64) -> Result<f64, NumericsError> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite(x))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, NumericsError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        if !(a < lm && lm < m && m < rm && rm < b) || depth >= MAX_DEPTH {
            return Err(NumericsError::NonIntegrableSingularity {
                a: self.a0,
                b: self.b0,
                depth,
            });
        }
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
    }
}

/// Adaptive Simpson quadrature of `f` over a finite `[a, b]` with Richardson
/// correction. `f` is evaluated at both endpoints.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "quadrature needs finite limits, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let s = Simpson { f, a0: a, b0: b };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (s.eval(a)?, s.eval(m)?, s.eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    s.step(a, b, fa, fm, fb, whole, tol, 0)
}

/// `∫_a^b f` for integrands that may have an inverse-square-root singularity
/// at either endpoint.
///
/// Each half of the interval is mapped by `t = e ± u²` from its outer
/// endpoint `e`, which turns `|t − e|^{-1/2}` behavior into a smooth
/// integrand. Where `f(e)` itself is not finite, the value at `u = 0` is taken
/// as the limit from a point very close to the endpoint.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError> {
    integrate_offset(&|e: f64, d: f64| f(e + d), a, b, tol)
}

/// As [`integrate`], with the integrand given as `f(e, d) = φ(e + d)` so that
/// it can be evaluated without cancellation close to an endpoint `e`.
pub fn integrate_offset<F: Fn(f64, f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "quadrature needs finite limits, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_offset(f, b, a, tol).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let half = |e: f64, dir: f64, len: f64| -> Result<f64, NumericsError> {
        let umax = len.sqrt();
        let d0 = dir * (1e-18 * len).max(8.0 * f64::EPSILON * e.abs());
        let limit = 2.0 * d0.abs().sqrt() * f(e, d0);
        let near = 64.0 * f64::EPSILON * e.abs();
        let g = |u: f64| {
            let v = 2.0 * u * f(e, dir * u * u);
            if v.is_finite() {
                v
            } else if u == 0.0 && f(e, 0.0).is_finite() {
                0.0
            } else if u * u <= near || u == 0.0 {
                limit
            } else {
                v
            }
        };
        adaptive_simpson(&g, 0.0, umax, 0.5 * tol)
    };
    Ok(half(a, 1.0, m - a)? + half(b, -1.0, b - m)?)
}
