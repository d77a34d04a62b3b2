use super::NumericsError;

/// Integration stops once `|g|` falls below this.
pub const BLOWUP_THRESHOLD: f64 = 1e-10;

/// Sampled RK4 solution of `g'' = −k/g`, `g(x0) = z0`, `g'(x0) = 0`.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub k: f64,
    e0: f64,
    xs: Vec<f64>,
    gs: Vec<f64>,
    vs: Vec<f64>,
}

fn rhs(k: f64, g: f64, v: f64) -> (f64, f64) {
    (v, -k / g)
}

fn rk4(k: f64, g: f64, v: f64, h: f64) -> (f64, f64) {
    let (a1, b1) = rhs(k, g, v);
    let (a2, b2) = rhs(k, g + 0.5 * h * a1, v + 0.5 * h * b1);
    let (a3, b3) = rhs(k, g + 0.5 * h * a2, v + 0.5 * h * b2);
    let (a4, b4) = rhs(k, g + h * a3, v + h * b3);
    (
        g + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        v + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )
}

/// Integrate from `x0` to both ends of `span` with at least `steps` RK4 steps
/// in total. Reference solution for tests only.
pub fn ode_oracle(k: f64, z0: f64, x0: f64, span: (f64, f64), steps: usize) -> Result<OdeSolution, NumericsError> {
    if k == 0.0 || !k.is_finite() {
        return Err(NumericsError::InvalidArgument("ode oracle needs k != 0".into()));
    }
    if z0 == 0.0 || !z0.is_finite() {
        return Err(NumericsError::InvalidArgument("ode oracle needs z0 != 0".into()));
    }
    if steps < 1000 {
        return Err(NumericsError::InvalidArgument(format!("steps = {steps} < 1000")));
    }
    let (a, b) = span;
    if !(a <= x0 && x0 <= b && a < b) {
        return Err(NumericsError::InvalidArgument(format!("x0 = {x0} not in [{a}, {b}]")));
    }
    let h = (b - a) / steps as f64;
    let run = |end: f64| -> Result<Vec<(f64, f64, f64)>, NumericsError> {
        let len = (end - x0).abs();
        let n = (len / h).ceil() as usize;
        let mut out = vec![(x0, z0, 0.0)];
        if n == 0 {
            return Ok(out);
        }
        let dh = (end - x0) / n as f64;
        let (mut g, mut v) = (z0, 0.0);
        for i in 1..=n {
            (g, v) = rk4(k, g, v, dh);
            let x = x0 + dh * i as f64;
            if !(g.abs() >= BLOWUP_THRESHOLD) || g.signum() != z0.signum() {
                return Err(NumericsError::BlowUp { x, g });
            }
            out.push((x, g, v));
        }
        Ok(out)
    };
    let mut left = run(a)?;
    let right = run(b)?;
    left.reverse();
    left.pop();
    left.extend(right);
    Ok(OdeSolution {
        k,
        e0: 2.0 * k * z0.abs().ln(),
        xs: left.iter().map(|t| t.0).collect(),
        gs: left.iter().map(|t| t.1).collect(),
        vs: left.iter().map(|t| t.2).collect(),
    })
}

impl OdeSolution {
    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("nonempty"))
    }

    /// Nodes as `(x, g, g')`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.xs.len()).map(|i| (self.xs[i], self.gs[i], self.vs[i]))
    }

    /// `g(x)` by cubic Hermite interpolation between nodes.
    pub fn value(&self, x: f64) -> Result<f64, NumericsError> {
        let (a, b) = self.span();
        if !(a <= x && x <= b) {
            return Err(NumericsError::OutsideDomain { x, lo: a, hi: b });
        }
        let i = self.xs.partition_point(|t| *t <= x).clamp(1, self.xs.len() - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (h00, h10) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s);
        let (h01, h11) = (-2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        Ok(h00 * self.gs[i] + h10 * h * self.vs[i] + h01 * self.gs[i + 1] + h11 * h * self.vs[i + 1])
    }

    /// `(g')² + 2k ln|g|`, conserved along exact solutions.
    pub fn energy(&self, i: usize) -> f64 {
        self.vs[i] * self.vs[i] + 2.0 * self.k * self.gs[i].abs().ln()
    }

    pub fn max_energy_drift(&self) -> f64 {
        (0..self.xs.len())
            .map(|i| (self.energy(i) - self.e0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        assert!(ode_oracle(0.0, 1.0, 0.0, (-1.0, 1.0), 1000).is_err());
        assert!(ode_oracle(1.0, 0.0, 0.0, (-1.0, 1.0), 1000).is_err());
        assert!(ode_oracle(1.0, 1.0, 0.0, (-1.0, 1.0), 999).is_err());
    }

    #[test]
    fn initial_data() {
        let s = ode_oracle(1.0, 1.0, 0.0, (-0.3, 0.3), 2000).unwrap();
        assert_eq!(s.value(0.0).unwrap(), 1.0);
        let (x, g, v) = s.nodes().find(|n| n.0 == 0.0).unwrap();
        assert_eq!((x, g, v), (0.0, 1.0, 0.0));
        // g'' = −k/g = −1 at x0, seen through a second difference
        let h = 1e-3;
        let d2 = (s.value(h).unwrap() - 2.0 + s.value(-h).unwrap()) / (h * h);
        assert!((d2 + 1.0).abs() < 1e-5);
    }

    #[test]
    fn energy_is_conserved() {
        for (k, z0) in [(1.0, 1.0), (-0.7, 0.5), (1.3, -1.1)] {
            let s = ode_oracle(k, z0, 0.1, (-0.3, 0.4), 4000).unwrap();
            assert!(s.max_energy_drift() < 1e-6, "k={k} z0={z0}");
        }
    }

    #[test]
    fn blow_up_is_detected() {
        // g = z0 − t²/2 near x0 reaches zero before |t| = 1.3
        let r = ode_oracle(1.0, 0.5, 0.0, (0.0, 2.0), 1000);
        assert!(matches!(r, Err(NumericsError::BlowUp { .. })), "{r:?}");
    }
}
