//! Random valid parameters for every kind, used by the soundness tests and
//! by the existence search for the cases of the first family group.

use rand::Rng;
use serde_json::{json, Value};

use super::{affine_range, implicit::Primitive, recip_forms, FamilySpec, Kind, Params};
use crate::expr;
use crate::metric::BoxDomain;
use crate::numerics::LogSqrt;

/// The box used for sampled specs of `kind`.
pub fn sample_box(kind: Kind) -> BoxDomain {
    match kind {
        Kind::T2_8_6 | Kind::T2_9_5 => BoxDomain::cube(-0.3, 0.3),
        _ => BoxDomain::cube(-1.0, 1.0),
    }
}

/// A random valid spec of `kind` on [`sample_box`].
pub fn sample_spec<R: Rng>(kind: Kind, rng: &mut R) -> FamilySpec {
    let domain = sample_box(kind);
    let params = sample_params(kind, &domain, rng).unwrap_or_else(|e| panic!("{kind} on its sample box: {e}"));
    FamilySpec::new(kind, params, domain)
}

fn k<R: Rng>(rng: &mut R) -> f64 {
    sign(rng) * rng.gen_range(0.5..2.0)
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn unbounded_obstruction(axis: usize, what: &str) -> String {
    format!("{what} unsatisfiable on I{} = R", axis + 1)
}

/// A constant outside `I_axis`, near one of its finite ends.
fn c_out<R: Rng>(rng: &mut R, domain: &BoxDomain, axis: usize, cname: &str) -> Result<f64, String> {
    let (lo, hi) = domain.axis(axis);
    let below = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => rng.gen_bool(0.5),
        (true, false) => true,
        (false, true) => false,
        (false, false) => return Err(unbounded_obstruction(axis, &format!("x{} - {cname} != 0", axis + 1))),
    };
    Ok(if below {
        lo - rng.gen_range(0.1..1.0)
    } else {
        hi + rng.gen_range(0.1..1.0)
    })
}

/// A nowhere-zero expression in `x_{axis+1}`.
fn free_fn<R: Rng>(rng: &mut R, domain: &BoxDomain, axis: usize) -> String {
    let x = format!("x{}", axis + 1);
    let a = rng.gen_range(0.5..1.5);
    let b = rng.gen_range(-1.0..1.0);
    let choices = if domain.axis_bounded(axis) { 4 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => format!("2 + sin({a}*{x} + {b})"),
        1 => format!("1/(3 + {x}*{x})"),
        2 => format!("1.5 + cos({a}*{x})"),
        _ => format!("exp({a}*{x})"),
    }
}

/// A constant outside `F(I1)` for `F' = 1/f1`.
fn c_out_of_primitive<R: Rng>(rng: &mut R, domain: &BoxDomain, f1: &str) -> Result<f64, String> {
    if !domain.axis_bounded(0) {
        return Err("F is tabulated over I1, which must be bounded".into());
    }
    let (lo, hi) = domain.axis(0);
    let e = expr::parse(f1).map_err(|e| e.to_string())?;
    let p = Primitive::new("F", e, lo, hi).map_err(|e| e.to_string())?;
    let (a, b) = p.antiderivative().range().map_err(|e| e.to_string())?;
    Ok(if rng.gen_bool(0.5) {
        a - rng.gen_range(0.2..1.0)
    } else {
        b + rng.gen_range(0.2..1.0)
    })
}

/// A log-sqrt factor with parameter `k` on `I_axis`.
fn factor<R: Rng>(rng: &mut R, domain: &BoxDomain, axis: usize, k: f64) -> Result<Value, String> {
    let (lo, hi) = domain.axis(axis);
    let bounded = domain.axis_bounded(axis);
    if k > 0.0 && !bounded {
        return Err(format!(
            "a factor with g g'' = -k, k > 0, exists only on a bounded interval, but I{} = ({lo}, {hi})",
            axis + 1
        ));
    }
    let mut z0 = sign(rng) * rng.gen_range(0.8..1.5);
    let err = |e: crate::numerics::NumericsError| e.to_string();
    let glued = !bounded || rng.gen_bool(0.5);
    if glued {
        let x0 = if bounded {
            let w = hi - lo;
            0.5 * (lo + hi) + w * rng.gen_range(-0.05..0.05)
        } else if lo.is_finite() {
            lo + 1.0
        } else if hi.is_finite() {
            hi - 1.0
        } else {
            0.0
        };
        if k > 0.0 {
            // half-width |z0| √(π/2k) must cover the reach with room to spare
            let reach = (x0 - lo).max(hi - x0);
            let need = 1.3 * reach / (std::f64::consts::PI / (2.0 * k)).sqrt();
            if z0.abs() < need {
                z0 = z0.signum() * need;
            }
        }
        return Ok(json!({"z0": z0, "x0": x0}));
    }
    let width = hi - lo;
    let mut ls = LogSqrt::new(k, z0).map_err(err)?;
    let (mut ra, mut rb) = ls.range().map_err(err)?;
    if k > 0.0 && width > 0.6 * (rb - ra) {
        z0 *= width / (0.6 * (rb - ra));
        ls = LogSqrt::new(k, z0).map_err(err)?;
        (ra, rb) = ls.range().map_err(err)?;
    }
    let start = if ra.is_finite() && rb.is_finite() {
        ra + (rb - ra - width) * rng.gen_range(0.2..0.8)
    } else if ra.is_finite() {
        ra + rng.gen_range(0.05..0.5)
    } else {
        rb - rng.gen_range(0.05..0.5) - width
    };
    let eta = sign(rng);
    let d = if eta > 0.0 { start - lo } else { start + hi };
    Ok(json!({"z0": z0, "eta": eta, "d": d}))
}

/// `c` making `a1 x1 + a2 x2 + c` keep one sign on `I1 x I2` with margin.
fn affine_offset<R: Rng>(rng: &mut R, domain: &BoxDomain, a: [f64; 2]) -> Result<f64, String> {
    let (lo, hi) = affine_range(domain, a, 0.0);
    if lo.is_finite() && (!hi.is_finite() || rng.gen_bool(0.5)) {
        Ok(-lo + rng.gen_range(0.3..1.0))
    } else if hi.is_finite() {
        Ok(-hi - rng.gen_range(0.3..1.0))
    } else {
        Err("an affine function of (x1, x2) taking both signs on I1 x I2 must vanish there".into())
    }
}

/// Linear coefficients bounded on one side over each axis; zero on axes
/// that are the whole line.
fn affine_coeffs<R: Rng>(rng: &mut R, domain: &BoxDomain) -> [f64; 2] {
    let mut a = [0.0; 2];
    for (i, ai) in a.iter_mut().enumerate() {
        let (lo, hi) = domain.axis(i);
        let m = rng.gen_range(0.2..1.0);
        *ai = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => sign(rng) * m,
            (true, false) => m,
            (false, true) => -m,
            (false, false) => 0.0,
        };
    }
    a
}

/// Random valid parameters of `kind` on `domain`, or why none are produced.
pub fn sample_params<R: Rng>(kind: Kind, domain: &BoxDomain, rng: &mut R) -> Result<Params, String> {
    use Kind::*;
    let mut p = Params::new();
    let mut set = |name: &str, v: Value| {
        p.insert(name.to_string(), v);
    };
    match kind {
        T2_1_2 | T2_1_3 => {
            let f1 = free_fn(rng, domain, 0);
            let c = c_out_of_primitive(rng, domain, &f1)?;
            let j = if kind == T2_1_2 { 3 } else { 2 };
            set("f1", json!(f1));
            set(&format!("k{j}"), json!(k(rng)));
            set(&format!("c{j}"), json!(c));
            if rng.gen_bool(0.5) {
                set(&format!("k{}", 5 - j), json!(k(rng)));
            }
        }
        C2_2 | C2_3 => {
            let j = rng.gen_range(2..=3);
            set("which", json!(j));
            set(&format!("k{j}"), json!(k(rng)));
            set(&format!("k{}", 5 - j), json!(k(rng)));
            if kind == C2_2 {
                set("c0", json!(sign(rng) * rng.gen_range(0.5..1.5)));
                set("c1", json!(k(rng)));
                // exp(−c0 x1) > 0, so nonpositive constants always avoid it
                set(&format!("c{j}"), json!(-rng.gen_range(0.1..1.0)));
            } else {
                set("k1", json!(k(rng)));
                set(&format!("c{j}"), json!(c_out(rng, domain, 0, &format!("c{j}"))?));
            }
        }
        T2_6_1 | T2_6_2 | T2_6_3 | T2_7_1 | T2_7_2 => {
            let f1 = free_fn(rng, domain, 0);
            set("f1", json!(f1));
            match kind {
                T2_6_1 | T2_7_1 => set("k2", json!(k(rng))),
                T2_6_2 => {
                    set("k3", json!(k(rng)));
                    set("c3", json!(c_out(rng, domain, 1, "c3")?));
                }
                _ => {
                    let c2 = c_out_of_primitive(rng, domain, &f1)?;
                    set("k2", json!(k(rng)));
                    set("c2", json!(c2));
                }
            }
            if matches!(kind, T2_7_1 | T2_7_2) {
                set("f3", json!(free_fn(rng, domain, 2)));
            }
        }
        T2_8_6 | T2_9_5 => {
            let k1 = sign(rng) * rng.gen_range(0.5..1.5);
            let (first, second, a1, a2) = if kind == T2_8_6 {
                ("f1", "f3", 2, 0)
            } else {
                ("f1", "f2", 1, 0)
            };
            set("k1", json!(k1));
            set(first, factor(rng, domain, a1, k1)?);
            set(second, factor(rng, domain, a2, -k1)?);
            if kind == T2_8_6 {
                set("k2", json!(k(rng)));
            } else {
                set("f3", json!(free_fn(rng, domain, 2)));
            }
        }
        T2_9_1 | T2_9_2 | T2_9_3 | T2_9_4 => {
            let (v1, v2) = match kind {
                T2_9_1 => (false, false),
                T2_9_2 => (true, false),
                T2_9_3 => (false, true),
                _ => (true, true),
            };
            set("k1", json!(k(rng)));
            set("k2", json!(k(rng)));
            if v1 {
                set("c1", json!(c_out(rng, domain, 1, "c1")?));
            }
            if v2 {
                set("c2", json!(c_out(rng, domain, 0, "c2")?));
            }
            if rng.gen_bool(0.7) {
                set("f3", json!(free_fn(rng, domain, 2)));
            }
        }
        T3_1 => set("k", json!(k(rng))),
        T3_3 | T3_8 => {
            let a = affine_coeffs(rng, domain);
            let c3 = affine_offset(rng, domain, a)?;
            set("c1", json!(a[0]));
            set("c2", json!(a[1]));
            set("c3", json!(c3));
            if kind == T3_8 {
                set("k", json!(k(rng)));
            }
        }
        T3_7_4 => {
            let c1 = k(rng);
            let c2 = affine_offset(rng, domain, [c1, 1.0])?;
            set("k2", json!(k(rng)));
            set("k3", json!(k(rng)));
            set("c1", json!(c1));
            set("c2", json!(c2));
        }
        T3_7_6 | T3_7_7 => {
            let (lo2, hi2) = domain.axis(1);
            let c2 = c_out(rng, domain, 0, "c2")?;
            let (k2, c3) = if kind == T3_7_6 {
                if !domain.axis_bounded(1) {
                    return Err(unbounded_obstruction(1, "|x2/k2 - c3| < pi/2 on I2"));
                }
                // x2/k2 − c3 stays within 1.5 < π/2 of zero over I2
                let k2 = sign(rng) * 0.5 * (hi2 - lo2) * rng.gen_range(1.0..1.5) / 1.2;
                (k2, 0.5 * (lo2 + hi2) / k2 + rng.gen_range(-0.3..0.3))
            } else {
                (k(rng), rng.gen_range(-1.0..1.0))
            };
            set("k2", json!(k2));
            set("k3", json!(k(rng)));
            set("c2", json!(c2));
            set("c3", json!(c3));
            if kind == T3_7_7 {
                let (lo1, hi1) = domain.axis(0);
                if !domain.axis_bounded(0) {
                    return Err(unbounded_obstruction(
                        0,
                        "1 + c1 (x1 - c2) cos(x2/k2 - c3) != 0 with c1 != 0",
                    ));
                }
                let reach = (lo1 - c2).abs().max((hi1 - c2).abs());
                set("c1", json!(sign(rng) * rng.gen_range(0.2..1.0) / (2.0 * reach)));
            }
        }
        _ => {
            let (forms, _) = recip_forms(kind).expect("remaining kinds are reciprocal-linear");
            for (name, _) in kind.info().params {
                let i: usize = name[1..].parse().expect("k or c with an index");
                let v = match (&name[..1], forms[i - 1]) {
                    ("c", Some(axis)) => c_out(rng, domain, axis, name)?,
                    _ => k(rng),
                };
                set(name, json!(v));
            }
        }
    }
    Ok(p)
}
