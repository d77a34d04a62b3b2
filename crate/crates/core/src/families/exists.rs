//! Whether a proper family (every warping function nonconstant) exists on a
//! given box, with a witness spec or the constraint that rules it out.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::sample::sample_params;
use super::{affine_range, build_family, validate_spec, FamilyError, FamilySpec, Kind, Params};
use crate::metric::BoxDomain;

/// The product shapes of the three-factor warped constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `I1 x_f (I2 x I3)`: `f1 = 1`, `f2 = f3 = f(x1)`.
    WarpedI1xI2I3,
    /// `(I1 x I2) x_f I3`: `f1 = f2 = 1`, `f3 = f(x1, x2)`.
    WarpedR2xR,
    /// `I1 x_f2 I2 x_f3 I3`: `f1 = 1`, `f2(x1)`, `f3(x1)`.
    Biwarped,
    /// `(I1 x_f2 I2) x_f3 I3`: `f1 = 1`, `f2(x1)`, `f3(x1, x2)`.
    Sequential,
    /// `_f(I1 x I2) x_f3 I3`: `f1 = f2 = f(x3)`, `f3(x1, x2)`.
    Doubly,
}

pub const SHAPES: [(Shape, &str); 5] = [
    (Shape::WarpedI1xI2I3, "warped_i1xi2i3"),
    (Shape::WarpedR2xR, "warped_r2xr"),
    (Shape::Biwarped, "biwarped"),
    (Shape::Sequential, "sequential"),
    (Shape::Doubly, "doubly"),
];

impl Shape {
    pub fn name(self) -> &'static str {
        SHAPES.iter().find(|(s, _)| *s == self).expect("listed").1
    }

    fn of_kind(kind: Kind) -> Option<Shape> {
        use Kind::*;
        Some(match kind {
            T3_1 => Shape::WarpedI1xI2I3,
            T3_3 => Shape::WarpedR2xR,
            T3_5_1 | T3_5_2 | T3_5_3 => Shape::Biwarped,
            T3_7_1 | T3_7_2 | T3_7_3 | T3_7_4 | T3_7_5 | T3_7_6 | T3_7_7 => Shape::Sequential,
            T3_8 => Shape::Doubly,
            _ => return None,
        })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SHAPES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(sh, _)| *sh)
            .ok_or_else(|| FamilyError::UnknownKind(s.to_string()))
    }
}

/// Outcome of [`proper_family_exists`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Existence {
    /// The shape or kind that was asked about.
    pub subject: String,
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<FamilySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
}

impl Existence {
    fn yes(subject: &str, witness: FamilySpec) -> Self {
        Self {
            subject: subject.to_string(),
            exists: true,
            witness: Some(witness),
            obstruction: None,
        }
    }

    fn no(subject: &str, why: impl Into<String>) -> Self {
        Self {
            subject: subject.to_string(),
            exists: false,
            witness: None,
            obstruction: Some(why.into()),
        }
    }
}

fn params(v: serde_json::Value) -> Params {
    v.as_object().expect("object literal").clone()
}

fn has_end(domain: &BoxDomain, i: usize) -> bool {
    let (lo, hi) = domain.axis(i);
    lo.is_finite() || hi.is_finite()
}

/// `x_i − lo_i` when the lower end is finite, else `hi_i − x_i`, as
/// `(coefficient, offset)`; both zero on the whole line.
fn positive_term(domain: &BoxDomain, i: usize) -> (f64, f64) {
    let (lo, hi) = domain.axis(i);
    if lo.is_finite() {
        (1.0, -lo)
    } else if hi.is_finite() {
        (-1.0, hi)
    } else {
        (0.0, 0.0)
    }
}

fn shape_existence(shape: Shape, subject: &str, domain: &BoxDomain) -> Existence {
    match shape {
        Shape::WarpedI1xI2I3 => Existence::no(subject, "f1 = 1, f2 = f3 = f(x1) is flat if and only if f is constant"),
        Shape::Biwarped => Existence::no(
            subject,
            "f1 = 1, f2(x1), f3(x1) is flat only when at least one of f2, f3 is constant",
        ),
        Shape::Doubly => Existence::no(subject, "f1 = f2 = f(x3), f3(x1, x2) is flat only when f is constant"),
        Shape::WarpedR2xR => {
            if !(has_end(domain, 0) || has_end(domain, 1)) {
                return Existence::no(
                    subject,
                    "flatness forces f3 = 1/(c1 x1 + c2 x2 + c3) with c1 x1 + c2 x2 + c3 != 0 on I1 x I2 = R^2, \
                     hence c1 = c2 = 0 and f3 constant",
                );
            }
            let (a1, b1) = positive_term(domain, 0);
            let (a2, b2) = positive_term(domain, 1);
            // absorb rounding so the infimum is not below zero
            let mut c3 = b1 + b2 + 0.0;
            while affine_range(domain, [a1, a2], c3).0 < 0.0 {
                c3 = c3.next_up();
            }
            let w = FamilySpec::new(Kind::T3_3, params(json!({"c1": a1, "c2": a2, "c3": c3})), *domain);
            Existence::yes(subject, w)
        }
        Shape::Sequential => sequential(subject, domain),
    }
}

/// Only the cosine cases make both `f2` and `f3` nonconstant, and both need
/// `x1 − c2 != 0` on `I1`.
fn sequential(subject: &str, domain: &BoxDomain) -> Existence {
    let (lo1, hi1) = domain.axis(0);
    let (lo2, hi2) = domain.axis(1);
    if !has_end(domain, 0) {
        return Existence::no(
            subject,
            "a proper sequential family needs f2 = k2/(x1 - c2), and x1 - c2 != 0 is unsatisfiable on I1 = R",
        );
    }
    let c2 = if lo1.is_finite() { lo1 } else { hi1 };
    if domain.axis_bounded(1) {
        // x2/k2 − c3 sweeps (−1, 1) over I2
        let k2 = 0.5 * (hi2 - lo2);
        let c3 = 0.5 * (lo2 + hi2) / k2;
        let w = FamilySpec::new(
            Kind::T3_7_6,
            params(json!({"k2": k2, "k3": 1.0, "c2": c2, "c3": c3})),
            *domain,
        );
        return Existence::yes(subject, w);
    }
    if domain.axis_bounded(0) {
        let c2 = lo1 - 1.0;
        let reach = hi1 - c2;
        let w = FamilySpec::new(
            Kind::T3_7_7,
            params(json!({"c1": 0.5 / reach, "k2": 1.0, "k3": 1.0, "c2": c2, "c3": 0.0})),
            *domain,
        );
        return Existence::yes(subject, w);
    }
    Existence::no(
        subject,
        format!(
            "f3 = k3/((x1 - c2) cos(x2/k2 - c3)) needs |x2/k2 - c3| < pi/2 on I2 = ({lo2}, {hi2}); \
             f3 = k3/(1 + c1 (x1 - c2) cos(x2/k2 - c3)) with c1 != 0 vanishes somewhere, since cos \
             sweeps [-1, 1] on I2 while x1 - c2 is unbounded on I1 = ({lo1}, {hi1})"
        ),
    )
}

/// Nonconstant coefficients of a built spec, from the declared dependencies
/// of its expressions.
fn varying(spec: &FamilySpec) -> Result<Vec<usize>, FamilyError> {
    let m = build_family(spec)?;
    Ok((0..3)
        .filter(|&i| !m.coeffs()[i].dependency_mask().is_empty())
        .collect())
}

/// For a kind of the first group: sample a valid parameterization in which
/// every coefficient the case allows to vary does vary.
fn kind_existence(kind: Kind, domain: &BoxDomain) -> Result<Existence, FamilyError> {
    let subject = kind.id();
    let reference = FamilySpec::example(kind);
    if varying(&reference)?.is_empty() {
        return Ok(Existence::no(subject, "every coefficient of this case is constant"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // a few draws, since some choices (e.g. glued versus monotone) are random
    let mut last = String::new();
    for _ in 0..8 {
        match sample_params(kind, domain, &mut rng) {
            Ok(p) => {
                let w = FamilySpec::new(kind, p, *domain);
                if validate_spec(&w)?.is_empty() {
                    return Ok(Existence::yes(subject, w));
                }
                last = "sampled parameters failed validation".into();
            }
            Err(e) => last = e,
        }
    }
    Ok(Existence::no(subject, last))
}

/// Decide whether a proper family of the given shape name (see [`SHAPES`])
/// or kind id exists on `domain`.
pub fn proper_family_exists(subject: &str, domain: &BoxDomain) -> Result<Existence, FamilyError> {
    if let Ok(shape) = subject.parse::<Shape>() {
        return Ok(shape_existence(shape, subject, domain));
    }
    let kind: Kind = subject
        .parse()
        .map_err(|_| FamilyError::UnknownKind(subject.to_string()))?;
    match Shape::of_kind(kind) {
        None => kind_existence(kind, domain),
        Some(shape) => {
            use Kind::*;
            match kind {
                T3_3 | T3_1 | T3_5_1 | T3_5_2 | T3_5_3 | T3_8 => Ok(Existence {
                    subject: subject.to_string(),
                    ..shape_existence(shape, subject, domain)
                }),
                T3_7_6 | T3_7_7 => {
                    let e = sequential(subject, domain);
                    match &e.witness {
                        Some(w) if w.kind == kind => Ok(e),
                        _ => {
                            let mut rng = ChaCha8Rng::seed_from_u64(0);
                            match sample_params(kind, domain, &mut rng) {
                                Ok(p) => Ok(Existence::yes(subject, FamilySpec::new(kind, p, *domain))),
                                Err(why) => Ok(Existence::no(subject, why)),
                            }
                        }
                    }
                }
                _ => Ok(Existence::no(subject, "in this case one of f2, f3 is constant")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(s: &str) -> BoxDomain {
        BoxDomain::parse_cli(s).unwrap()
    }

    #[test]
    fn unbounded_shapes_have_obstructions() {
        let r3 = BoxDomain::whole_space();
        for (_, name) in SHAPES {
            let e = proper_family_exists(name, &r3).unwrap();
            assert!(!e.exists, "{name}");
            assert!(e.obstruction.is_some());
        }
        let e = proper_family_exists("sequential", &r3).unwrap();
        assert!(e.obstruction.unwrap().contains("unsatisfiable on I1 = R"));
    }

    #[test]
    fn warped_plane_witness_on_quadrant() {
        let e = proper_family_exists("warped_r2xr", &cli("0,2:0,2:0,1")).unwrap();
        let w = e.witness.unwrap();
        assert_eq!(w.kind, Kind::T3_3);
        assert_eq!(w.params, params(json!({"c1": 1.0, "c2": 1.0, "c3": 0.0})));
    }

    #[test]
    fn sequential_witnesses() {
        let e = proper_family_exists("sequential", &cli("0,2:-1.5,1.5:0,1")).unwrap();
        assert_eq!(e.witness.unwrap().kind, Kind::T3_7_6);
        let e = proper_family_exists("sequential", &cli("0,2:-inf,inf:0,1")).unwrap();
        assert_eq!(e.witness.unwrap().kind, Kind::T3_7_7);
        let e = proper_family_exists("sequential", &cli("0,inf:-inf,inf:0,1")).unwrap();
        assert!(!e.exists);
    }

    #[test]
    fn witnesses_validate() {
        let b = cli("0,2:-1,1:0.5,1");
        for kind in Kind::ALL {
            let e = proper_family_exists(kind.id(), &b).unwrap();
            if let Some(w) = e.witness {
                assert!(validate_spec(&w).unwrap().is_empty(), "{kind}");
            }
        }
        assert!(proper_family_exists("T2_8_6", &b).unwrap().exists);
        assert!(!proper_family_exists("T2_8_1", &b).unwrap().exists);
        assert!(matches!(
            proper_family_exists("T9", &b),
            Err(FamilyError::UnknownKind(_))
        ));
    }
}
