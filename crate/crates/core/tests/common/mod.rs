//! Shared generators for the integration tests.
#![allow(dead_code)]

use flat3::{Bindings, BoxDomain, DiagonalMetric};
use rand::Rng;

/// Box on which every generated coefficient is smooth and nowhere zero.
pub fn random_box() -> BoxDomain {
    BoxDomain::cube(0.2, 1.2)
}

/// `a1 x1 + a2 x2 + a3 x3 + b + q x_i x_j` with random coefficients.
fn random_argument<R: Rng>(rng: &mut R) -> String {
    let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = rng.gen_range(-0.5..0.5);
    let q = rng.gen_range(-0.5..0.5);
    let i = rng.gen_range(1..=3);
    let j = rng.gen_range(1..=3);
    format!(
        "({} * x1 + {} * x2 + {} * x3 + {} + {} * x{i} * x{j})",
        a[0], a[1], a[2], b, q
    )
}

/// A nowhere-zero coefficient built from one of four smooth templates.
pub fn random_coefficient<R: Rng>(rng: &mut R) -> String {
    let e = random_argument(rng);
    match rng.gen_range(0..4) {
        0 => format!("exp({e})"),
        1 => format!("2 + sin({e})"),
        2 => format!("1/(3 + {e}*{e})"),
        _ => format!("1.5 + cos({e})"),
    }
}

pub fn random_metric<R: Rng>(rng: &mut R) -> DiagonalMetric {
    let f: [String; 3] = std::array::from_fn(|_| random_coefficient(rng));
    DiagonalMetric::from_strs([&f[0], &f[1], &f[2]], &Bindings::new(), random_box(), None)
        .expect("generated metric is well formed")
}

/// Uniform point in the middle 80% of the box.
pub fn interior_point<R: Rng>(rng: &mut R, b: &BoxDomain) -> [f64; 3] {
    std::array::from_fn(|i| {
        let (lo, hi) = b.axis(i);
        let w = hi - lo;
        rng.gen_range(lo + 0.1 * w..hi - 0.1 * w)
    })
}
