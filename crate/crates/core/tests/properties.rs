mod common;

use std::sync::Arc;

use flat3::curvature::{reconstruct_riemann, ricci, riemann};
use flat3::families::{
    affine_range, build_family, proper_family_exists, sample_spec, validate_spec, FamilySpec, Kind, SHAPES,
};
use flat3::metric::BoxDomain;
use flat3::numerics::Antiderivative;
use flat3::verify::{perturb, Bump};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn bounds() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.2..4.0f64).prop_map(|(lo, w)| (lo, lo + w))
}

/// An axis that may be bounded, half-bounded or the whole line.
fn axis() -> impl Strategy<Value = (f64, f64)> {
    (bounds(), 0..4u8).prop_map(|((lo, hi), shape)| match shape {
        0 => (f64::NEG_INFINITY, f64::INFINITY),
        1 => (lo, f64::INFINITY),
        2 => (f64::NEG_INFINITY, hi),
        _ => (lo, hi),
    })
}

fn any_box() -> impl Strategy<Value = BoxDomain> {
    (axis(), axis(), axis()).prop_map(|(a, b, c)| BoxDomain::new([a.0, b.0, c.0], [a.1, b.1, c.1]).unwrap())
}

fn bounded_box() -> impl Strategy<Value = BoxDomain> {
    (bounds(), bounds(), bounds()).prop_map(|(a, b, c)| BoxDomain::new([a.0, b.0, c.0], [a.1, b.1, c.1]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riemann_symmetries_and_reconstruction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_metric(&mut rng);
        let p = common::interior_point(&mut rng, m.domain());
        let riem = riemann(&m, p).unwrap();
        let ric = ricci(&m, p).unwrap();
        prop_assert!(riem.symmetry_defect() <= 1e-10);
        prop_assert!(riem.contract().max_diff(&ric) <= 1e-10);
        prop_assert!(riem.max_diff(&reconstruct_riemann(&ric)) <= 1e-8);
    }

    /// Scaling every coefficient by λ scales the metric by 1/λ², so frame
    /// curvature components scale by λ².
    #[test]
    fn curvature_scales_with_constant_rescaling(seed in any::<u64>(), lambda in 0.3..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<String> = (0..3).map(|_| common::random_coefficient(&mut rng)).collect();
        let scaled: Vec<String> = f.iter().map(|s| format!("{lambda} * ({s})")).collect();
        let b = common::random_box();
        let m = flat3::DiagonalMetric::from_strs([&f[0], &f[1], &f[2]], &flat3::Bindings::new(), b, None).unwrap();
        let ms = flat3::DiagonalMetric::from_strs([&scaled[0], &scaled[1], &scaled[2]], &flat3::Bindings::new(), b, None).unwrap();
        let p = common::interior_point(&mut rng, &b);
        let (r, rs) = (ricci(&m, p).unwrap(), ricci(&ms, p).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((rs.ric[i][j] - lambda * lambda * r.ric[i][j]).abs() <= 1e-9 * (1.0 + r.ric[i][j].abs()));
            }
        }
    }

    /// The affine check agrees with an exact corner oracle: an affine
    /// function on an open bounded rectangle has a zero iff its corner values
    /// straddle zero strictly (or it is identically zero).
    #[test]
    fn affine_constraint_matches_corner_oracle(
        domain in bounded_box(), c1 in -2.0..2.0f64, c2 in -2.0..2.0f64, c3 in -4.0..4.0f64,
    ) {
        let s = FamilySpec::new(Kind::T3_3, json!({"c1": c1, "c2": c2, "c3": c3}).as_object().unwrap().clone(), domain);
        let flagged = !validate_spec(&s).unwrap().is_empty();
        let corners: Vec<f64> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| {
                let x = if a == 0 { domain.lo[0] } else { domain.hi[0] };
                let y = if b == 0 { domain.lo[1] } else { domain.hi[1] };
                c1 * x + c2 * y + c3
            })
            .collect();
        let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let vanishes = (lo < 0.0 && 0.0 < hi) || (lo == 0.0 && hi == 0.0);
        prop_assert_eq!(flagged, vanishes);
        let (rl, rh) = affine_range(&domain, [c1, c2], c3);
        prop_assert!((rl - lo).abs() < 1e-12 && (rh - hi).abs() < 1e-12);
    }

    #[test]
    fn outside_interval_constraint(domain in any_box(), c in -6.0..6.0f64) {
        let s = FamilySpec::new(
            Kind::C2_3,
            json!({"k1": 1, "k3": 1, "c3": c, "which": 3}).as_object().unwrap().clone(),
            domain,
        );
        let (lo, hi) = domain.axis(0);
        prop_assert_eq!(!validate_spec(&s).unwrap().is_empty(), lo < c && c < hi);
    }

    /// Witnesses are valid, flat and proper on the box: the coefficients the
    /// shape lets vary (f3 for a warped plane, f2 and f3 otherwise) do vary.
    #[test]
    fn existence_witnesses_are_consistent(domain in any_box(), which in 0..5usize) {
        let e = proper_family_exists(SHAPES[which].1, &domain).unwrap();
        prop_assert_eq!(e.exists, e.witness.is_some());
        prop_assert_eq!(e.exists, e.obstruction.is_none());
        if let Some(w) = e.witness {
            prop_assert!(validate_spec(&w).unwrap().is_empty());
            let m = build_family(&w).unwrap();
            let p = domain.center();
            // one inward shift per axis
            let shifts: Vec<[f64; 3]> = (0..3)
                .map(|j| {
                    let (lo, hi) = domain.axis(j);
                    let mut q = p;
                    q[j] = match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => lo + 0.3 * (hi - lo),
                        (false, true) => p[j] - 0.5,
                        _ => p[j] + 0.5,
                    };
                    q
                })
                .collect();
            prop_assert!(ricci(&m, p).unwrap().max_abs() < 1e-8);
            let a = m.coefficient_values(p).unwrap();
            let moved: Vec<[f64; 3]> = shifts.iter().map(|&q| m.coefficient_values(q).unwrap()).collect();
            let free: &[usize] = if SHAPES[which].1 == "warped_r2xr" { &[2] } else { &[1, 2] };
            for &i in free {
                prop_assert!(moved.iter().any(|b| (a[i] - b[i]).abs() > 1e-9), "f{} constant: {:?}", i + 1, w);
            }
        }
    }

    #[test]
    fn antiderivative_round_trip(a in 0.2..2.0f64, lo in -2.0..0.0f64, w in 0.5..3.0f64, u in 0.0..1.0f64) {
        let hi = lo + w;
        let f = Antiderivative::new(Arc::new(move |t: f64| 1.0 / (1.0 + a * t * t)), lo, (lo, hi), None).unwrap();
        let x = lo + w * (0.01 + 0.98 * u);
        let y = f.value(x).unwrap();
        // closed form atan(√a t)/√a from the anchor
        let exact = ((a.sqrt() * x).atan() - (a.sqrt() * lo).atan()) / a.sqrt();
        prop_assert!((y - exact).abs() < 1e-10);
        prop_assert!((f.invert(y).unwrap() - x).abs() < 1e-10);
    }

    #[test]
    fn bump_round_trip_restores_flatness(seed in any::<u64>(), k in 0..37usize, index in 1..=3usize) {
        let kind = Kind::ALL[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sample_spec(kind, &mut rng);
        let m = build_family(&s).unwrap();
        let bump = Bump::centered(&m, index, 0.1, 0.2);
        let bumped = perturb(&m, index, 0.1, bump.center, 0.2).unwrap();
        let back = bump.remove(&bumped).unwrap();
        let p = s.domain.center();
        prop_assert!(ricci(&bumped, p).unwrap().max_abs() > 1e-4);
        prop_assert!(ricci(&back, p).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn kind_ids_round_trip(k in 0..37usize) {
        let kind = Kind::ALL[k];
        prop_assert_eq!(kind.to_string().parse::<Kind>().unwrap(), kind);
        let v = serde_json::to_value(kind).unwrap();
        prop_assert_eq!(serde_json::from_value::<Kind>(v).unwrap(), kind);
    }
}
