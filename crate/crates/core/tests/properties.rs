use nalgebra::{Point3, Vector3};
use proptest::prelude::*;

use survgeo::geometry::{Intrinsics, RigidTransform};
use survgeo::losses::{photometric_error, snc, ssim};
use survgeo::metrics::evaluate;
use survgeo::motion::softmax;
use survgeo::priors::{max_angle_between, normal_map, pseudo_depth, NeighborPairs, PseudoDepthConfig};
use survgeo::raster::io::{decode_pfm, encode_pfm};
use survgeo::raster::{ColorImage, Grid, ScalarMap, VectorMap};

fn transform() -> impl Strategy<Value = RigidTransform> {
    (prop::array::uniform3(-3.0..3.0f64), prop::array::uniform3(-5.0..5.0f64))
        .prop_map(|(w, t)| RigidTransform::exp(Vector3::from(w), Vector3::from(t)))
}

fn intrinsics() -> impl Strategy<Value = Intrinsics> {
    (50.0..400.0f64, 50.0..400.0f64, 10.0..100.0f64, 10.0..100.0f64)
        .prop_map(|(fx, fy, cx, cy)| Intrinsics::new(fx, fy, cx, cy).unwrap())
}

/// Smooth positive depth from a few random plane and wave coefficients.
fn depth_map() -> impl Strategy<Value = ScalarMap> {
    (4usize..14, 4usize..14, 1.0..20.0f64, -0.05..0.05f64, -0.05..0.05f64, 0.0..0.5f64)
        .prop_map(|(h, w, base, gx, gy, amp)| {
            ScalarMap::from_fn(h, w, |r, c| {
                let (r, c) = (r as f64, c as f64);
                Some(base * (1.0 + gx * c + gy * r + amp * 0.1 * (0.7 * c + 0.3 * r).sin()))
            })
        })
}

fn image(h: usize, w: usize) -> impl Strategy<Value = ColorImage> {
    prop::collection::vec(prop::array::uniform3(0.0..1.0f64), h * w)
        .prop_map(move |v| Grid::new(h, w, v).unwrap())
}

fn unit_field(h: usize, w: usize) -> impl Strategy<Value = VectorMap> {
    prop::collection::vec(prop::array::uniform3(-1.0..1.0f64), h * w).prop_map(move |v| {
        let v = v
            .into_iter()
            .map(|a| {
                let n = Vector3::from(a) + Vector3::new(0.0, 0.0, -2.0);
                n.normalize()
            })
            .collect();
        VectorMap::new(h, w, v).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_with_inverse_is_identity(a in transform()) {
        prop_assert!(a.compose(&a.inverse()).max_abs_diff(&RigidTransform::identity()) < 1e-9);
        prop_assert!(a.orthonormality_error() < 1e-9);
    }

    #[test]
    fn composition_is_associative(a in transform(), b in transform(), c in transform()) {
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        prop_assert!(left.max_abs_diff(&right) < 1e-9);
    }

    #[test]
    fn conjugation_preserves_composition(g in transform(), a in transform(), b in transform()) {
        let lhs = g.conjugate(&a.compose(&b));
        let rhs = g.conjugate(&a).compose(&g.conjugate(&b));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8);
    }

    #[test]
    fn project_unproject_round_trip(k in intrinsics(), u in 0.0..200.0f64, v in 0.0..200.0f64, d in 0.1..100.0f64) {
        let p = k.unproject(u, v, d).unwrap();
        prop_assert!((p.z - d).abs() < 1e-12 * d.max(1.0));
        let (u2, v2) = k.project(&p).unwrap();
        prop_assert!((u2 - u).abs() < 1e-9 && (v2 - v).abs() < 1e-9);
    }

    #[test]
    fn transform_point_matches_matrix(a in transform(), p in prop::array::uniform3(-10.0..10.0f64)) {
        let p = Point3::from(p);
        let q = a.transform_point(&p);
        let h = a.to_matrix() * p.to_homogeneous();
        prop_assert!((q.coords - h.xyz()).norm() < 1e-9);
    }

    #[test]
    fn normals_are_scale_invariant_and_unit(
        d in depth_map(),
        k in intrinsics(),
        c in 0.05..50.0f64,
    ) {
        let pairs = NeighborPairs::default();
        let n = normal_map(&d, &k, &pairs);
        for (_, v) in n.iter_valid() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-9);
        }
        let scaled = normal_map(&d.scaled(c), &k, &pairs);
        prop_assert!(max_angle_between(&n, &scaled, false).unwrap() < 1e-6);
    }

    #[test]
    fn pseudo_depth_is_affine_invariant(
        d in depth_map(),
        alpha in 0.01..100.0f64,
        beta in -10.0..10.0f64,
    ) {
        let cfg = PseudoDepthConfig::default();
        let raw = d.map(|v| Some(1.0 / v));
        prop_assume!(raw.iter_valid().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max)
            - raw.iter_valid().map(|(_, v)| v).fold(f64::INFINITY, f64::min) > 1e-6);
        let base = pseudo_depth(&raw, &cfg).unwrap();
        let moved = pseudo_depth(&raw.map(|s| Some(alpha * s + beta)), &cfg).unwrap();
        for (i, v) in base.iter_valid() {
            prop_assert!((moved.data()[i] - v).abs() <= 1e-6 * v);
        }
    }

    #[test]
    fn snc_ignores_sign_and_is_bounded(n in unit_field(5, 6), m in unit_field(5, 6)) {
        let base = snc(&n, &m).unwrap().value;
        prop_assert_eq!(snc(&n.negated(), &m).unwrap().value, base);
        prop_assert_eq!(snc(&n, &m.negated()).unwrap().value, base);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(snc(&n, &n).unwrap().value < 1e-12);
    }

    #[test]
    fn photometric_error_properties(a in image(6, 7), b in image(6, 7)) {
        let self_err = photometric_error(&a, &a, 0.85).unwrap();
        prop_assert!(self_err.iter_valid().all(|(_, v)| v == 0.0));
        let ab = photometric_error(&a, &b, 0.85).unwrap();
        let ba = photometric_error(&b, &a, 0.85).unwrap();
        for (i, v) in ab.iter_valid() {
            prop_assert!(v >= 0.0);
            prop_assert!((v - ba.data()[i]).abs() < 1e-12);
        }
        for (_, s) in ssim(&a, &b).unwrap().iter_valid() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
        }
    }

    #[test]
    fn softmax_is_a_distribution(v in prop::collection::vec(-50.0..50.0f64, 1..10), shift in -100.0..100.0f64) {
        let p = softmax(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn median_scaling_removes_global_scale(d in depth_map(), c in 0.01..100.0f64) {
        let pred = d.map(|v| Some(v * (1.0 + 0.1 * (v * 2.3).sin())));
        let a = evaluate(&pred, &d, 1e-3, 1e3, true).unwrap();
        let b = evaluate(&pred.scaled(c), &d, 1e-3, 1e3, true).unwrap();
        prop_assert!((a.abs_rel - b.abs_rel).abs() < 1e-9);
        prop_assert!((a.rmse - b.rmse).abs() < 1e-9);
        prop_assert_eq!(a.delta1, b.delta1);
    }

    #[test]
    fn pfm_round_trip_is_exact(
        values in prop::collection::vec((any::<f32>().prop_filter("finite", |v| v.is_finite()), any::<bool>()), 1..60),
        w in 1usize..8,
    ) {
        let h = values.len() / w;
        prop_assume!(h > 0);
        let n = h * w;
        let data: Vec<f64> = values[..n].iter().map(|(v, _)| f64::from(*v)).collect();
        let mask: Vec<bool> = values[..n].iter().map(|(_, m)| *m).collect();
        let map = Grid::with_mask(h, w, data, mask).unwrap();
        let back: ScalarMap = decode_pfm(&encode_pfm(&map), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back.mask(), map.mask());
        for (i, v) in map.iter_valid() {
            prop_assert_eq!(back.data()[i].to_bits(), v.to_bits());
        }
    }
}
