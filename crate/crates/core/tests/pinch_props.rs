use hicoflow::flow::Background;
use hicoflow::immersion::{point_geometry, Immersion, Transformed};
use hicoflow::mesh::shapes;
use hicoflow::pinch::{f_sigma, lp_norm, lp_norm_f_sigma, pinch_q, pinch_threshold, PinchParams};
use hicoflow::zoo::{zoo_make, ZooParams};
use nalgebra::DMatrix;
use num_rational::Ratio;
use proptest::prelude::*;

fn pinched_surfaces() -> Vec<Box<dyn Immersion<f64>>> {
    ["sphere", "ellipsoid", "perturbed_sphere", "product_spheres"]
        .iter()
        .map(|name| zoo_make(name, &ZooParams::new(), 3).unwrap().immersion)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_sigma_and_q_scale(idx in 0usize..4, pick in 0usize..500, lambda in 0.25f64..4.0, sigma in 0.0f64..0.5) {
        let imm = pinched_surfaces().swap_remove(idx);
        let grid = imm.domain().sample_grid::<f64>(5);
        let p = &grid[pick % grid.len()];
        let big_n = imm.ambient_dim();
        let params = PinchParams::new(imm.dim(), Background::Euclidean).unwrap().with_sigma(sigma).unwrap();
        let scaled = Transformed { inner: imm, rotation: DMatrix::identity(big_n, big_n), scale: lambda, translation: vec![0.0; big_n] };
        let a = point_geometry(scaled.inner.as_ref(), p).unwrap();
        let b = point_geometry(&scaled, p).unwrap();
        let (fa, fb) = (f_sigma(&a, &params).unwrap(), f_sigma(&b, &params).unwrap());
        prop_assert!((fb - fa * lambda.powf(-2.0 * sigma)).abs() <= 1e-10 * (fa.abs() + 1e-12), "{fa} {fb}");
        let (qa, qb) = (pinch_q(&a, &params), pinch_q(&b, &params));
        prop_assert!((qb * lambda * lambda - qa).abs() <= 1e-10 * a.norms.h2);
    }

    #[test]
    fn f_sigma_rigid_invariant(pick in 0usize..500, seed in prop::collection::vec(-1.0f64..1.0, 16), shift in prop::collection::vec(-2.0f64..2.0, 4)) {
        let imm = zoo_make("perturbed_sphere", &ZooParams::new(), 5).unwrap().immersion;
        let grid = imm.domain().sample_grid::<f64>(5);
        let p = &grid[pick % grid.len()];
        let q = DMatrix::from_fn(4, 4, |i, j| seed[i * 4 + j] + if i == j { 0.5 } else { 0.0 }).qr().q();
        let params = PinchParams::new(2, Background::Euclidean).unwrap();
        let moved = Transformed { inner: imm, rotation: q, scale: 1.0, translation: shift };
        let fa = f_sigma(&point_geometry(moved.inner.as_ref(), p).unwrap(), &params).unwrap();
        let fb = f_sigma(&point_geometry(&moved, p).unwrap(), &params).unwrap();
        prop_assert!((fa - fb).abs() <= 1e-10 * (fa + 1e-12));
    }

    #[test]
    fn lp_norm_is_homogeneous(vals in prop::collection::vec(0.0f64..10.0, 1..40), c in 0.1f64..10.0, p in 2.0f64..20.0) {
        let w: Vec<f64> = (0..vals.len()).map(|i| 0.1 + i as f64 * 0.01).collect();
        let scaled: Vec<f64> = vals.iter().map(|v| v * c).collect();
        let (a, b) = (lp_norm(&vals, &w, p), lp_norm(&scaled, &w, p));
        prop_assert!((b - c * a).abs() <= 1e-10 * (c * a + 1e-300));
    }
}

#[test]
fn thresholds() {
    let t = pinch_threshold(2, Background::Euclidean).unwrap();
    assert_eq!(t.c, Ratio::new(2, 3));
    assert_eq!(t.beta, Ratio::from_integer(0));
    assert_eq!(pinch_threshold(4, Background::Euclidean).unwrap().c, Ratio::new(1, 3));
    let s = pinch_threshold(3, Background::Sphere(1.0)).unwrap();
    assert_eq!((s.c, s.beta), (Ratio::new(4, 9), Ratio::new(4, 3)));
    assert!(pinch_threshold(1, Background::Euclidean).is_err());
}

#[test]
fn umbilic_points_have_zero_f_sigma() {
    let params = PinchParams::new(2, Background::Euclidean).unwrap();
    let sphere = zoo_make("sphere", &ZooParams::new().set("r", 0.4), 0).unwrap();
    for p in sphere.immersion.domain().sample_grid::<f64>(3) {
        let pg = point_geometry(sphere.immersion.as_ref(), &p).unwrap();
        assert!(f_sigma(&pg, &params).unwrap() < 1e-20);
        assert!(pinch_q(&pg, &params) < 0.0);
    }
    let mesh = shapes::icosphere::<f64>(3, 1.0, 3);
    assert!(lp_norm_f_sigma(&mesh, &params, 16.0).unwrap() < 1e-4);
}

#[test]
fn clifford_torus_has_no_euclidean_f_sigma() {
    let params = PinchParams::new(2, Background::Euclidean).unwrap();
    let torus = zoo_make("clifford_torus", &ZooParams::new(), 0).unwrap();
    let p = &torus.immersion.domain().sample_grid::<f64>(3)[1];
    let pg = point_geometry(torus.immersion.as_ref(), p).unwrap();
    assert!(!pg.zero_mean_curvature);
    assert!(f_sigma(&pg, &params).unwrap() > 0.0);
}
