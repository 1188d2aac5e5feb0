use hicoflow::domain::ChartPoint;
use hicoflow::immersion::{point_geometry, FrameCompletion, Immersion, PointGeometry, Transformed};
use hicoflow::reaction::reaction_terms;
use hicoflow::zoo::{zoo_make, ZooParams, ZOO_NAMES};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn entry(idx: usize) -> hicoflow::zoo::ZooEntry {
    zoo_make(ZOO_NAMES[idx % ZOO_NAMES.len()], &ZooParams::new(), 7).unwrap()
}

fn sample(imm: &dyn Immersion<f64>, pick: usize) -> ChartPoint<f64> {
    let grid = imm.domain().sample_grid::<f64>(6);
    grid[pick % grid.len()].clone()
}

fn rotation(n: usize, seed: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()] + if i == j { 0.5 } else { 0.0 });
    a.qr().q()
}

fn scalars(pg: &PointGeometry<f64>) -> Vec<f64> {
    let r = reaction_terms(pg);
    vec![
        pg.norms.h2,
        pg.norms.mean2,
        pg.norms.traceless2,
        pg.norms.normal_curvature2,
        r.r1,
        r.r2,
        r.z,
        pg.metric.determinant(),
    ]
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rigid_motion_leaves_scalars_unchanged(
        idx in 0usize..7,
        pick in 0usize..1000,
        seed in prop::collection::vec(-1.0f64..1.0, 25),
        shift in prop::collection::vec(-3.0f64..3.0, 5),
    ) {
        let e = entry(idx);
        let p = sample(e.immersion.as_ref(), pick);
        let big_n = e.immersion.ambient_dim();
        let moved = Transformed {
            inner: e.immersion,
            rotation: rotation(big_n, &seed),
            scale: 1.0,
            translation: shift[..big_n].to_vec(),
        };
        let a = scalars(&point_geometry(moved.inner.as_ref(), &p).unwrap());
        let b = scalars(&point_geometry(&moved, &p).unwrap());
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(close(*x, *y, scale, 1e-10), "{x} vs {y}");
        }
    }

    #[test]
    fn scaling_covariance(idx in 0usize..7, pick in 0usize..1000, psi in 0.2f64..5.0) {
        let e = entry(idx);
        let p = sample(e.immersion.as_ref(), pick);
        let big_n = e.immersion.ambient_dim();
        let scaled = Transformed {
            inner: e.immersion,
            rotation: DMatrix::identity(big_n, big_n),
            scale: psi,
            translation: vec![0.0; big_n],
        };
        let a = point_geometry(scaled.inner.as_ref(), &p).unwrap();
        let b = point_geometry(&scaled, &p).unwrap();
        prop_assert!(close(b.norms.h2 * psi * psi, a.norms.h2, a.norms.h2, 1e-12));
        prop_assert!(close(b.norms.mean2 * psi * psi, a.norms.mean2, a.norms.h2, 1e-12));
        let g = &a.metric * (psi * psi);
        prop_assert!((&b.metric - &g).amax() <= 1e-12 * g.amax());
    }

    #[test]
    fn norm_decomposition(idx in 0usize..7, pick in 0usize..1000) {
        let e = entry(idx);
        let p = sample(e.immersion.as_ref(), pick);
        let pg = point_geometry(e.immersion.as_ref(), &p).unwrap();
        let lhs = pg.norms.h2;
        let rhs = pg.norms.traceless2 + pg.norms.mean2 / pg.n as f64;
        prop_assert!(close(lhs, rhs, lhs, 1e-12), "{lhs} vs {rhs}");
        if let (Some(t1), Some(tm)) = (pg.norms.traceless1, pg.norms.traceless_minus) {
            prop_assert!(close(t1 + tm, pg.norms.traceless2, lhs, 1e-12));
        }
    }

    #[test]
    fn frame_completion_order_is_irrelevant(
        idx in 0usize..7,
        pick in 0usize..1000,
        order in Just((0usize..6).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let e = entry(idx);
        let p = sample(e.immersion.as_ref(), pick);
        let big_n = e.immersion.ambient_dim();
        let jet = hicoflow::immersion::chart_jet(e.immersion.as_ref(), &p);
        let order: Vec<usize> = order.into_iter().filter(|&a| a < big_n).collect();
        let a = scalars(&PointGeometry::from_jet_with(&jet, &FrameCompletion::Pivoted).unwrap());
        let b = scalars(&PointGeometry::from_jet_with(&jet, &FrameCompletion::Ordered(order)).unwrap());
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(close(*x, *y, scale, 1e-10), "{x} vs {y}");
        }
    }
}

#[test]
fn sphere_reaction_terms_closed_form() {
    for (n, r) in [(2usize, 0.7f64), (3, 1.3)] {
        let e = zoo_make("sphere", &ZooParams::new().set("n", n as f64).set("r", r), 0).unwrap();
        let p = sample(e.immersion.as_ref(), 3);
        let pg = point_geometry(e.immersion.as_ref(), &p).unwrap();
        let t = reaction_terms(&pg);
        let nf = n as f64;
        assert!((t.r1 - nf * nf / r.powi(4)).abs() < 1e-10 * t.r1);
        assert!((t.r2 - nf.powi(3) / r.powi(4)).abs() < 1e-10 * t.r2);
        assert!(t.z.abs() < 1e-10 * t.r1);
        assert_eq!(t.normal_curvature2, 0.0);
    }
}

#[test]
fn hypersurfaces_have_flat_normal_bundle() {
    let e = zoo_make("ellipsoid", &ZooParams::new(), 0).unwrap();
    if e.immersion.codim() == 1 {
        for p in e.immersion.domain().sample_grid::<f64>(4) {
            let pg = point_geometry(e.immersion.as_ref(), &p).unwrap();
            assert!(reaction_terms(&pg).normal_curvature2.abs() < 1e-12);
        }
    }
}

#[test]
fn product_ratio_matches_closed_form() {
    let params = ZooParams::new().set("p1", 2.0).set("a1", 0.1).set("p2", 1.0).set("a2", 1.0);
    let e = zoo_make("product_spheres", &params, 0).unwrap();
    let pg = point_geometry(e.immersion.as_ref(), &sample(e.immersion.as_ref(), 5)).unwrap();
    assert!((pg.norms.h2 - 201.0).abs() < 1e-9);
    assert!((pg.norms.mean2 - 401.0).abs() < 1e-9);
    let (n, eps) = (3.0f64, 0.1f64);
    let ratio = (1.0 / (n - 1.0)) * (1.0 + eps * eps * (n - 2.0) / ((n - 1.0).powi(2) + eps * eps));
    assert!((pg.norms.h2 / pg.norms.mean2 - ratio).abs() < 1e-12);
}

#[test]
fn veronese_shape_ratio() {
    let e = zoo_make("veronese", &ZooParams::new(), 0).unwrap();
    for p in e.immersion.domain().sample_grid::<f64>(5) {
        let pg = point_geometry(e.immersion.as_ref(), &p).unwrap();
        assert!((pg.norms.h2 / pg.norms.mean2 - 5.0 / 6.0).abs() < 1e-6);
    }
}

#[test]
fn mesh_fit_converges_under_refinement() {
    use hicoflow::mesh::{mesh_geometry_all, shapes, DEFAULT_RING_DEPTH};
    let worst = |m: &hicoflow::mesh::TriMesh<f64>, mean2: f64, h2: f64| {
        mesh_geometry_all(m, DEFAULT_RING_DEPTH)
            .unwrap()
            .iter()
            .map(|pg| ((pg.norms.mean2 - mean2).abs() / mean2).max((pg.norms.h2 - h2).abs() / h2))
            .fold(0.0, f64::max)
    };
    let s = [2, 3].map(|l| worst(&shapes::icosphere(l, 1.0, 3), 4.0, 2.0));
    assert!(s[1] < 0.5 * s[0], "sphere {s:?}");
    let c = [8, 16].map(|m| worst(&shapes::clifford_torus_mesh(m, m, std::f64::consts::FRAC_1_SQRT_2), 4.0, 4.0));
    assert!(c[1] < 0.5 * c[0] || c[1] < 1e-10, "clifford {c:?}");
}
