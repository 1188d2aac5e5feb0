use hicoflow::identity::{verify, IdentityKind};
use hicoflow::immersion::{Immersion, Transformed};
use hicoflow::zoo::{zoo_make, ZooParams};
use nalgebra::DMatrix;

fn check_all(imm: &dyn Immersion<f64>, label: &str) {
    for kind in IdentityKind::ALL {
        let r = verify::<f64, _>(imm, kind, 128).unwrap();
        assert!(r.pass, "{label}: {r}");
    }
}

#[test]
fn veronese_satisfies_all_identities() {
    let e = zoo_make("veronese", &ZooParams::new(), 0).unwrap();
    check_all(e.immersion.as_ref(), "veronese");
}

#[test]
fn products_satisfy_all_identities() {
    for (p1, a1, p2, a2) in [(1.0, 1.0, 1.0, 1.0), (2.0, 0.3, 1.0, 1.0), (1.0, 0.5, 2.0, 2.0)] {
        let params = ZooParams::new().set("p1", p1).set("a1", a1).set("p2", p2).set("a2", a2);
        let e = zoo_make("product_spheres", &params, 0).unwrap();
        check_all(e.immersion.as_ref(), &format!("S^{p1}({a1}) x S^{p2}({a2})"));
    }
}

#[test]
fn identities_survive_rigid_motion() {
    let e = zoo_make("fourier_graph_torus", &ZooParams::new(), 4).unwrap();
    let big_n = e.immersion.ambient_dim();
    let q = DMatrix::from_fn(big_n, big_n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 3.0 } else { 0.0 });
    let moved = Transformed { inner: e.immersion, rotation: q.qr().q(), scale: 1.7, translation: vec![0.3; big_n] };
    check_all(&moved, "moved fourier torus");
}

#[test]
fn coarse_grid_fails_gauss_on_ellipsoid() {
    let e = zoo_make("ellipsoid", &ZooParams::new(), 0).unwrap();
    assert!(!verify::<f64, _>(e.immersion.as_ref(), IdentityKind::Gauss, 4).unwrap().pass);
}
