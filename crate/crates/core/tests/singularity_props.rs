use hicoflow::mesh::{shapes, TriMesh};
use hicoflow::singularity::{estimate_singular_time_from, gaussian_density, shrinker_residual, DensityProbe};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn transform(m: &TriMesh<f64>, q: &DMatrix<f64>, scale: f64, shift: &[f64], time: f64) -> TriMesh<f64> {
    let big_n = m.ambient;
    let mut out = Vec::with_capacity(m.positions.len());
    for v in 0..m.vertex_count() {
        let x = m.vertex(v);
        for a in 0..big_n {
            let rotated: f64 = (0..big_n).map(|b| q[(a, b)] * x[b]).sum();
            out.push(scale * rotated + shift[a]);
        }
    }
    m.with_positions(out, time)
}

fn rotation(seed: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| seed[i * 3 + j] + if i == j { 0.5 } else { 0.0 }).qr().q()
}

fn ellipsoid_mesh() -> TriMesh<f64> {
    let base = shapes::icosphere::<f64>(3, 1.0, 3);
    let pts: Vec<f64> = base.positions.chunks(3).flat_map(|p| [p[0], 0.8 * p[1], 1.3 * p[2]]).collect();
    base.with_positions(pts, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn density_is_parabolically_invariant(
        lambda in 0.3f64..4.0,
        x0 in prop::collection::vec(-0.5f64..0.5, 3),
        tau in 0.05f64..2.0,
        t in -0.5f64..0.5,
    ) {
        let mut m = ellipsoid_mesh();
        m.time = t;
        let a = gaussian_density(&m, &DensityProbe::new(x0.clone(), t + tau)).unwrap().theta;
        let shift: Vec<f64> = x0.iter().map(|c| -lambda * c).collect();
        let r = transform(&m, &DMatrix::identity(3, 3), lambda, &shift, -lambda * lambda * tau);
        let b = gaussian_density(&r, &DensityProbe::new(vec![0.0; 3], 0.0)).unwrap().theta;
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn shrinker_residual_invariances(seed in prop::collection::vec(-1.0f64..1.0, 9), mu in 0.3f64..3.0, s in -2.0f64..-0.2) {
        let m = ellipsoid_mesh();
        let base = shrinker_residual(&m, s).unwrap();
        let rotated = transform(&m, &rotation(&seed), 1.0, &[0.0; 3], 0.0);
        prop_assert!((shrinker_residual(&rotated, s).unwrap() - base).abs() <= 1e-10 * base.max(1.0));
        let scaled = transform(&m, &DMatrix::identity(3, 3), mu, &[0.0; 3], 0.0);
        prop_assert!((shrinker_residual(&scaled, s * mu * mu).unwrap() - base).abs() <= 1e-10 * base.max(1.0));
    }

    #[test]
    fn singular_time_of_exact_sphere_radii(r0 in 0.2f64..3.0, samples in 12usize..80, stop in 0.95f64..0.999) {
        let t_exact = r0 * r0 / 4.0;
        let series: Vec<(f64, f64)> = (0..samples)
            .map(|i| {
                let t = stop * t_exact * i as f64 / (samples - 1) as f64;
                (t, 2.0 / (r0 * r0 - 4.0 * t))
            })
            .collect();
        let est = estimate_singular_time_from(&series).unwrap();
        prop_assert!((est.t_sing - t_exact).abs() <= 1e-9 * t_exact);
        prop_assert!(est.fit_residual < 1e-9);
    }
}

#[test]
fn distant_probe_sees_nothing() {
    let m = shapes::icosphere::<f64>(2, 1.0, 3);
    let theta = gaussian_density(&m, &DensityProbe::new(vec![10.0, 0.0, 0.0], 0.25)).unwrap().theta;
    assert!(theta < 1e-10);
}

#[test]
fn static_plane_has_no_shrinker_residual_denominator() {
    let m = shapes::plane_patch::<f64>(8, 1.0, 3);
    assert!(shrinker_residual(&m, -1.0).is_err());
}
