//! Built-in immersions with known curvature values.

mod surfaces;

pub use surfaces::{
    Ellipsoid, FourierGraphTorus, FourierMode, PerturbedSphere, ProductSpheres, RoundSphere, Veronese,
};

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{cube_sphere_chart, ChartPoint};
use crate::error::{Error, Result};
use crate::immersion::{point_geometry, Immersion};
use crate::mesh::{shapes, TriMesh};

/// Names accepted by [`zoo_make`].
pub const ZOO_NAMES: [&str; 7] = [
    "sphere",
    "ellipsoid",
    "product_spheres",
    "clifford_torus",
    "veronese",
    "perturbed_sphere",
    "fourier_graph_torus",
];

/// Default amplitude of the perturbed sphere.
pub const PERTURBED_SPHERE_AMPLITUDE: f64 = 0.12;
/// Sample grid (cells per chart axis) used to certify the perturbed sphere.
pub const CERTIFY_GRID: usize = 12;

/// Where a known value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Stated in the literature for this example.
    Literature,
    /// Follows from a closed-form computation for this instance.
    Derived,
    /// Immediate from the definitions.
    Elementary,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Literature => "literature",
            Provenance::Derived => "derived",
            Provenance::Elementary => "elementary",
        }
    }
}

/// The quantity a known value refers to.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    /// `|h|²/|H|²` at every sample point.
    Ratio,
    /// `|h|²` at every sample point.
    H2,
    /// `|H|²` at every sample point.
    Mean2,
    /// `|H|²` at a single chart point.
    Mean2At(ChartPoint<f64>),
    /// Time of the first singularity of the flow in `R^N`.
    ExtinctionTime,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnownValue {
    pub label: &'static str,
    pub quantity: Quantity,
    pub value: f64,
    pub provenance: Provenance,
}

/// Named numeric parameters of a zoo entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZooParams(pub BTreeMap<String, f64>);

impl ZooParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::BadParams(format!("{key} must be positive, got {v}")))
        }
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self.get(key, default as f64);
        if v.fract() != 0.0 || v < min as f64 {
            return Err(Error::BadParams(format!("{key} must be an integer ≥ {min}, got {v}")));
        }
        Ok(v as usize)
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::BadParams(format!("unknown parameter {k}"))),
            None => Ok(()),
        }
    }
}

/// Parses `name` or `name:key=value,key=value`.
pub fn parse_surface(spec: &str) -> Result<(String, ZooParams)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    let mut params = ZooParams::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::BadParams(format!("expected key=value, got {item}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::BadParams(format!("bad number in {item}")))?;
        params = params.set(k.trim(), v);
    }
    Ok((name.to_string(), params))
}

/// How to build a triangle mesh of a surface entry.
enum MeshKind {
    None,
    /// Image of the unit icosphere under a map.
    Sphere(Box<dyn Fn([f64; 3]) -> Vec<f64> + Send + Sync>),
    /// Image of the periodic grid over `[0, 2π)²`.
    Torus(Box<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>),
}

pub struct ZooEntry {
    pub name: &'static str,
    pub params: ZooParams,
    pub immersion: Box<dyn Immersion<f64>>,
    pub known: Vec<KnownValue>,
    /// Radii of the product factors, for entries that are products of round spheres.
    pub product_factors: Option<Vec<(usize, f64)>>,
    mesh: MeshKind,
}

impl fmt::Debug for ZooEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZooEntry")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("known", &self.known)
            .finish()
    }
}

impl ZooEntry {
    pub fn has_mesh(&self) -> bool {
        !matches!(self.mesh, MeshKind::None)
    }

    /// Triangle mesh at refinement `level`: icosphere subdivisions for
    /// sphere-type surfaces, a `4·2^level` square grid for tori.
    pub fn mesh(&self, level: usize) -> Result<TriMesh<f64>> {
        match &self.mesh {
            MeshKind::None => Err(Error::Unsupported(format!("{} has no mesh factory", self.name))),
            MeshKind::Sphere(map) => Ok(shapes::sphere_mesh(level, map)),
            MeshKind::Torus(map) => {
                let m = 4 << level;
                Ok(shapes::torus_mesh(m, m, map))
            }
        }
    }

    /// Recomputes every point-evaluable known value with the geometry kernel,
    /// returning `(value, computed extreme deviation)` pairs.
    pub fn recompute_known(&self, grid: usize) -> Result<Vec<(KnownValue, f64)>> {
        let samples = self.immersion.domain().sample_grid::<f64>(grid);
        let mut out = Vec::new();
        for kv in &self.known {
            let computed = match &kv.quantity {
                Quantity::Ratio | Quantity::H2 | Quantity::Mean2 => {
                    let mut worst = kv.value;
                    for p in &samples {
                        let pg = point_geometry(self.immersion.as_ref(), p)?;
                        let v = match kv.quantity {
                            Quantity::Ratio => pg.norms.h2 / pg.norms.mean2,
                            Quantity::H2 => pg.norms.h2,
                            _ => pg.norms.mean2,
                        };
                        if (v - kv.value).abs() > (worst - kv.value).abs() {
                            worst = v;
                        }
                    }
                    worst
                }
                Quantity::Mean2At(p) => point_geometry(self.immersion.as_ref(), p)?.norms.mean2,
                Quantity::ExtinctionTime => match &self.product_factors {
                    Some(f) => crate::flow::ProductSphereState::new(f.clone(), 0.0)?.first_extinction().0,
                    None => continue,
                },
            };
            out.push((kv.clone(), computed));
        }
        Ok(out)
    }
}

fn known(label: &'static str, quantity: Quantity, value: f64, provenance: Provenance) -> KnownValue {
    KnownValue {
        label,
        quantity,
        value,
        provenance,
    }
}

fn product_known(factors: &[(usize, f64)]) -> Vec<KnownValue> {
    let h2: f64 = factors.iter().map(|&(p, a)| p as f64 / (a * a)).sum();
    let mean2: f64 = factors.iter().map(|&(p, a)| (p * p) as f64 / (a * a)).sum();
    let t = factors
        .iter()
        .map(|&(p, a)| a * a / (2.0 * p as f64))
        .fold(f64::INFINITY, f64::min);
    vec![
        known("|h|^2/|H|^2", Quantity::Ratio, h2 / mean2, Provenance::Literature),
        known("|h|^2", Quantity::H2, h2, Provenance::Derived),
        known("|H|^2", Quantity::Mean2, mean2, Provenance::Derived),
        known("first extinction time", Quantity::ExtinctionTime, t, Provenance::Derived),
    ]
}

/// Builds a zoo entry. `seed` fills in the `seed` parameter of randomized
/// entries when it is not given explicitly.
pub fn zoo_make(name: &str, params: &ZooParams, seed: u64) -> Result<ZooEntry> {
    let params = params.clone();
    let entry = match name {
        "sphere" => {
            params.reject_unknown(&["n", "r", "ambient"])?;
            let n = params.count("n", 2, 2)?;
            let r = params.positive("r", 1.0)?;
            let ambient = params.count("ambient", n + 1, n + 1)?;
            let nf = n as f64;
            let mesh = if n == 2 {
                MeshKind::Sphere(Box::new(move |w| {
                    let mut p = vec![0.0; ambient];
                    p[..3].copy_from_slice(&[r * w[0], r * w[1], r * w[2]]);
                    p
                }))
            } else {
                MeshKind::None
            };
            ZooEntry {
                name: "sphere",
                params,
                immersion: Box::new(RoundSphere::new(n, r, ambient)),
                known: vec![
                    known("|h|^2/|H|^2", Quantity::Ratio, 1.0 / nf, Provenance::Elementary),
                    known("|H|^2", Quantity::Mean2, nf * nf / (r * r), Provenance::Elementary),
                    known("extinction time", Quantity::ExtinctionTime, r * r / (2.0 * nf), Provenance::Derived),
                ],
                product_factors: Some(vec![(n, r)]),
                mesh,
            }
        }
        "ellipsoid" => {
            params.reject_unknown(&["a", "b", "c", "ambient"])?;
            let axes = vec![
                params.positive("a", 1.0)?,
                params.positive("b", 1.3)?,
                params.positive("c", 0.7)?,
            ];
            let ambient = params.count("ambient", 3, 3)?;
            let imm = if ambient == 3 {
                Ellipsoid::new(axes.clone())
            } else {
                Ellipsoid::tilted(axes.clone(), ambient)
            };
            let (a, b, c) = (axes[0], axes[1], axes[2]);
            // at the tip (a, 0, 0) the principal curvatures are a/b² and a/c²
            let tip_mean = a / (b * b) + a / (c * c);
            let frame = imm.frame.clone();
            ZooEntry {
                name: "ellipsoid",
                params,
                known: vec![known(
                    "|H|^2 at the tip of the first axis",
                    Quantity::Mean2At(cube_sphere_chart(&[1.0, 0.0, 0.0])),
                    tip_mean * tip_mean,
                    Provenance::Derived,
                )],
                immersion: Box::new(imm),
                product_factors: None,
                mesh: MeshKind::Sphere(Box::new(move |w| {
                    frame
                        .iter()
                        .map(|row| row[0] * a * w[0] + row[1] * b * w[1] + row[2] * c * w[2])
                        .collect()
                })),
            }
        }
        "product_spheres" | "clifford_torus" => {
            let factors = if name == "clifford_torus" {
                params.reject_unknown(&["a"])?;
                let a = params.positive("a", std::f64::consts::FRAC_1_SQRT_2)?;
                vec![(1, a), (1, a)]
            } else {
                params.reject_unknown(&["p1", "a1", "p2", "a2"])?;
                vec![
                    (params.count("p1", 2, 1)?, params.positive("a1", 0.1)?),
                    (params.count("p2", 1, 1)?, params.positive("a2", 1.0)?),
                ]
            };
            let total: usize = factors.iter().map(|f| f.0).sum();
            if total > crate::jet::MAX_VARS {
                return Err(Error::BadParams(format!("total dimension {total} exceeds {}", crate::jet::MAX_VARS)));
            }
            let mesh = if factors.iter().all(|f| f.0 == 1) {
                let (a, b) = (factors[0].1, factors[1].1);
                MeshKind::Torus(Box::new(move |u, v| vec![a * u.cos(), a * u.sin(), b * v.cos(), b * v.sin()]))
            } else {
                MeshKind::None
            };
            ZooEntry {
                name: if name == "clifford_torus" { "clifford_torus" } else { "product_spheres" },
                params,
                immersion: Box::new(ProductSpheres::new(factors.clone())),
                known: product_known(&factors),
                product_factors: Some(factors),
                mesh,
            }
        }
        "veronese" => {
            params.reject_unknown(&[])?;
            ZooEntry {
                name: "veronese",
                params,
                immersion: Box::new(Veronese::default()),
                known: vec![
                    known("|h|^2/|H|^2", Quantity::Ratio, 5.0 / 6.0, Provenance::Literature),
                    known("|H|^2", Quantity::Mean2, 4.0, Provenance::Derived),
                ],
                product_factors: None,
                mesh: MeshKind::None,
            }
        }
        "perturbed_sphere" => {
            params.reject_unknown(&["amplitude", "seed"])?;
            let amplitude = params.get("amplitude", PERTURBED_SPHERE_AMPLITUDE);
            if !(amplitude >= 0.0 && amplitude < 0.5) {
                return Err(Error::BadParams(format!("amplitude must lie in [0, 0.5), got {amplitude}")));
            }
            let seed = params.count("seed", seed as usize, 0)? as u64;
            let imm = PerturbedSphere::new(amplitude, seed);
            let worst = certify_pinched(&imm, 2.0 / 3.0, CERTIFY_GRID)?;
            if !(worst < 0.0) {
                return Err(Error::BadParams(format!(
                    "perturbation is not pinched: max(|h|^2 - 2/3 |H|^2) = {worst:.6e}"
                )));
            }
            let copy = imm.clone();
            ZooEntry {
                name: "perturbed_sphere",
                params,
                immersion: Box::new(imm),
                known: Vec::new(),
                product_factors: None,
                mesh: MeshKind::Sphere(Box::new(move |w| copy.point(w))),
            }
        }
        "fourier_graph_torus" => {
            params.reject_unknown(&["amplitude", "modes", "seed", "radius"])?;
            let amplitude = params.get("amplitude", 0.1);
            if !(amplitude.abs() < 0.5) {
                return Err(Error::BadParams(format!("amplitude must satisfy |A| < 0.5, got {amplitude}")));
            }
            let modes = params.count("modes", 3, 1)?;
            let radius = params.positive("radius", std::f64::consts::FRAC_1_SQRT_2)?;
            let seed = params.count("seed", seed as usize, 0)? as u64;
            let imm = FourierGraphTorus::new(radius, amplitude, modes, seed);
            let copy = imm.clone();
            ZooEntry {
                name: "fourier_graph_torus",
                params,
                immersion: Box::new(imm),
                known: Vec::new(),
                product_factors: None,
                mesh: MeshKind::Torus(Box::new(move |u, v| {
                    let p = crate::immersion::position(&copy, &ChartPoint::new(0, vec![u, v]));
                    p.iter().copied().collect()
                })),
            }
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    Ok(entry)
}

/// Largest value of `|h|² − c|H|²` over a sample grid.
pub fn certify_pinched<I: Immersion<f64> + ?Sized>(imm: &I, c: f64, grid: usize) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for p in imm.domain().sample_grid::<f64>(grid) {
        let pg = point_geometry(imm, &p)?;
        worst = worst.max(pg.norms.h2 - c * pg.norms.mean2);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values_match_kernels() {
        for name in ZOO_NAMES {
            let entry = zoo_make(name, &ZooParams::new(), 7).unwrap();
            for (kv, computed) in entry.recompute_known(6).unwrap() {
                let tol = 1e-9 * kv.value.abs().max(1.0);
                assert!(
                    (computed - kv.value).abs() < tol,
                    "{name}: {} expected {} got {computed}",
                    kv.label,
                    kv.value
                );
            }
        }
    }

    #[test]
    fn mesh_factories_produce_valid_meshes() {
        for name in ZOO_NAMES {
            let entry = zoo_make(name, &ZooParams::new(), 7).unwrap();
            if entry.has_mesh() {
                let m = entry.mesh(2).unwrap();
                m.validate().unwrap();
                assert_eq!(m.ambient, entry.immersion.ambient_dim());
            }
        }
    }

    #[test]
    fn unknown_names_and_parameters_rejected() {
        assert!(matches!(zoo_make("klein_bottle", &ZooParams::new(), 0), Err(Error::UnknownEntry(_))));
        let bad = ZooParams::new().set("r", -1.0);
        assert!(matches!(zoo_make("sphere", &bad, 0), Err(Error::BadParams(_))));
        let extra = ZooParams::new().set("q", 1.0);
        assert!(matches!(zoo_make("veronese", &extra, 0), Err(Error::BadParams(_))));
    }

    #[test]
    fn large_perturbation_fails_certification() {
        let p = ZooParams::new().set("amplitude", 0.45);
        assert!(matches!(zoo_make("perturbed_sphere", &p, 7), Err(Error::BadParams(_))));
    }

    #[test]
    fn surface_spec_parsing() {
        let (name, p) = parse_surface("product_spheres: a1=0.3, a2=1").unwrap();
        assert_eq!(name, "product_spheres");
        assert_eq!(p.get("a1", 0.0), 0.3);
        assert!(parse_surface("sphere:r").is_err());
    }
}
