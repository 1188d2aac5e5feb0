//! Analytic immersions used by the zoo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{cube_sphere_point, Domain};
use crate::immersion::Immersion;
use crate::jet::Jet;
use crate::scalar::{lit, Real};

fn pad<T: Real>(mut v: Vec<Jet<T>>, ambient: usize) -> Vec<Jet<T>> {
    v.resize(ambient, Jet::constant(T::zero()));
    v
}

/// Round sphere `S^n(r)` in the first `n + 1` coordinates of `R^ambient`.
#[derive(Clone, Debug)]
pub struct RoundSphere {
    pub n: usize,
    pub radius: f64,
    pub ambient: usize,
    domain: Domain,
}

impl RoundSphere {
    pub fn new(n: usize, radius: f64, ambient: usize) -> Self {
        assert!(ambient > n);
        RoundSphere {
            n,
            radius,
            ambient,
            domain: Domain::CubeSphere { dim: n },
        }
    }
}

impl<T: Real> Immersion<T> for RoundSphere {
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.ambient
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let r: T = lit(self.radius);
        let w = cube_sphere_point(self.n, chart, u);
        pad(w.into_iter().map(|x| x * r).collect(), self.ambient)
    }
}

/// Linear image `x ↦ A (a ⊙ x)` of the unit sphere `S^n`, where `a` holds
/// the `n + 1` semi-axes and `A` is an `ambient × (n + 1)` matrix with
/// orthonormal columns.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    pub axes: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    domain: Domain,
}

impl Ellipsoid {
    /// Axis-aligned ellipsoid in `R^{n+1}`.
    pub fn new(axes: Vec<f64>) -> Self {
        let m = axes.len();
        let frame = (0..m)
            .map(|a| (0..m).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::with_frame(axes, frame)
    }

    /// `frame[a]` is row `a` of `A`.
    pub fn with_frame(axes: Vec<f64>, frame: Vec<Vec<f64>>) -> Self {
        assert!(axes.len() >= 3);
        assert!(frame.iter().all(|row| row.len() == axes.len()));
        let n = axes.len() - 1;
        Ellipsoid {
            axes,
            frame,
            domain: Domain::CubeSphere { dim: n },
        }
    }

    /// The ellipsoid placed in `R^ambient` by a fixed generic rotation
    /// (a product of plane rotations through angles `0.3, 0.5, …`).
    pub fn tilted(axes: Vec<f64>, ambient: usize) -> Self {
        let m = axes.len();
        assert!(ambient >= m);
        let mut q: Vec<Vec<f64>> = (0..ambient)
            .map(|a| (0..ambient).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut angle = 0.3;
        for i in 0..ambient {
            for j in i + 1..ambient {
                let (c, s) = (f64::cos(angle), f64::sin(angle));
                for row in q.iter_mut() {
                    let (x, y) = (row[i], row[j]);
                    row[i] = c * x - s * y;
                    row[j] = s * x + c * y;
                }
                angle += 0.2;
            }
        }
        let frame = q.into_iter().map(|row| row[..m].to_vec()).collect();
        Self::with_frame(axes, frame)
    }
}

impl<T: Real> Immersion<T> for Ellipsoid {
    fn dim(&self) -> usize {
        self.axes.len() - 1
    }
    fn ambient_dim(&self) -> usize {
        self.frame.len()
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let w = cube_sphere_point(self.axes.len() - 1, chart, u);
        let scaled: Vec<Jet<T>> = w.iter().zip(&self.axes).map(|(x, &a)| *x * lit::<T>(a)).collect();
        self.frame
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&scaled)
                    .fold(Jet::constant(T::zero()), |acc, (&q, x)| acc + *x * lit::<T>(q))
            })
            .collect()
    }
}

/// `S^{p_1}(a_1) × … × S^{p_m}(a_m) ⊂ R^{Σ(p_i+1)}`.
#[derive(Clone, Debug)]
pub struct ProductSpheres {
    /// `(p_i, a_i)` per factor.
    pub factors: Vec<(usize, f64)>,
    domain: Domain,
}

impl ProductSpheres {
    pub fn new(factors: Vec<(usize, f64)>) -> Self {
        assert!(!factors.is_empty());
        let parts = factors
            .iter()
            .map(|&(p, _)| if p == 1 { Domain::Circle } else { Domain::CubeSphere { dim: p } })
            .collect();
        ProductSpheres {
            factors,
            domain: Domain::Product(parts),
        }
    }
}

impl<T: Real> Immersion<T> for ProductSpheres {
    fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.0).sum()
    }
    fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.0 + 1).sum()
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let charts = self.domain.split_chart(chart);
        let mut out = Vec::with_capacity(<Self as Immersion<T>>::ambient_dim(self));
        let mut offset = 0;
        for (&(p, a), &c) in self.factors.iter().zip(&charts) {
            let a: T = lit(a);
            let coords = &u[offset..offset + p];
            if p == 1 {
                out.push(coords[0].cos() * a);
                out.push(coords[0].sin() * a);
            } else {
                out.extend(cube_sphere_point(p, c, coords).into_iter().map(|x| x * a));
            }
            offset += p;
        }
        out
    }
}

/// Veronese surface: `S²(√3) → S⁴(1) ⊂ R⁵`,
/// `(x, y, z) ↦ (xy, xz, yz, (x² − y²)/2, (x² + y² − 2z²)/(2√3)) / √3`.
#[derive(Clone, Debug)]
pub struct Veronese {
    domain: Domain,
}

impl Default for Veronese {
    fn default() -> Self {
        Veronese {
            domain: Domain::CubeSphere { dim: 2 },
        }
    }
}

impl<T: Real> Immersion<T> for Veronese {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        5
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let s3: T = lit(3f64.sqrt());
        let w = cube_sphere_point(2, chart, u);
        let (x, y, z) = (w[0] * s3, w[1] * s3, w[2] * s3);
        let half: T = lit(0.5);
        let k = T::one() / s3;
        vec![
            x * y * k,
            x * z * k,
            y * z * k,
            (x * x - y * y) * (half * k),
            (x * x + y * y - z * z * lit::<T>(2.0)) * (half * k / s3),
        ]
    }
}

/// Degree-2 and degree-3 harmonic polynomials on `S²`.
fn harmonic_modes<T: Real>(w: &[Jet<T>]) -> [Jet<T>; 9] {
    let (x, y, z) = (w[0], w[1], w[2]);
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    [
        x * y,
        x * z,
        y * z,
        (x * x - y * y) * lit::<T>(0.5),
        (x * x + y * y - z * z * two) * lit::<T>(0.5 / 3f64.sqrt()),
        x * y * z,
        x * (x * x - y * y * three) * lit::<T>(0.5),
        y * (x * x * three - y * y) * lit::<T>(0.5),
        z * (z * z * lit::<T>(5.0) - three) * lit::<T>(0.5),
    ]
}

/// Star-shaped perturbation of `S²(1)` into `R⁴`:
/// `F(ω) = (1 + A Σ c_i Y_i(ω)) ω + A Σ d_i Y_i(ω) e₄`, with unit-norm
/// coefficient vectors `c`, `d` drawn from a seeded generator.
#[derive(Clone, Debug)]
pub struct PerturbedSphere {
    pub amplitude: f64,
    pub seed: u64,
    pub radial: Vec<f64>,
    pub lift: Vec<f64>,
    domain: Domain,
}

impl PerturbedSphere {
    pub fn new(amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = |len: usize| {
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
        };
        let radial = unit(9);
        let lift = unit(9);
        PerturbedSphere {
            amplitude,
            seed,
            radial,
            lift,
            domain: Domain::CubeSphere { dim: 2 },
        }
    }

    fn map_unit<T: Real>(&self, w: &[Jet<T>]) -> Vec<Jet<T>> {
        let modes = harmonic_modes(w);
        let a: T = lit(self.amplitude);
        let combine = |coef: &[f64]| {
            modes
                .iter()
                .zip(coef)
                .fold(Jet::constant(T::zero()), |acc, (m, &c)| acc + *m * lit::<T>(c))
        };
        let r = combine(&self.radial) * a + T::one();
        let q = combine(&self.lift) * a;
        vec![w[0] * r, w[1] * r, w[2] * r, q]
    }

    /// Position of the point above the unit vector `omega`.
    pub fn point(&self, omega: [f64; 3]) -> Vec<f64> {
        let w: Vec<Jet<f64>> = omega.iter().map(|&x| Jet::constant(x)).collect();
        self.map_unit(&w).into_iter().map(|j| j.value).collect()
    }
}

impl<T: Real> Immersion<T> for PerturbedSphere {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        self.map_unit(&cube_sphere_point(2, chart, u))
    }
}

/// One Fourier mode `c cos(m u + l v + φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    pub m: i32,
    pub l: i32,
    pub coefficient: f64,
    pub phase: f64,
}

/// Clifford-type torus in `R⁴` with radii modulated by Fourier series:
/// `F(u, v) = (a(u,v) cos u, a sin u, b(u,v) cos v, b sin v)`,
/// `a = r (1 + A f)`, `b = r (1 + A g)`, i.e. a normal graph over the flat torus.
#[derive(Clone, Debug)]
pub struct FourierGraphTorus {
    pub radius: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub first: Vec<FourierMode>,
    pub second: Vec<FourierMode>,
    domain: Domain,
}

impl FourierGraphTorus {
    pub fn new(radius: f64, amplitude: f64, modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |count: usize| {
            let mut out: Vec<FourierMode> = Vec::with_capacity(count);
            while out.len() < count {
                let m = rng.gen_range(-2..=2);
                let l = rng.gen_range(-2..=2);
                let coefficient = rng.gen_range(-1.0..1.0);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                if (m, l) != (0, 0) && !out.iter().any(|f| (f.m, f.l) == (m, l)) {
                    out.push(FourierMode { m, l, coefficient, phase });
                }
            }
            let norm: f64 = out.iter().map(|f| f.coefficient.abs()).sum();
            out.iter_mut().for_each(|f| f.coefficient /= norm);
            out
        };
        let first = draw(modes);
        let second = draw(modes);
        FourierGraphTorus {
            radius,
            amplitude,
            seed,
            first,
            second,
            domain: Domain::torus(),
        }
    }
}

impl<T: Real> Immersion<T> for FourierGraphTorus {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, _chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let series = |modes: &[FourierMode]| {
            modes.iter().fold(Jet::constant(T::zero()), |acc, f| {
                let arg = u[0] * lit::<T>(f.m as f64) + u[1] * lit::<T>(f.l as f64) + lit::<T>(f.phase);
                acc + arg.cos() * lit::<T>(f.coefficient)
            })
        };
        let r: T = lit(self.radius);
        let amp: T = lit(self.amplitude);
        let a = (series(&self.first) * amp + T::one()) * r;
        let b = (series(&self.second) * amp + T::one()) * r;
        vec![a * u[0].cos(), a * u[0].sin(), b * u[1].cos(), b * u[1].sin()]
    }
}
