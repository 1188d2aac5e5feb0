//! Time steps of the discrete flow on triangle meshes.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mesh::{conjugate_gradient, cotangent_laplacian, lumped_mass, mesh_geometry_all, CsrMatrix, TriMesh};
use crate::scalar::{lit, to_f64, Real};

/// Time discretization of the mesh flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `X ← X + dt M⁻¹ L X`.
    Explicit,
    /// `(M − dt L) X_next = M X` with the current weights.
    SemiImplicit,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::SemiImplicit => "semi-implicit",
        }
    }
}

/// Relative residual target for the linear solves.
pub const SOLVER_TOLERANCE: f64 = 1e-12;
pub const SOLVER_MAX_ITER: usize = 5000;

/// One step of the Euclidean flow.
pub fn mesh_step<T: Real>(state: &TriMesh<T>, dt: T, scheme: Scheme) -> Result<TriMesh<T>> {
    if dt < T::zero() {
        return Err(Error::BadParams(format!("negative time step {}", to_f64(dt))));
    }
    let lap = cotangent_laplacian(state)?;
    let mass = lumped_mass(state);
    let big_n = state.ambient;
    let nv = state.vertex_count();
    let next = match scheme {
        Scheme::Explicit => {
            let lx = lap.apply(state);
            let mut x = state.positions.clone();
            for i in 0..nv {
                for a in 0..big_n {
                    x[i * big_n + a] += dt * lx[i * big_n + a] / mass[i];
                }
            }
            x
        }
        Scheme::SemiImplicit => {
            let topo = &state.topology;
            let mut row_ptr = Vec::with_capacity(nv + 1);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            row_ptr.push(0);
            for i in 0..nv {
                let nbrs = &topo.neighbors[i];
                let ws = &lap.weights[i];
                let diag = mass[i] + dt * ws.iter().fold(T::zero(), |a, &b| a + b);
                let mut placed = false;
                for (&j, &w) in nbrs.iter().zip(ws) {
                    if !placed && j > i {
                        cols.push(i);
                        vals.push(diag);
                        placed = true;
                    }
                    cols.push(j);
                    vals.push(-dt * w);
                }
                if !placed {
                    cols.push(i);
                    vals.push(diag);
                }
                row_ptr.push(cols.len());
            }
            let a = CsrMatrix { row_ptr, cols, vals };
            let mut x = state.positions.clone();
            let tol: T = lit(SOLVER_TOLERANCE);
            for c in 0..big_n {
                let coord: Vec<T> = (0..nv).map(|i| state.positions[i * big_n + c]).collect();
                let rhs: Vec<T> = coord.iter().zip(&mass).map(|(&xi, &m)| xi * m).collect();
                let sol = conjugate_gradient(&a, &rhs, &coord, tol, SOLVER_MAX_ITER)?;
                for i in 0..nv {
                    x[i * big_n + c] = sol[i];
                }
            }
            x
        }
    };
    let out = state.with_positions(next, state.time + dt);
    out.check_faces()?;
    Ok(out)
}

/// Result of a step in the spherical background.
#[derive(Clone, Debug)]
pub struct SphericalStep<T: Real> {
    pub state: TriMesh<T>,
    /// Largest distance moved by the final projection onto the sphere.
    pub renormalization: T,
}

/// Largest relative deviation of `|x|` from `1/√K̄` over the vertices.
pub fn sphere_deviation<T: Real>(state: &TriMesh<T>, k_bar: T) -> T {
    let radius = T::one() / k_bar.sqrt();
    (0..state.vertex_count())
        .map(|i| {
            let r = state.vertex(i).iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
            ((r - radius) / radius).abs()
        })
        .fold(T::zero(), T::max)
}

/// One step of the flow in the sphere `|x| = 1/√K̄`: the Euclidean
/// displacement is projected onto the tangent space of the sphere at each
/// vertex, and the result is pulled back onto the sphere.
pub fn spherical_mesh_step<T: Real>(state: &TriMesh<T>, dt: T, k_bar: T, scheme: Scheme) -> Result<SphericalStep<T>> {
    if !(k_bar > T::zero()) {
        return Err(Error::DomainError(format!("K̄ must be positive, got {}", to_f64(k_bar))));
    }
    let dev = sphere_deviation(state, k_bar);
    if !(dev <= lit(1e-8)) {
        let radius = T::one() / k_bar.sqrt();
        let vertex = (0..state.vertex_count())
            .find(|&i| {
                let r = state.vertex(i).iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
                !(((r - radius) / radius).abs() <= lit(1e-8))
            })
            .unwrap_or(0);
        return Err(Error::OffSphere { vertex, error: to_f64(dev) });
    }
    let euclid = mesh_step(state, dt, scheme)?;
    let (positions, renormalization) = project_to_sphere(state, &euclid.positions, k_bar);
    let out = state.with_positions(positions, state.time + dt);
    out.check_faces()?;
    Ok(SphericalStep { state: out, renormalization })
}

/// Tangential part of `target − x` at each vertex, then radial projection.
fn project_to_sphere<T: Real>(state: &TriMesh<T>, target: &[T], k_bar: T) -> (Vec<T>, T) {
    let big_n = state.ambient;
    let radius = T::one() / k_bar.sqrt();
    let mut out = Vec::with_capacity(target.len());
    let mut worst = T::zero();
    for i in 0..state.vertex_count() {
        let x = DVector::from_column_slice(state.vertex(i));
        let y = DVector::from_column_slice(&target[i * big_n..(i + 1) * big_n]);
        let d = &y - &x;
        let radial = d.dot(&x) / x.norm_squared();
        let moved = &x + (&d - &x * radial);
        let back = &moved * (radius / moved.norm());
        worst = worst.max((&back - &moved).norm());
        out.extend(back.iter().copied());
    }
    (out, worst)
}

/// Moves each vertex by `weight ×` the tangential part of its uniform
/// umbrella vector `mean(neighbours) − x`. The tangent plane is the top
/// two principal directions of the one-ring offsets.
pub fn deturck_regularize<T: Real>(state: &TriMesh<T>, weight: T) -> TriMesh<T> {
    let big_n = state.ambient;
    let mut positions = state.positions.clone();
    for i in 0..state.vertex_count() {
        let (tangent, _) = one_ring_plane(state, i);
        let nbrs = &state.topology.neighbors[i];
        let x = DVector::from_column_slice(state.vertex(i));
        let mut mean = DVector::<T>::zeros(big_n);
        for &j in nbrs {
            mean += DVector::from_column_slice(state.vertex(j));
        }
        let umbrella = mean / lit::<T>(nbrs.len() as f64) - &x;
        let mut mv = DVector::<T>::zeros(big_n);
        for e in &tangent {
            mv.axpy(e.dot(&umbrella), e, T::one());
        }
        for a in 0..big_n {
            positions[i * big_n + a] += weight * mv[a];
        }
    }
    state.with_positions(positions, state.time)
}

/// [`deturck_regularize`] followed by radial projection onto the sphere `|x| = 1/√K̄`.
pub fn deturck_regularize_spherical<T: Real>(state: &TriMesh<T>, weight: T, k_bar: T) -> TriMesh<T> {
    let moved = deturck_regularize(state, weight);
    let radius = T::one() / k_bar.sqrt();
    let big_n = state.ambient;
    let mut positions = moved.positions;
    for chunk in positions.chunks_mut(big_n) {
        let r = chunk.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        chunk.iter_mut().for_each(|x| *x *= radius / r);
    }
    state.with_positions(positions, state.time)
}

/// Orthonormal tangent pair and normal complement from one-ring offsets.
pub(crate) fn one_ring_plane<T: Real>(state: &TriMesh<T>, vertex: usize) -> (Vec<DVector<T>>, Vec<DVector<T>>) {
    let big_n = state.ambient;
    let x = DVector::from_column_slice(state.vertex(vertex));
    let mut cov = nalgebra::DMatrix::<T>::zeros(big_n, big_n);
    for &j in &state.topology.neighbors[vertex] {
        let d = DVector::from_column_slice(state.vertex(j)) - &x;
        cov.ger(T::one(), &d, &d, T::one());
    }
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..big_n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let vecs: Vec<DVector<T>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (vecs[..2].to_vec(), vecs[2..].to_vec())
}

pub const DEFAULT_CFL: f64 = 0.1;
pub const DEFAULT_DT_FLOOR: f64 = 1e-8;

/// `dt = cfl / max(max|h|², floor)`.
pub fn adaptive_dt_from(max_h2: f64, cfl: f64, floor: f64) -> f64 {
    cfl / max_h2.max(floor)
}

/// [`adaptive_dt_from`] with `max|h|²` from the quadratic-fit curvature.
pub fn adaptive_dt(state: &TriMesh<f64>, cfl: f64, floor: f64) -> Result<f64> {
    Ok(adaptive_dt_from(max_h2(state)?, cfl, floor))
}

/// Largest fitted `|h|²` over the vertices.
pub fn max_h2(state: &TriMesh<f64>) -> Result<f64> {
    let all = mesh_geometry_all(state, crate::mesh::DEFAULT_RING_DEPTH)?;
    Ok(all.iter().map(|pg| pg.norms.h2).fold(0.0, f64::max))
}
