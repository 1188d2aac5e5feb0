//! Per-vertex curvature by local quadratic fitting.
//!
//! Around each vertex the tangent plane is taken from the area-weighted
//! covariance of the neighbouring vertex offsets. Every normal coordinate is
//! then fitted as a quadratic polynomial of the two tangent coordinates and
//! the resulting graph chart is handed to the analytic geometry kernel.

use nalgebra::{DMatrix, DVector};

use super::{lumped_mass, TriMesh};
use crate::error::{Error, Result};
use crate::immersion::{ChartJet, PointGeometry};
use crate::scalar::{lit, to_f64, Real};

pub const DEFAULT_RING_DEPTH: usize = 2;
/// Largest admissible condition number of the fit's normal equations.
pub const MAX_FIT_CONDITION: f64 = 1e10;
/// Total degree of the local polynomial fit.
pub const FIT_DEGREE: usize = 4;
/// Row weights `exp(−decay · d²)` in the scaled tangent distance `d`.
pub const FIT_WEIGHT_DECAY: f64 = 0.5;

/// Exponents `(a, b)` with `a + b ≤ degree`, ordered by total degree.
fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|d| (0..=d).rev().map(move |a| (a, d - a))).collect()
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// Orthonormal tangent basis (2 vectors) and normal basis (`N − 2` vectors)
/// at `vertex`, from the weighted covariance of offsets within `ring_depth`.
pub fn vertex_tangent_plane<T: Real>(
    mesh: &TriMesh<T>,
    mass: &[T],
    vertex: usize,
    ring_depth: usize,
) -> Result<(Vec<DVector<T>>, Vec<DVector<T>>)> {
    let ring = mesh.topology.ring(vertex, ring_depth);
    if ring.len() < 2 {
        return Err(Error::InsufficientNeighbors { vertex, found: ring.len() });
    }
    Ok(plane_from_ring(mesh, mass, vertex, &ring))
}

fn plane_from_ring<T: Real>(
    mesh: &TriMesh<T>,
    mass: &[T],
    vertex: usize,
    ring: &[usize],
) -> (Vec<DVector<T>>, Vec<DVector<T>>) {
    let big_n = mesh.ambient;
    let p = DVector::from_column_slice(mesh.vertex(vertex));
    let mut cov = DMatrix::<T>::zeros(big_n, big_n);
    for &j in ring {
        let d = DVector::from_column_slice(mesh.vertex(j)) - &p;
        cov.ger(mass[j], &d, &d, T::one());
    }
    let eig = cov.clone().symmetric_eigen();
    // rank by Rayleigh quotient; the eigenvalue order is unreliable for nearly diagonal input
    let mut ranked: Vec<(T, DVector<T>)> = eig
        .eigenvectors
        .column_iter()
        .map(|c| {
            let v = c.into_owned();
            (v.dot(&(&cov * &v)), v)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let vecs: Vec<DVector<T>> = ranked.into_iter().map(|(_, v)| v).collect();
    (vecs[..2].to_vec(), vecs[2..].to_vec())
}

/// Extrinsic geometry at `vertex` of a surface mesh (`n = 2`).
pub fn mesh_point_geometry<T: Real>(mesh: &TriMesh<T>, vertex: usize, ring_depth: usize) -> Result<PointGeometry<T>> {
    let mass = lumped_mass(mesh);
    fit_vertex(mesh, &mass, vertex, ring_depth)
}

/// [`mesh_point_geometry`] for every vertex, sharing the mass computation.
pub fn mesh_geometry_all<T: Real>(mesh: &TriMesh<T>, ring_depth: usize) -> Result<Vec<PointGeometry<T>>> {
    let mass = lumped_mass(mesh);
    (0..mesh.vertex_count())
        .map(|v| fit_vertex(mesh, &mass, v, ring_depth))
        .collect()
}

pub(crate) fn fit_vertex<T: Real>(
    mesh: &TriMesh<T>,
    mass: &[T],
    vertex: usize,
    ring_depth: usize,
) -> Result<PointGeometry<T>> {
    let ring = mesh.topology.ring(vertex, ring_depth);
    if ring.len() < 5 {
        return Err(Error::InsufficientNeighbors { vertex, found: ring.len() });
    }
    let (tangent, normal) = plane_from_ring(mesh, mass, vertex, &ring);
    let p = DVector::from_column_slice(mesh.vertex(vertex));
    let offsets: Vec<DVector<T>> = ring
        .iter()
        .map(|&j| DVector::from_column_slice(mesh.vertex(j)) - &p)
        .collect();
    let scale = offsets.iter().fold(T::zero(), |a, d| a + d.norm()) / lit(offsets.len() as f64);

    // local graph coordinates of the ring points lying over the tangent plane
    let project = |ring: &[usize]| {
        let mut local = Vec::new();
        let mut heights = Vec::new();
        for &j in ring {
            let d = DVector::from_column_slice(mesh.vertex(j)) - &p;
            let (s, t) = (tangent[0].dot(&d) / scale, tangent[1].dot(&d) / scale);
            let z: Vec<T> = normal.iter().map(|nu| nu.dot(&d) / scale).collect();
            let z2 = z.iter().fold(T::zero(), |a, &x| a + x * x);
            if z2 * lit::<T>(4.0) < s * s + t * t {
                local.push((s, t));
                heights.push(z);
            }
        }
        (local, heights)
    };
    let enough = |local: &Vec<(T, T)>| local.len() + 1 >= monomial_exponents(FIT_DEGREE).len() + 3;
    let (local, heights) = project(&ring);
    let mut coeffs = None;
    if enough(&local) {
        coeffs = solve_jet(&local, &heights, vertex, FIT_DEGREE).ok();
    }
    if coeffs.is_none() {
        let (wide, wide_heights) = project(&mesh.topology.ring(vertex, ring_depth + 1));
        if enough(&wide) {
            coeffs = solve_jet(&wide, &wide_heights, vertex, FIT_DEGREE).ok();
        }
    }
    let coeffs = match coeffs {
        Some(c) => c,
        None => solve_jet(&local, &heights, vertex, 2)?,
    };

    // graph chart F(s, t) = p + scale (s e1 + t e2 + Σ z_α(s, t) ν_α) at the origin
    let big_n = mesh.ambient;
    let mut jacobian = DMatrix::<T>::zeros(big_n, 2);
    let mut hessian = vec![DVector::<T>::zeros(big_n); 4];
    for i in 0..2 {
        jacobian.set_column(i, &(&tangent[i] * scale));
    }
    for (a, nu) in normal.iter().enumerate() {
        let c = |m: usize| coeffs[(m, a)] * scale;
        let mut col0 = jacobian.column(0).into_owned();
        col0.axpy(c(1), nu, T::one());
        jacobian.set_column(0, &col0);
        let mut col1 = jacobian.column(1).into_owned();
        col1.axpy(c(2), nu, T::one());
        jacobian.set_column(1, &col1);
        hessian[0].axpy(c(3), nu, T::one());
        hessian[1].axpy(c(4), nu, T::one());
        hessian[2].axpy(c(4), nu, T::one());
        hessian[3].axpy(c(5), nu, T::one());
    }
    let jet = ChartJet { position: p, jacobian, hessian };
    PointGeometry::from_jet(&jet)
}

/// Weighted least-squares Taylor coefficients up to `degree`; row `m` of the
/// result holds `(1, s, t, s², st, t²)[m]` derivatives for each normal.
fn solve_jet<T: Real>(local: &[(T, T)], heights: &[Vec<T>], vertex: usize, degree: usize) -> Result<DMatrix<T>> {
    let monomials = monomial_exponents(degree);
    let rows = local.len() + 1;
    let k = heights.first().map_or(0, Vec::len);
    let mut design = DMatrix::<T>::zeros(rows, monomials.len());
    let mut rhs = DMatrix::<T>::zeros(rows, k);
    // row 0 is the vertex itself
    design[(0, 0)] = T::one();
    for (r, (&(s, t), z)) in local.iter().zip(heights).enumerate() {
        let w = (-(s * s + t * t) * lit::<T>(FIT_WEIGHT_DECAY)).exp();
        for (c, &(a, b)) in monomials.iter().enumerate() {
            design[(r + 1, c)] = w * s.powi(a as i32) * t.powi(b as i32) / lit((factorial(a) * factorial(b)) as f64);
        }
        for (a, &h) in z.iter().enumerate() {
            rhs[(r + 1, a)] = w * h;
        }
    }
    let normal_matrix = design.tr_mul(&design);
    let eigenvalues = normal_matrix.clone().symmetric_eigenvalues();
    let emax = eigenvalues.iter().copied().fold(T::zero(), T::max);
    let emin = eigenvalues.iter().copied().fold(emax, T::min);
    let condition = if emin > T::zero() { emax / emin } else { T::max_value().unwrap_or(emax) };
    if !(condition <= lit(MAX_FIT_CONDITION)) {
        return Err(Error::IllConditionedFit { vertex, condition: to_f64(condition) });
    }
    let full = normal_matrix
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("normal equations not positive definite".into()))?
        .solve(&design.tr_mul(&rhs));
    let mut out = DMatrix::<T>::zeros(6, k);
    for (m, &(a, b)) in monomial_exponents(2).iter().enumerate() {
        let c = monomials.iter().position(|&e| e == (a, b)).expect("monomial present");
        out.set_row(m, &full.row(c));
    }
    Ok(out)
}
