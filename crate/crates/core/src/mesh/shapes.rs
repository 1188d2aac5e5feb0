//! Mesh constructors: icospheres, torus grids and planar patches.

use std::collections::HashMap;

use super::{TopologyTag, TriMesh};
use crate::scalar::{lit, Real};

/// Unit icosphere vertices and outward-oriented faces.
pub fn icosphere_points(subdivisions: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for v in vertices.iter_mut() {
        *v = normalize(*v);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Round sphere of radius `r` in the first three coordinates of `R^ambient`.
pub fn icosphere<T: Real>(subdivisions: usize, r: f64, ambient: usize) -> TriMesh<T> {
    assert!(ambient >= 3);
    sphere_mesh(subdivisions, |w| {
        let mut p = vec![0.0; ambient];
        p[..3].copy_from_slice(&[r * w[0], r * w[1], r * w[2]]);
        p
    })
}

/// Image of an icosphere under a map of the unit sphere.
pub fn sphere_mesh<T: Real>(subdivisions: usize, map: impl Fn([f64; 3]) -> Vec<f64>) -> TriMesh<T> {
    let (verts, faces) = icosphere_points(subdivisions);
    let pts: Vec<Vec<T>> = verts.iter().map(|&w| map(w).into_iter().map(lit).collect()).collect();
    TriMesh::new(&pts, faces, TopologyTag::Sphere)
}

/// Periodic `m1 × m2` grid over `[0, 2π)²` mapped by `map`.
pub fn torus_mesh<T: Real>(m1: usize, m2: usize, map: impl Fn(f64, f64) -> Vec<f64>) -> TriMesh<T> {
    let tau = std::f64::consts::TAU;
    let mut pts = Vec::with_capacity(m1 * m2);
    for i in 0..m1 {
        for j in 0..m2 {
            let (u, v) = (tau * i as f64 / m1 as f64, tau * j as f64 / m2 as f64);
            pts.push(map(u, v).into_iter().map(lit).collect::<Vec<T>>());
        }
    }
    let id = |i: usize, j: usize| (i % m1) * m2 + (j % m2);
    let mut faces = Vec::with_capacity(2 * m1 * m2);
    for i in 0..m1 {
        for j in 0..m2 {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(&pts, faces, TopologyTag::Torus)
}

/// Clifford-type torus `(a cos u, a sin u, a cos v, a sin v)` in `R⁴`.
pub fn clifford_torus_mesh<T: Real>(m1: usize, m2: usize, a: f64) -> TriMesh<T> {
    torus_mesh(m1, m2, |u, v| vec![a * u.cos(), a * u.sin(), a * v.cos(), a * v.sin()])
}

/// Open square patch `[-w, w]²` of the plane in `R^ambient` with `m` cells per side.
pub fn plane_patch<T: Real>(m: usize, half_width: f64, ambient: usize) -> TriMesh<T> {
    grid_patch(m, half_width, |x, y| {
        let mut p = vec![0.0; ambient];
        p[0] = x;
        p[1] = y;
        p
    })
}

/// Open square grid patch mapped by `map` (`m` cells per side).
pub fn grid_patch<T: Real>(m: usize, half_width: f64, map: impl Fn(f64, f64) -> Vec<f64>) -> TriMesh<T> {
    let k = m + 1;
    let h = 2.0 * half_width / m as f64;
    let mut pts = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            pts.push(
                map(-half_width + i as f64 * h, -half_width + j as f64 * h)
                    .into_iter()
                    .map(lit)
                    .collect::<Vec<T>>(),
            );
        }
    }
    let id = |i: usize, j: usize| i * k + j;
    let mut faces = Vec::with_capacity(2 * m * m);
    for i in 0..m {
        for j in 0..m {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(&pts, faces, TopologyTag::Open)
}
