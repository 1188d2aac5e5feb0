//! Triangle meshes immersed in `R^N`.

mod fit;
mod operators;
pub mod shapes;
mod sparse;

pub use fit::{mesh_geometry_all, mesh_point_geometry, vertex_tangent_plane, DEFAULT_RING_DEPTH};
pub use operators::{cotangent_laplacian, lumped_mass, mean_curvature_vectors, CotanLaplacian};
pub use sparse::{conjugate_gradient, CsrMatrix};

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, norm2, sub, to_f64, Real};

/// Coarse topological type of a mesh, carried for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyTag {
    Sphere,
    Torus,
    Open,
    Other,
}

impl TopologyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyTag::Sphere => "sphere",
            TopologyTag::Torus => "torus",
            TopologyTag::Open => "open",
            TopologyTag::Other => "other",
        }
    }
}

/// Connectivity shared by every state of a flow.
#[derive(Debug)]
pub struct Topology {
    pub faces: Vec<[usize; 3]>,
    /// Sorted one-ring neighbours per vertex.
    pub neighbors: Vec<Vec<usize>>,
    pub vertex_faces: Vec<Vec<usize>>,
    /// Undirected edges `(i, j)` with `i < j`, each with its incident faces.
    pub edges: BTreeMap<(usize, usize), Vec<usize>>,
    pub tag: TopologyTag,
}

impl Topology {
    pub fn new(vertex_count: usize, faces: Vec<[usize; 3]>, tag: TopologyTag) -> Self {
        let mut neighbors = vec![Vec::new(); vertex_count];
        let mut vertex_faces = vec![Vec::new(); vertex_count];
        let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for c in 0..3 {
                let (a, b) = (f[c], f[(c + 1) % 3]);
                vertex_faces[f[c]].push(fi);
                neighbors[a].push(b);
                neighbors[b].push(a);
                edges.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        Topology {
            faces,
            neighbors,
            vertex_faces,
            edges,
            tag,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Closed and consistently oriented: each edge borders two faces that
    /// traverse it in opposite directions.
    pub fn check_closed(&self) -> Result<()> {
        for (&(a, b), fs) in &self.edges {
            if fs.len() != 2 {
                return Err(Error::OpenMesh(format!("edge ({a}, {b}) borders {} faces", fs.len())));
            }
            let dir = |f: usize| {
                let t = self.faces[f];
                (0..3).any(|c| t[c] == a && t[(c + 1) % 3] == b)
            };
            if dir(fs[0]) == dir(fs[1]) {
                return Err(Error::OpenMesh(format!("inconsistent orientation across edge ({a}, {b})")));
            }
        }
        Ok(())
    }

    /// Vertices within `depth` edge hops of `v`, excluding `v`, in BFS order.
    pub fn ring(&self, v: usize, depth: usize) -> Vec<usize> {
        let mut seen = vec![v];
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(v, 0usize)]);
        while let Some((u, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for &w in &self.neighbors[u] {
                if !seen.contains(&w) {
                    seen.push(w);
                    out.push(w);
                    queue.push_back((w, d + 1));
                }
            }
        }
        out
    }
}

/// Triangle-mesh snapshot of a surface in `R^N`.
#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    /// Flat vertex coordinates, `ambient` entries per vertex.
    pub positions: Vec<T>,
    pub ambient: usize,
    pub topology: Arc<Topology>,
    pub time: T,
}

/// Relative area threshold for degenerate faces.
pub const DEGENERATE_AREA: f64 = 1e-14;

impl<T: Real> TriMesh<T> {
    pub fn new(points: &[Vec<T>], faces: Vec<[usize; 3]>, tag: TopologyTag) -> Self {
        let ambient = points.first().map_or(0, Vec::len);
        assert!(points.iter().all(|p| p.len() == ambient), "ragged vertex array");
        let positions = points.iter().flatten().copied().collect();
        TriMesh {
            positions,
            ambient,
            topology: Arc::new(Topology::new(points.len(), faces, tag)),
            time: T::zero(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.topology.vertex_count()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.topology.faces
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> &[T] {
        &self.positions[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn vertex_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.positions[i * self.ambient..(i + 1) * self.ambient]
    }

    /// Same connectivity, new coordinates and time.
    pub fn with_positions(&self, positions: Vec<T>, time: T) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        TriMesh {
            positions,
            ambient: self.ambient,
            topology: Arc::clone(&self.topology),
            time,
        }
    }

    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.topology.faces[f];
        triangle_area(self.vertex(a), self.vertex(b), self.vertex(c))
    }

    pub fn face_areas(&self) -> Vec<T> {
        (0..self.topology.faces.len()).map(|f| self.face_area(f)).collect()
    }

    pub fn area(&self) -> T {
        self.face_areas().into_iter().fold(T::zero(), |a, b| a + b)
    }

    pub fn edge_length(&self, a: usize, b: usize) -> T {
        norm2(&sub(self.vertex(a), self.vertex(b))).sqrt()
    }

    pub fn mean_edge_length(&self) -> T {
        let edges = &self.topology.edges;
        let total = edges.keys().fold(T::zero(), |acc, &(a, b)| acc + self.edge_length(a, b));
        total / lit(edges.len().max(1) as f64)
    }

    pub fn centroid(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.ambient];
        for i in 0..self.vertex_count() {
            for (ca, &x) in c.iter_mut().zip(self.vertex(i)) {
                *ca += x;
            }
        }
        let nv: T = lit(self.vertex_count() as f64);
        c.iter_mut().for_each(|x| *x /= nv);
        c
    }

    /// Face quality `4√3 A / (a² + b² + c²)`, equal to 1 for equilateral triangles.
    pub fn face_quality(&self, f: usize) -> T {
        let [a, b, c] = self.topology.faces[f];
        let s = self.edge_length(a, b).powi(2) + self.edge_length(b, c).powi(2) + self.edge_length(c, a).powi(2);
        if s <= T::zero() {
            return T::zero();
        }
        lit::<T>(4.0 * 3f64.sqrt()) * self.face_area(f) / s
    }

    pub fn min_face_quality(&self) -> T {
        (0..self.topology.faces.len())
            .map(|f| self.face_quality(f))
            .fold(T::one(), T::min)
    }

    /// Rejects faces whose area is below `1e-14 × (mean edge length)²`.
    pub fn check_faces(&self) -> Result<()> {
        let scale = self.mean_edge_length().powi(2);
        for f in 0..self.topology.faces.len() {
            let area = self.face_area(f);
            if !(area > lit::<T>(DEGENERATE_AREA) * scale) {
                return Err(Error::DegenerateFace { face: f, area: to_f64(area) });
            }
        }
        Ok(())
    }

    /// Closed, oriented and nondegenerate.
    pub fn validate(&self) -> Result<()> {
        self.topology.check_closed()?;
        self.check_faces()
    }

    /// `x ↦ s (x − c)`.
    pub fn rescaled(&self, s: T, center: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.vertex_count() {
            for (x, &c) in out.vertex_mut(i).iter_mut().zip(center) {
                *x = s * (*x - c);
            }
        }
        out
    }
}

/// Area of a triangle in any ambient dimension.
pub fn triangle_area<T: Real>(a: &[T], b: &[T], c: &[T]) -> T {
    let u = sub(b, a);
    let v = sub(c, a);
    let uu = norm2(&u);
    let vv = norm2(&v);
    let uv = crate::scalar::dot(&u, &v);
    let d = uu * vv - uv * uv;
    if d <= T::zero() {
        T::zero()
    } else {
        d.sqrt() * lit(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_is_closed_and_oriented() {
        let m = shapes::icosphere::<f64>(2, 1.0, 3);
        m.validate().unwrap();
        assert_eq!(m.vertex_count(), 162);
        assert_eq!(m.faces().len(), 320);
        let area = m.area();
        assert!((area - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI) < 0.03);
    }

    #[test]
    fn torus_grid_is_closed() {
        let m = shapes::clifford_torus_mesh::<f64>(16, 16, std::f64::consts::FRAC_1_SQRT_2);
        m.validate().unwrap();
        assert_eq!(m.topology.tag, TopologyTag::Torus);
    }

    #[test]
    fn open_patch_is_not_closed() {
        let m = shapes::plane_patch::<f64>(4, 1.0, 3);
        assert!(matches!(m.validate(), Err(Error::OpenMesh(_))));
    }

    #[test]
    fn flipped_face_breaks_orientation() {
        let m = shapes::icosphere::<f64>(0, 1.0, 3);
        let mut faces = m.faces().to_vec();
        faces[0].swap(1, 2);
        let pts: Vec<Vec<f64>> = (0..m.vertex_count()).map(|i| m.vertex(i).to_vec()).collect();
        let bad = TriMesh::new(&pts, faces, TopologyTag::Sphere);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn degenerate_face_detected() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        let m = TriMesh::new(&pts, vec![[0, 1, 2]], TopologyTag::Other);
        assert!(matches!(m.check_faces(), Err(Error::DegenerateFace { .. })));
    }

    #[test]
    fn ring_depth_two_on_icosphere() {
        let m = shapes::icosphere::<f64>(3, 1.0, 3);
        let r1 = m.topology.ring(100, 1);
        let r2 = m.topology.ring(100, 2);
        assert!(r1.len() == 5 || r1.len() == 6);
        assert!(r2.len() >= 15);
    }
}
