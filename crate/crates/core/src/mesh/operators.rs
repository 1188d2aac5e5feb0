use super::TriMesh;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Intrinsic cotangent Laplacian built from edge lengths in `R^N`.
///
/// `weights[i][m]` is `(cot α + cot β)/2` for the edge from `i` to
/// `topology.neighbors[i][m]`.
#[derive(Clone, Debug)]
pub struct CotanLaplacian<T> {
    pub weights: Vec<Vec<T>>,
}

impl<T: Real> CotanLaplacian<T> {
    /// `(L x)_i = Σ_j w_ij (x_j − x_i)` applied to every ambient coordinate.
    pub fn apply(&self, mesh: &TriMesh<T>) -> Vec<T> {
        let n = mesh.ambient;
        let mut out = vec![T::zero(); mesh.positions.len()];
        for (i, (nbrs, ws)) in mesh.topology.neighbors.iter().zip(&self.weights).enumerate() {
            let xi = mesh.vertex(i);
            let oi = &mut out[i * n..(i + 1) * n];
            for (&j, &w) in nbrs.iter().zip(ws) {
                for (o, (&xj, &x)) in oi.iter_mut().zip(mesh.vertex(j).iter().zip(xi)) {
                    *o += w * (xj - x);
                }
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.weights
            .iter()
            .map(|ws| ws.iter().fold(T::zero(), |a, &b| a + b))
            .collect()
    }
}

pub fn cotangent_laplacian<T: Real>(mesh: &TriMesh<T>) -> Result<CotanLaplacian<T>> {
    let topo = &mesh.topology;
    let mut weights: Vec<Vec<T>> = topo.neighbors.iter().map(|nb| vec![T::zero(); nb.len()]).collect();
    let scale = mesh.mean_edge_length().powi(2);
    let quarter: T = lit(0.25);
    let half: T = lit(0.5);
    for (fi, f) in topo.faces.iter().enumerate() {
        let area = mesh.face_area(fi);
        if !(area > lit::<T>(super::DEGENERATE_AREA) * scale) {
            return Err(Error::DegenerateFace { face: fi, area: to_f64(area) });
        }
        for c in 0..3 {
            let (a, b, o) = (f[(c + 1) % 3], f[(c + 2) % 3], f[c]);
            let lab = mesh.edge_length(a, b).powi(2);
            let lao = mesh.edge_length(a, o).powi(2);
            let lbo = mesh.edge_length(b, o).powi(2);
            let cot = (lao + lbo - lab) * quarter / area;
            let w = cot * half;
            let ia = topo.neighbors[a].binary_search(&b).expect("edge in adjacency");
            let ib = topo.neighbors[b].binary_search(&a).expect("edge in adjacency");
            weights[a][ia] += w;
            weights[b][ib] += w;
        }
    }
    Ok(CotanLaplacian { weights })
}

/// Lumped mass from mixed Voronoi areas: the circumcentric cell for
/// non-obtuse triangles, `A/2` at an obtuse corner and `A/4` at the others.
pub fn lumped_mass<T: Real>(mesh: &TriMesh<T>) -> Vec<T> {
    let eighth: T = lit(0.125);
    let mut m = vec![T::zero(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(fi);
        if area <= T::zero() {
            continue;
        }
        let len2 = |a: usize, b: usize| mesh.edge_length(a, b).powi(2);
        // squared length of the edge opposite each corner
        let opp = [len2(f[1], f[2]), len2(f[2], f[0]), len2(f[0], f[1])];
        let obtuse = (0..3).find(|&c| opp[c] > opp[(c + 1) % 3] + opp[(c + 2) % 3]);
        match obtuse {
            Some(c) => {
                for k in 0..3 {
                    let share = if k == c { lit(0.5) } else { lit(0.25) };
                    m[f[k]] += area * share;
                }
            }
            None => {
                let quarter: T = lit(0.25);
                let cot = |c: usize| (opp[(c + 1) % 3] + opp[(c + 2) % 3] - opp[c]) * quarter / area;
                for k in 0..3 {
                    // edges k-(k+1) and k-(k+2) are opposite corners k+2 and k+1
                    let e1 = opp[(k + 2) % 3];
                    let e2 = opp[(k + 1) % 3];
                    m[f[k]] += eighth * (e1 * cot((k + 2) % 3) + e2 * cot((k + 1) % 3));
                }
            }
        }
    }
    m
}

/// Discrete mean curvature vectors `M⁻¹ L X`, flat with `ambient` entries per vertex.
pub fn mean_curvature_vectors<T: Real>(mesh: &TriMesh<T>) -> Result<Vec<T>> {
    let lap = cotangent_laplacian(mesh)?;
    let mass = lumped_mass(mesh);
    let mut lx = lap.apply(mesh);
    let n = mesh.ambient;
    for (i, &m) in mass.iter().enumerate() {
        lx[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= m);
    }
    Ok(lx)
}
