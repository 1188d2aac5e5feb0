//! Pinching quantities, curvature estimates and per-state diagnostics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::domain::ChartPoint;
use crate::error::{Error, Result};
use crate::flow::{Background, FlowTrajectory, ProductSphereState};
use crate::identity::{gradient_norms, Stencil};
use crate::immersion::{point_geometry, Immersion, PointGeometry};
use crate::mesh::{lumped_mass, mesh_geometry_all, TriMesh, DEFAULT_RING_DEPTH};
use crate::reaction::reaction_terms;

/// Exact rational constant.
pub type Rational = Ratio<i64>;

pub const DEFAULT_SIGMA: f64 = 0.02;
pub const DEFAULT_P: f64 = 16.0;
/// Floor on `|∇H|²` below which the gradient ratio is indeterminate.
pub const GRADIENT_FLOOR: f64 = 1e-30;
/// Number of farthest-point sources used by [`diameter`].
pub const DIAMETER_SOURCES: usize = 16;

/// Pinching thresholds `(c, β)`; `β` is zero in Euclidean space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PinchThreshold {
    pub c: Rational,
    pub beta: Rational,
}

/// `c = 4/(3n)` for `2 ≤ n ≤ 4` and `1/(n−1)` for `n ≥ 4`; in a sphere
/// `β = 2(n−1)/3` for `n = 2, 3` and `β = 2` for `n ≥ 4`.
pub fn pinch_threshold(n: usize, background: Background) -> Result<PinchThreshold> {
    if n < 2 {
        return Err(Error::DomainError(format!("dimension {n} < 2")));
    }
    let ni = n as i64;
    let c = if n <= 4 { Rational::new(4, 3 * ni) } else { Rational::new(1, ni - 1) };
    let beta = match background {
        Background::Euclidean => Rational::from_integer(0),
        Background::Sphere(_) if n <= 3 => Rational::new(2 * (ni - 1), 3),
        Background::Sphere(_) => Rational::from_integer(2),
    };
    Ok(PinchThreshold { c, beta })
}

/// Constants of the pinching quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct PinchParams {
    pub n: usize,
    pub background: Background,
    pub c: Rational,
    /// Strictness offset `a ≥ 0` of the Euclidean `Q`.
    pub a: f64,
    pub beta: Rational,
    /// `ε ≥ 0` in the spherical constants `α_ε`, `β_ε`, `a = 1/(n(n−1+ε))`.
    pub eps: f64,
    /// Exponent `σ ∈ [0, 1/2]` of `f_σ`.
    pub sigma: f64,
}

impl PinchParams {
    /// Thresholds at the critical values with `a = 0`, `ε = 0`, `σ = 0.02`.
    pub fn new(n: usize, background: Background) -> Result<Self> {
        let t = pinch_threshold(n, background)?;
        Ok(PinchParams {
            n,
            background,
            c: t.c,
            a: 0.0,
            beta: t.beta,
            eps: 0.0,
            sigma: DEFAULT_SIGMA,
        })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&sigma) {
            return Err(Error::BadParams(format!("σ = {sigma} outside [0, 1/2]")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn c_f64(&self) -> f64 {
        self.c.to_f64().unwrap_or(f64::NAN)
    }

    /// `α_ε = 4/(3n + nε)` for `n ≤ 3`, `1/(n − 1 + ε)` otherwise.
    pub fn alpha_eps(&self) -> f64 {
        let n = self.n as f64;
        if self.n <= 3 {
            4.0 / (3.0 * n + n * self.eps)
        } else {
            1.0 / (n - 1.0 + self.eps)
        }
    }

    /// `β_ε = β (1 − ε)`.
    pub fn beta_eps(&self) -> f64 {
        self.beta.to_f64().unwrap_or(f64::NAN) * (1.0 - self.eps)
    }

    /// `a = 1/(n(n − 1 + ε))`.
    pub fn a_coef(&self) -> f64 {
        let n = self.n as f64;
        1.0 / (n * (n - 1.0 + self.eps))
    }
}

/// `Q = |h|² + a − c|H|²` (Euclidean) or `|h|² − α|H|² − βK̄` (sphere).
/// In a sphere `pg` must hold the geometry relative to the sphere.
pub fn pinch_q<T: crate::scalar::Real>(pg: &PointGeometry<T>, params: &PinchParams) -> f64 {
    let h2 = crate::scalar::to_f64(pg.norms.h2);
    let m2 = crate::scalar::to_f64(pg.norms.mean2);
    match params.background {
        Background::Euclidean => h2 + params.a - params.c_f64() * m2,
        Background::Sphere(k) => h2 - params.alpha_eps() * m2 - params.beta_eps() * k,
    }
}

/// `f_σ = |h̊|²/|H|^{2(1−σ)}` (Euclidean) or `|h̊|²/(a|H|² + β_ε K̄)^{1−σ}` (sphere).
pub fn f_sigma<T: crate::scalar::Real>(pg: &PointGeometry<T>, params: &PinchParams) -> Result<f64> {
    let t2 = crate::scalar::to_f64(pg.norms.traceless2);
    let m2 = crate::scalar::to_f64(pg.norms.mean2);
    let e = 1.0 - params.sigma;
    match params.background {
        Background::Euclidean => {
            if pg.zero_mean_curvature {
                return Err(Error::ZeroMeanCurvature("f_sigma needs |H| > 0".into()));
            }
            Ok(t2 / m2.powf(e))
        }
        Background::Sphere(k) => Ok(t2 / (params.a_coef() * m2 + params.beta_eps() * k).powf(e)),
    }
}

/// `(Σ w_i v_i^p)^{1/p}`.
pub fn lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `‖f_σ‖_{L^p}` by vertex values times lumped areas.
pub fn lp_norm_f_sigma(state: &TriMesh<f64>, params: &PinchParams, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::BadParams(format!("p = {p} < 2")));
    }
    let geo = surface_geometry(state, params.background)?;
    let mass = lumped_mass(state);
    let vals: Vec<f64> = geo.iter().map(|pg| f_sigma(pg, params)).collect::<Result<_>>()?;
    Ok(lp_norm(&vals, &mass, p))
}

/// Chen's lower bound `(1/2)(|H|²/(n−1) − |h|²)` for sectional curvatures.
pub fn chen_kmin_bound<T: crate::scalar::Real>(pg: &PointGeometry<T>) -> Result<f64> {
    if pg.n < 2 {
        return Err(Error::DomainError("Chen's bound needs n ≥ 2".into()));
    }
    let m2 = crate::scalar::to_f64(pg.norms.mean2);
    let h2 = crate::scalar::to_f64(pg.norms.h2);
    Ok(0.5 * (m2 / (pg.n as f64 - 1.0) - h2))
}

/// Smallest sectional curvature over the coordinate planes of the
/// orthonormal frame and their 45° rotations, by the Gauss equation.
pub fn sampled_min_sectional<T: crate::scalar::Real>(pg: &PointGeometry<T>) -> f64 {
    let n = pg.n;
    let mut best = f64::INFINITY;
    let s = T::one() / (T::one() + T::one()).sqrt();
    for i in 0..n {
        for j in i + 1..n {
            let mut x = DVector::<T>::zeros(n);
            let mut y = DVector::<T>::zeros(n);
            x[i] = T::one();
            y[j] = T::one();
            best = best.min(crate::scalar::to_f64(pg.sectional_curvature(&x, &y)));
            for k in 0..n {
                if k != i && k != j {
                    let mut y2 = DVector::<T>::zeros(n);
                    y2[j] = s;
                    y2[k] = s;
                    best = best.min(crate::scalar::to_f64(pg.sectional_curvature(&x, &y2)));
                }
            }
        }
    }
    best
}

/// Gradient estimate summary over a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub max_grad_h2: f64,
    pub max_grad_mean2: f64,
    /// Minimum of `|∇h|²/|∇H|²` over points with `|∇H|² > 1e-30`; `None` when indeterminate.
    pub min_ratio: Option<f64>,
    /// `3/(n+2)`.
    pub bound: f64,
    pub flagged: bool,
    /// Pointwise `(|∇h|², |∇H|²)`.
    pub samples: Vec<(f64, f64)>,
}

impl GradientReport {
    fn from_samples(samples: Vec<(f64, f64)>, n: usize, slack: f64, relative: bool) -> Self {
        let bound = 3.0 / (n as f64 + 2.0);
        let max_grad_h2 = samples.iter().map(|s| s.0).fold(0.0, f64::max);
        let max_grad_mean2 = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let min_ratio = samples
            .iter()
            .filter(|s| s.1 > GRADIENT_FLOOR)
            .map(|s| s.0 / s.1)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))));
        let limit = if relative { bound * (1.0 - slack) } else { bound - slack };
        let flagged = min_ratio.is_some_and(|r| r < limit);
        GradientReport {
            max_grad_h2,
            max_grad_mean2,
            min_ratio,
            bound,
            flagged,
            samples,
        }
    }
}

/// `|∇h|²`, `|∇H|²` of an analytic immersion; flags a ratio below `3/(n+2) − 1e-6`.
pub fn gradient_diagnostics<I: Immersion<f64> + ?Sized>(
    imm: &I,
    samples: &[ChartPoint<f64>],
    steps: &[f64],
) -> Result<GradientReport> {
    let vals = samples
        .iter()
        .map(|p| gradient_norms(imm, p, steps, Stencil::Order6))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientReport::from_samples(vals, imm.dim(), 1e-6, false))
}

/// Nearest orthogonal matrix (polar factor).
fn nearest_rotation(m: DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    u * vt
}

fn normal_matrix(pg: &PointGeometry<f64>) -> DMatrix<f64> {
    DMatrix::from_columns(&pg.normal_frame)
}

/// Per-vertex `(|∇h|², |∇H|²)` by least-squares differencing of fitted `h`
/// over the one-ring, with neighbour frames aligned by nearest rotations.
pub fn mesh_gradients(state: &TriMesh<f64>, geo: &[PointGeometry<f64>]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(geo.len());
    for (v, pg) in geo.iter().enumerate() {
        let n = pg.n;
        let k = pg.k;
        let et = pg.tangent_frame.transpose();
        let nv = normal_matrix(pg);
        let x = DVector::from_column_slice(state.vertex(v));
        let nbrs = &state.topology.neighbors[v];
        let comps = k * n * n;
        let mut design = DMatrix::<f64>::zeros(nbrs.len(), n);
        let mut rhs = DMatrix::<f64>::zeros(nbrs.len(), comps + k);
        for (r, &w) in nbrs.iter().enumerate() {
            let pw = &geo[w];
            let d = &et * (DVector::from_column_slice(state.vertex(w)) - &x);
            design.set_row(r, &d.transpose());
            let rt = nearest_rotation(&et * &pw.tangent_frame);
            let rn = nearest_rotation(nv.transpose() * normal_matrix(pw));
            let hw: Vec<DMatrix<f64>> = pw.h.iter().map(|m| &rt * m * rt.transpose()).collect();
            for a in 0..k {
                let mut ha = DMatrix::<f64>::zeros(n, n);
                for (b, hb) in hw.iter().enumerate() {
                    ha += hb * rn[(a, b)];
                }
                let diff = ha - &pg.h[a];
                for i in 0..n {
                    for j in 0..n {
                        rhs[(r, (a * n + i) * n + j)] = diff[(i, j)];
                    }
                }
                rhs[(r, comps + a)] = diff.trace();
            }
        }
        let grad = design.clone().svd(true, true).solve(&rhs, 1e-14);
        let Ok(grad) = grad else {
            out.push((f64::NAN, f64::NAN));
            continue;
        };
        let gh2: f64 = (0..comps).map(|c| grad.column(c).norm_squared()).sum();
        let gm2: f64 = (comps..comps + k).map(|c| grad.column(c).norm_squared()).sum();
        out.push((gh2, gm2));
    }
    out
}

/// Mesh version of [`gradient_diagnostics`]; flags a ratio more than 5% below `3/(n+2)`.
pub fn mesh_gradient_diagnostics(state: &TriMesh<f64>, background: Background) -> Result<GradientReport> {
    let geo = surface_geometry(state, background)?;
    let vals = mesh_gradients(state, &geo);
    Ok(GradientReport::from_samples(vals, 2, 0.05, true))
}

/// Fitted geometry of every vertex, relative to the sphere in spherical mode.
pub fn surface_geometry(state: &TriMesh<f64>, background: Background) -> Result<Vec<PointGeometry<f64>>> {
    let geo = mesh_geometry_all(state, DEFAULT_RING_DEPTH)?;
    match background {
        Background::Euclidean => Ok(geo),
        Background::Sphere(k) => geo
            .into_iter()
            .enumerate()
            .map(|(v, pg)| {
                pg.restrict_to_sphere(k).map_err(|e| match e {
                    Error::OffSphere { error, .. } => Error::OffSphere { vertex: v, error },
                    other => other,
                })
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths along mesh edges.
pub fn edge_distances(state: &TriMesh<f64>, source: usize) -> Vec<f64> {
    let nv = state.vertex_count();
    let mut dist = vec![f64::INFINITY; nv];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &w in &state.topology.neighbors[u] {
            let nd = d + state.edge_length(u, w);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
    dist
}

/// Largest edge-path distance found from 16 farthest-point sampled sources.
pub fn diameter(state: &TriMesh<f64>) -> Result<f64> {
    let nv = state.vertex_count();
    if nv < 3 || state.faces().is_empty() {
        return Err(Error::Disconnected);
    }
    let mut nearest = vec![f64::INFINITY; nv];
    let mut source = 0usize;
    let mut best = 0.0f64;
    for _ in 0..DIAMETER_SOURCES.min(nv) {
        let d = edge_distances(state, source);
        if d.iter().any(|x| x.is_infinite()) {
            return Err(Error::Disconnected);
        }
        best = best.max(d.iter().copied().fold(0.0, f64::max));
        for (m, &x) in nearest.iter_mut().zip(&d) {
            *m = m.min(x);
        }
        source = (0..nv)
            .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("nonempty mesh");
    }
    Ok(best)
}

/// One row of `diagnostics.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub area: f64,
    pub max_mean2: f64,
    pub min_mean2: f64,
    pub max_h2: f64,
    pub max_q: f64,
    pub max_f_sigma: f64,
    pub lp_f_sigma: f64,
    pub max_grad_h2: f64,
    pub max_grad_mean2: f64,
    pub min_grad_ratio: f64,
    pub min_chen_bound: f64,
    pub diameter: f64,
    pub hbar: f64,
    pub psi: f64,
    pub theta: f64,
}

pub const CSV_HEADER: &str = "t,area,maxH2,minH2,maxh2,maxQ,maxFsigma,lpFsigma,maxGradh2,maxGradH2,minGradRatio,minChenBound,diameter,hbar,psi,theta";

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.area,
            self.max_mean2,
            self.min_mean2,
            self.max_h2,
            self.max_q,
            self.max_f_sigma,
            self.lp_f_sigma,
            self.max_grad_h2,
            self.max_grad_mean2,
            self.min_grad_ratio,
            self.min_chen_bound,
            self.diameter,
            self.hbar,
            self.psi,
            self.theta,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        if v.len() != 16 {
            return Err(Error::FormatError {
                line: 0,
                message: format!("expected 16 columns, found {}", v.len()),
            });
        }
        Ok(DiagnosticsRecord {
            t: v[0],
            area: v[1],
            max_mean2: v[2],
            min_mean2: v[3],
            max_h2: v[4],
            max_q: v[5],
            max_f_sigma: v[6],
            lp_f_sigma: v[7],
            max_grad_h2: v[8],
            max_grad_mean2: v[9],
            min_grad_ratio: v[10],
            min_chen_bound: v[11],
            diameter: v[12],
            hbar: v[13],
            psi: v[14],
            theta: v[15],
        })
    }

    /// Diagnostics of a mesh state. `psi` and `theta` are left as `NaN`.
    pub fn for_mesh(state: &TriMesh<f64>, params: &PinchParams, p: f64) -> Result<Self> {
        let geo = surface_geometry(state, params.background)?;
        let mass = lumped_mass(state);
        let area = state.area();
        let mut rec = DiagnosticsRecord::empty(state.time);
        rec.area = area;
        rec.max_mean2 = geo.iter().map(|g| g.norms.mean2).fold(f64::NEG_INFINITY, f64::max);
        rec.min_mean2 = geo.iter().map(|g| g.norms.mean2).fold(f64::INFINITY, f64::min);
        rec.max_h2 = geo.iter().map(|g| g.norms.h2).fold(f64::NEG_INFINITY, f64::max);
        rec.max_q = geo.iter().map(|g| pinch_q(g, params)).fold(f64::NEG_INFINITY, f64::max);
        let fs: Vec<Option<f64>> = geo.iter().map(|g| f_sigma(g, params).ok()).collect();
        if fs.iter().all(Option::is_some) {
            let vals: Vec<f64> = fs.iter().map(|x| x.unwrap_or(0.0)).collect();
            rec.max_f_sigma = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rec.lp_f_sigma = lp_norm(&vals, &mass, p);
        }
        let grads = GradientReport::from_samples(mesh_gradients(state, &geo), params.n, 0.05, true);
        rec.max_grad_h2 = grads.max_grad_h2;
        rec.max_grad_mean2 = grads.max_grad_mean2;
        rec.min_grad_ratio = grads.min_ratio.unwrap_or(f64::NAN);
        rec.min_chen_bound = geo
            .iter()
            .map(|g| chen_kmin_bound(g).unwrap_or(f64::NAN))
            .fold(f64::INFINITY, f64::min);
        rec.diameter = diameter(state)?;
        let weighted: f64 = geo.iter().zip(&mass).map(|(g, m)| g.norms.mean2 * m).sum();
        rec.hbar = weighted / mass.iter().sum::<f64>();
        Ok(rec)
    }

    /// Closed-form diagnostics of a product of round spheres.
    pub fn for_product(state: &ProductSphereState, params: &PinchParams) -> Self {
        let h2 = state.h2();
        let m2 = state.mean2();
        let n = state.dim() as f64;
        let traceless2 = h2 - m2 / n;
        let e = 1.0 - params.sigma;
        let f = traceless2 / m2.powf(e);
        let area = state.area();
        let mut rec = DiagnosticsRecord::empty(state.time);
        rec.area = area;
        rec.max_mean2 = m2;
        rec.min_mean2 = m2;
        rec.max_h2 = h2;
        rec.max_q = h2 + params.a - params.c_f64() * m2;
        rec.max_f_sigma = f;
        rec.lp_f_sigma = f * area.powf(1.0 / DEFAULT_P);
        rec.max_grad_h2 = 0.0;
        rec.max_grad_mean2 = 0.0;
        rec.min_chen_bound = 0.5 * (m2 / (n - 1.0) - h2);
        rec.diameter = std::f64::consts::PI * state.factors.iter().map(|f| f.1 * f.1).sum::<f64>().sqrt();
        rec.hbar = m2;
        rec
    }

    fn empty(t: f64) -> Self {
        DiagnosticsRecord::from_values(&[f64::NAN; 16]).map(|mut r| {
            r.t = t;
            r
        })
        .expect("16 values")
    }
}

/// Quantity tracked by [`flow_consistency_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackedQuantity {
    Mean2,
    H2,
    Measure,
}

/// Comparison of `d/dt ∫ q dμ`-type finite differences with the evolution equations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub quantity: TrackedQuantity,
    /// Interior state times.
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub max_relative: f64,
}

/// Pointwise samples of a state: measure weight, `|H|²`, `|h|²` and the
/// reaction part of the evolution of each.
struct Field {
    time: f64,
    area: f64,
    weights: Vec<f64>,
    mean2: Vec<f64>,
    h2: Vec<f64>,
    rhs_mean2: Vec<f64>,
    rhs_h2: Vec<f64>,
}

fn evolution_rhs(pg: &PointGeometry<f64>, grad: (f64, f64), k_bar: f64) -> (f64, f64) {
    let r = reaction_terms(pg);
    let n = pg.n as f64;
    let m2 = pg.norms.mean2;
    let t2 = pg.norms.traceless2;
    // Δ terms integrate to zero over closed surfaces
    let rhs_mean2 = -2.0 * grad.1 + 2.0 * r.r2 + 2.0 * n * k_bar * m2;
    let rhs_h2 = -2.0 * grad.0 + 2.0 * r.r1 + 2.0 * k_bar * m2 - 2.0 * n * k_bar * t2;
    (rhs_mean2, rhs_h2)
}

fn finish_consistency(fields: &[Field], quantity: TrackedQuantity) -> Result<ConsistencyReport> {
    if fields.len() < 3 {
        return Err(Error::InsufficientStates { found: fields.len(), needed: 3 });
    }
    let mut times = Vec::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut max_relative = 0.0f64;
    for k in 1..fields.len() - 1 {
        let (a, b, c) = (&fields[k - 1], &fields[k], &fields[k + 1]);
        let dt = c.time - a.time;
        let (l, r) = match quantity {
            TrackedQuantity::Measure => (
                (c.area - a.area) / dt,
                -b.weights.iter().zip(&b.mean2).map(|(w, m)| w * m).sum::<f64>(),
            ),
            TrackedQuantity::Mean2 | TrackedQuantity::H2 => {
                let (qa, qc, src) = if quantity == TrackedQuantity::Mean2 {
                    (&a.mean2, &c.mean2, &b.rhs_mean2)
                } else {
                    (&a.h2, &c.h2, &b.rhs_h2)
                };
                let l = (0..b.weights.len()).map(|i| b.weights[i] * (qc[i] - qa[i]) / dt).sum::<f64>();
                let r = b.weights.iter().zip(src).map(|(w, s)| w * s).sum::<f64>();
                (l, r)
            }
        };
        max_relative = max_relative.max((l - r).abs() / l.abs().max(r.abs()).max(1e-300));
        times.push(b.time);
        lhs.push(l);
        rhs.push(r);
    }
    Ok(ConsistencyReport {
        quantity,
        times,
        lhs,
        rhs,
        max_relative,
    })
}

/// Finite-difference time derivatives of integrated curvature quantities
/// along a mesh flow against the right-hand sides of their evolution equations.
pub fn flow_consistency_check(traj: &FlowTrajectory<TriMesh<f64>>, quantity: TrackedQuantity) -> Result<ConsistencyReport> {
    if traj.states.len() < 3 {
        return Err(Error::InsufficientStates { found: traj.states.len(), needed: 3 });
    }
    let k_bar = traj.background.k_bar();
    let fields = traj
        .states
        .iter()
        .map(|s| {
            let geo = surface_geometry(s, traj.background)?;
            let grads = mesh_gradients(s, &geo);
            let (rhs_mean2, rhs_h2): (Vec<f64>, Vec<f64>) = geo
                .iter()
                .zip(&grads)
                .map(|(g, &gr)| {
                    let gr = if gr.0.is_finite() && gr.1.is_finite() { gr } else { (0.0, 0.0) };
                    evolution_rhs(g, gr, k_bar)
                })
                .unzip();
            Ok(Field {
                time: s.time,
                area: s.area(),
                weights: lumped_mass(s),
                mean2: geo.iter().map(|g| g.norms.mean2).collect(),
                h2: geo.iter().map(|g| g.norms.h2).collect(),
                rhs_mean2,
                rhs_h2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish_consistency(&fields, quantity)
}

/// [`flow_consistency_check`] for exact product flows (uniform curvature).
pub fn flow_consistency_check_product(
    traj: &FlowTrajectory<ProductSphereState>,
    quantity: TrackedQuantity,
) -> Result<ConsistencyReport> {
    let fields = traj
        .states
        .iter()
        .map(|s| {
            let imm = s.immersion();
            let p = Immersion::<f64>::domain(&imm).sample_grid::<f64>(1).remove(0);
            let pg = point_geometry(&imm, &p)?;
            let (rm, rh) = evolution_rhs(&pg, (0.0, 0.0), 0.0);
            let area = s.area();
            Ok(Field {
                time: s.time,
                area,
                weights: vec![area],
                mean2: vec![pg.norms.mean2],
                h2: vec![pg.norms.h2],
                rhs_mean2: vec![rm],
                rhs_h2: vec![rh],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish_consistency(&fields, quantity)
}

/// Index of the vertex maximizing `Q`.
pub fn argmax_q(state: &TriMesh<f64>, params: &PinchParams) -> Result<usize> {
    let geo = surface_geometry(state, params.background)?;
    Ok(geo
        .iter()
        .map(|g| pinch_q(g, params))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::zoo::{ProductSpheres, RoundSphere};

    #[test]
    fn thresholds() {
        let t = pinch_threshold(2, Background::Euclidean).unwrap();
        assert_eq!(t.c, Rational::new(2, 3));
        assert_eq!(t.beta, Rational::from_integer(0));
        assert_eq!(pinch_threshold(4, Background::Euclidean).unwrap().c, Rational::new(1, 3));
        let s = pinch_threshold(3, Background::Sphere(1.0)).unwrap();
        assert_eq!((s.c, s.beta), (Rational::new(4, 9), Rational::new(4, 3)));
        assert_eq!(pinch_threshold(5, Background::Sphere(1.0)).unwrap().beta, Rational::from_integer(2));
        assert!(matches!(pinch_threshold(1, Background::Euclidean), Err(Error::DomainError(_))));
    }

    #[test]
    fn q_on_spheres_and_cylinders() {
        let r = 0.7;
        for n in 2..=4 {
            let s = RoundSphere::new(n, r, n + 1);
            let p = Immersion::<f64>::domain(&s).sample_grid::<f64>(2).remove(1);
            let pg = point_geometry(&s, &p).unwrap();
            let params = PinchParams::new(n, Background::Euclidean).unwrap();
            let expected = if n <= 4 { -(n as f64) / (3.0 * r * r) } else { unreachable!() };
            assert!((pinch_q(&pg, &params) - expected).abs() < 1e-10);
        }
        let cyl = ProductSpheres::new(vec![(2, 0.1), (1, 1.0)]);
        let p = Immersion::<f64>::domain(&cyl).sample_grid::<f64>(2).remove(0);
        let pg = point_geometry(&cyl, &p).unwrap();
        let q = pinch_q(&pg, &PinchParams::new(3, Background::Euclidean).unwrap());
        assert!((q - (201.0 - 4.0 / 9.0 * 401.0)).abs() < 1e-9);
    }

    #[test]
    fn f_sigma_of_torus_is_half() {
        for eps in [0.2, 0.5, 1.0] {
            let t = ProductSpheres::new(vec![(1, eps), (1, 1.0)]);
            let p = Immersion::<f64>::domain(&t).sample_grid::<f64>(3).remove(4);
            let pg = point_geometry(&t, &p).unwrap();
            let params = PinchParams::new(2, Background::Euclidean).unwrap().with_sigma(0.0).unwrap();
            assert!((f_sigma(&pg, &params).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn chen_bound_on_sphere() {
        let r = 2.0;
        for n in 2..=4 {
            let s = RoundSphere::new(n, r, n + 1);
            let p = Immersion::<f64>::domain(&s).sample_grid::<f64>(2).remove(3);
            let pg = point_geometry(&s, &p).unwrap();
            let b = chen_kmin_bound(&pg).unwrap();
            assert!((b - n as f64 / (2.0 * (n as f64 - 1.0) * r * r)).abs() < 1e-12);
            assert!(sampled_min_sectional(&pg) >= b - 1e-12);
        }
    }

    #[test]
    fn diameter_of_icosphere() {
        let m = shapes::icosphere::<f64>(4, 1.5, 3);
        let d = diameter(&m).unwrap();
        // edge paths zigzag, so they overshoot the geodesic distance
        let exact = std::f64::consts::PI * 1.5;
        assert!(d >= exact * (1.0 - 1e-3) && d < exact * 1.08, "{d}");
    }

    #[test]
    fn diameter_rejects_degenerate_mesh() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
        let m = TriMesh::new(&pts, Vec::new(), crate::mesh::TopologyTag::Other);
        assert!(matches!(diameter(&m), Err(Error::Disconnected)));
    }

    #[test]
    fn csv_header_has_sixteen_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 16);
    }
}
