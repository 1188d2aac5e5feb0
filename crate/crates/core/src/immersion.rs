//! Immersions and their pointwise extrinsic geometry.
//!
//! An [`Immersion`] is a chart map from a [`Domain`] into `R^N`. Evaluating
//! it on [`Jet`]s gives exact first and second derivatives, from which
//! [`point_geometry`] assembles the induced metric, Christoffel symbols, a
//! normal frame and the second fundamental form.

use nalgebra::{DMatrix, DVector};

use crate::domain::{ChartPoint, Domain};
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_VARS};
use crate::scalar::{lit, to_f64, Real};

/// Threshold on `|H|²` below which the mean curvature direction is undefined.
pub const ZERO_MEAN_CURVATURE: f64 = 1e-20;
/// Smallest admissible ratio of jacobian singular values.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub trait Immersion<T: Real>: Send + Sync {
    /// Intrinsic dimension `n`.
    fn dim(&self) -> usize;
    /// Ambient dimension `N = n + k`.
    fn ambient_dim(&self) -> usize;
    fn domain(&self) -> &Domain;
    /// Chart map evaluated on jets seeded in the chart coordinates.
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>>;
    /// Highest derivative order available without loss of accuracy.
    fn deriv_order(&self) -> usize {
        4
    }
    fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }
}

/// Value, jacobian and second derivatives of a chart map at a point.
#[derive(Clone, Debug)]
pub struct ChartJet<T: Real> {
    pub position: DVector<T>,
    /// `N × n`, column `i` is `∂_i F`.
    pub jacobian: DMatrix<T>,
    /// `∂_i ∂_j F` stored at index `i * n + j`.
    pub hessian: Vec<DVector<T>>,
}

pub fn chart_jet<T: Real, I: Immersion<T> + ?Sized>(imm: &I, p: &ChartPoint<T>) -> ChartJet<T> {
    let n = imm.dim();
    assert!(n <= MAX_VARS, "intrinsic dimension {n} exceeds jet capacity");
    let u: Vec<Jet<T>> = p
        .coords
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet::variable(x, i))
        .collect();
    let f = imm.chart_map(p.chart, &u);
    let big_n = f.len();
    let position = DVector::from_iterator(big_n, f.iter().map(|c| c.value));
    let jacobian = DMatrix::from_fn(big_n, n, |a, i| f[a].grad[i]);
    let mut hessian = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            hessian.push(DVector::from_iterator(big_n, f.iter().map(|c| c.hess[i][j])));
        }
    }
    ChartJet { position, jacobian, hessian }
}

/// Position only.
pub fn position<T: Real, I: Immersion<T> + ?Sized>(imm: &I, p: &ChartPoint<T>) -> DVector<T> {
    let u: Vec<Jet<T>> = p.coords.iter().map(|&x| Jet::constant(x)).collect();
    let f = imm.chart_map(p.chart, &u);
    DVector::from_iterator(f.len(), f.iter().map(|c| c.value))
}

fn check_rank<T: Real>(jacobian: &DMatrix<T>) -> Result<()> {
    let sv = jacobian.clone().singular_values();
    let max = sv.iter().copied().fold(T::zero(), T::max);
    let min = sv.iter().copied().fold(max, T::min);
    if max <= T::zero() || min < lit::<T>(RANK_TOLERANCE) * max {
        let ratio = if max > T::zero() { to_f64(min / max) } else { 0.0 };
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

/// `g_ij = ⟨∂_i F, ∂_j F⟩`.
pub fn induced_metric<T: Real, I: Immersion<T> + ?Sized>(imm: &I, p: &ChartPoint<T>) -> Result<DMatrix<T>> {
    let jet = chart_jet(imm, p);
    check_rank(&jet.jacobian)?;
    Ok(jet.jacobian.transpose() * &jet.jacobian)
}

/// Completion strategy for the normal frame.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameCompletion {
    /// Pick the ambient basis vector with the largest normal residual first
    /// (ties broken by index).
    Pivoted,
    /// Try ambient basis vectors in the given order.
    Ordered(Vec<usize>),
}

/// Orthonormal basis of the normal space of the column span of `jacobian`.
pub fn normal_frame<T: Real>(jacobian: &DMatrix<T>) -> Result<Vec<DVector<T>>> {
    normal_frame_with(jacobian, &FrameCompletion::Pivoted)
}

pub fn normal_frame_with<T: Real>(jacobian: &DMatrix<T>, completion: &FrameCompletion) -> Result<Vec<DVector<T>>> {
    check_rank(jacobian)?;
    let big_n = jacobian.nrows();
    let n = jacobian.ncols();
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(big_n);
    for i in 0..n {
        let mut v = jacobian.column(i).into_owned();
        orthogonalize(&mut v, &basis);
        let norm = v.norm();
        basis.push(v / norm);
    }
    let residual = |a: usize, basis: &[DVector<T>]| {
        let mut e = DVector::zeros(big_n);
        e[a] = T::one();
        orthogonalize(&mut e, basis);
        e
    };
    let mut frame = Vec::with_capacity(big_n - n);
    if let FrameCompletion::Ordered(order) = completion {
        let accept: T = lit(0.1);
        for &a in order {
            if frame.len() == big_n - n {
                break;
            }
            let r = residual(a, &basis);
            let norm = r.norm();
            if norm >= accept {
                let v = r / norm;
                basis.push(v.clone());
                frame.push(v);
            }
        }
    }
    while frame.len() < big_n - n {
        let r = (0..big_n)
            .map(|a| residual(a, &basis))
            .fold(None::<DVector<T>>, |acc, r| match acc {
                Some(rb) if rb.norm_squared() >= r.norm_squared() => Some(rb),
                _ => Some(r),
            })
            .expect("ambient dimension is positive");
        let v = r.clone() / r.norm();
        basis.push(v.clone());
        frame.push(v);
    }
    for v in &mut frame {
        fix_sign(v);
    }
    Ok(frame)
}

fn orthogonalize<T: Real>(v: &mut DVector<T>, basis: &[DVector<T>]) {
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, T::one());
        }
    }
}

/// Sign convention: first component of magnitude above 1e-10 is positive.
fn fix_sign<T: Real>(v: &mut DVector<T>) {
    let tol: T = lit(1e-10);
    if let Some(&x) = v.iter().find(|x| x.abs() > tol) {
        if x < T::zero() {
            v.neg_mut();
        }
    }
}

/// Split of the traceless second fundamental form along `ν₁ = H/|H|`.
#[derive(Clone, Debug)]
pub struct TracelessSplit<T: Real> {
    /// Unit mean curvature direction (ambient).
    pub nu1: DVector<T>,
    /// `h̊₁`, orthonormal tangent frame.
    pub h1: DMatrix<T>,
    /// Components of `h̊ − h̊₁ ν₁` in the current normal frame.
    pub hminus: Vec<DMatrix<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureNorms<T> {
    /// `|h|²`
    pub h2: T,
    /// `|H|²`
    pub mean2: T,
    /// `|h̊|²`
    pub traceless2: T,
    /// `|h̊₁|²`, when `|H| > 0`.
    pub traceless1: Option<T>,
    /// `|h̊₋|²`, when `|H| > 0`.
    pub traceless_minus: Option<T>,
    /// `|R⊥|²`
    pub normal_curvature2: T,
}

/// Full pointwise extrinsic geometry.
///
/// Tensor components in `h`, `traceless` and `split` are taken in the
/// orthonormal tangent frame `tangent_frame` and in `normal_frame`; `h_coord`
/// holds the coordinate components `h_ij^α`.
#[derive(Clone, Debug)]
pub struct PointGeometry<T: Real> {
    pub n: usize,
    pub k: usize,
    pub position: DVector<T>,
    pub jacobian: DMatrix<T>,
    pub metric: DMatrix<T>,
    pub metric_inv: DMatrix<T>,
    /// `Γ^k_ij` at index `(k * n + i) * n + j`.
    pub christoffel: Vec<T>,
    /// Inverse of the Cholesky factor of the metric; maps coordinate
    /// components to orthonormal ones.
    pub frame_change: DMatrix<T>,
    /// `N × n` orthonormal basis of the tangent space.
    pub tangent_frame: DMatrix<T>,
    pub normal_frame: Vec<DVector<T>>,
    pub h_coord: Vec<DMatrix<T>>,
    pub h: Vec<DMatrix<T>>,
    pub mean_components: DVector<T>,
    pub mean_curvature: DVector<T>,
    pub traceless: Vec<DMatrix<T>>,
    pub split: Option<TracelessSplit<T>>,
    pub norms: CurvatureNorms<T>,
    /// Set when `|H|² < 1e-20`; the `h̊₁/h̊₋` split is then suppressed.
    pub zero_mean_curvature: bool,
}

/// Full extrinsic geometry of `imm` at `p` (Euclidean ambient space).
pub fn point_geometry<T: Real, I: Immersion<T> + ?Sized>(imm: &I, p: &ChartPoint<T>) -> Result<PointGeometry<T>> {
    if imm.deriv_order() < 2 {
        return Err(Error::DomainError("second derivatives unavailable".into()));
    }
    PointGeometry::from_jet(&chart_jet(imm, p))
}

impl<T: Real> PointGeometry<T> {
    pub fn from_jet(jet: &ChartJet<T>) -> Result<Self> {
        Self::from_jet_with(jet, &FrameCompletion::Pivoted)
    }

    pub fn from_jet_with(jet: &ChartJet<T>, completion: &FrameCompletion) -> Result<Self> {
        let jac = &jet.jacobian;
        let n = jac.ncols();
        let frame = normal_frame_with(jac, completion)?;
        let metric = jac.transpose() * jac;
        let chol = metric
            .clone()
            .cholesky()
            .ok_or(Error::RankDeficient { ratio: 0.0 })?;
        let metric_inv = chol.inverse();
        let frame_change = chol
            .l()
            .try_inverse()
            .ok_or(Error::RankDeficient { ratio: 0.0 })?;
        let tangent_frame = jac * frame_change.transpose();

        let mut christoffel = vec![T::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let d2 = &jet.hessian[i * n + j];
                let lowered: Vec<T> = (0..n).map(|l| jac.column(l).dot(d2)).collect();
                for k in 0..n {
                    christoffel[(k * n + i) * n + j] =
                        (0..n).fold(T::zero(), |acc, l| acc + metric_inv[(k, l)] * lowered[l]);
                }
            }
        }

        let mut h_coord = Vec::with_capacity(frame.len());
        for nu in &frame {
            let m = DMatrix::from_fn(n, n, |i, j| {
                let mut v = jet.hessian[i * n + j].clone();
                for k in 0..n {
                    v.axpy(-christoffel[(k * n + i) * n + j], &jac.column(k).into_owned(), T::one());
                }
                v.dot(nu)
            });
            h_coord.push(symmetrize(m));
        }
        let h: Vec<DMatrix<T>> = h_coord
            .iter()
            .map(|m| symmetrize(&frame_change * m * frame_change.transpose()))
            .collect();

        let mut pg = PointGeometry {
            n,
            k: frame.len(),
            position: jet.position.clone(),
            jacobian: jac.clone(),
            metric,
            metric_inv,
            christoffel,
            frame_change,
            tangent_frame,
            normal_frame: frame,
            h_coord,
            h,
            mean_components: DVector::zeros(0),
            mean_curvature: DVector::zeros(0),
            traceless: Vec::new(),
            split: None,
            norms: CurvatureNorms {
                h2: T::zero(),
                mean2: T::zero(),
                traceless2: T::zero(),
                traceless1: None,
                traceless_minus: None,
                normal_curvature2: T::zero(),
            },
            zero_mean_curvature: false,
        };
        pg.derive();
        Ok(pg)
    }

    /// Recomputes every quantity derived from `h` and the normal frame.
    fn derive(&mut self) {
        let n = self.n;
        let nf: T = lit(n as f64);
        let big_n = self.position.len();
        self.k = self.normal_frame.len();
        self.mean_components = DVector::from_iterator(self.k, self.h.iter().map(|m| m.trace()));
        let mut hvec = DVector::zeros(big_n);
        for (a, nu) in self.normal_frame.iter().enumerate() {
            hvec.axpy(self.mean_components[a], nu, T::one());
        }
        self.mean_curvature = hvec;
        let eye = DMatrix::<T>::identity(n, n);
        self.traceless = self
            .h
            .iter()
            .zip(self.mean_components.iter())
            .map(|(m, &ha)| m - &eye * (ha / nf))
            .collect();

        let h2 = self.h.iter().fold(T::zero(), |acc, m| acc + m.norm_squared());
        let mean2 = self.mean_components.norm_squared();
        let traceless2 = self.traceless.iter().fold(T::zero(), |acc, m| acc + m.norm_squared());
        let mut normal_curvature2 = T::zero();
        for a in &self.h {
            for b in &self.h {
                normal_curvature2 += (a * b - b * a).norm_squared();
            }
        }
        self.zero_mean_curvature = mean2 < lit(ZERO_MEAN_CURVATURE);
        self.split = if self.zero_mean_curvature {
            None
        } else {
            let len = mean2.sqrt();
            let e: Vec<T> = self.mean_components.iter().map(|&x| x / len).collect();
            let mut h1 = DMatrix::zeros(n, n);
            for (m, &ea) in self.traceless.iter().zip(&e) {
                h1 += m * ea;
            }
            let hminus = self
                .traceless
                .iter()
                .zip(&e)
                .map(|(m, &ea)| m - &h1 * ea)
                .collect();
            Some(TracelessSplit {
                nu1: &self.mean_curvature / len,
                h1,
                hminus,
            })
        };
        let (traceless1, traceless_minus) = match &self.split {
            Some(s) => (
                Some(s.h1.norm_squared()),
                Some(s.hminus.iter().fold(T::zero(), |acc, m| acc + m.norm_squared())),
            ),
            None => (None, None),
        };
        self.norms = CurvatureNorms {
            h2,
            mean2,
            traceless2,
            traceless1,
            traceless_minus,
            normal_curvature2,
        };
    }

    /// `Γ^k_ij`.
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> T {
        self.christoffel[(k * self.n + i) * self.n + j]
    }

    /// Ambient vector `h(e_i, e_j)` for the orthonormal tangent frame.
    pub fn h_ambient(&self, i: usize, j: usize) -> DVector<T> {
        let mut v = DVector::zeros(self.position.len());
        for (a, nu) in self.normal_frame.iter().enumerate() {
            v.axpy(self.h[a][(i, j)], nu, T::one());
        }
        v
    }

    /// Eigenvalues (ascending) of the shape operator along `ν₁ = H/|H|`.
    pub fn principal_curvatures(&self) -> Option<Vec<T>> {
        self.split.as_ref()?;
        let len = self.norms.mean2.sqrt();
        let mut m = DMatrix::zeros(self.n, self.n);
        for (ha, &c) in self.h.iter().zip(self.mean_components.iter()) {
            m += ha * (c / len);
        }
        let mut ev: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Some(ev)
    }

    /// Sectional curvature of the plane spanned by orthonormal tangent
    /// vectors `x`, `y` (frame components), via the Gauss equation.
    pub fn sectional_curvature(&self, x: &DVector<T>, y: &DVector<T>) -> T {
        let mut acc = T::zero();
        for m in &self.h {
            let hxx = (m * x).dot(x);
            let hyy = (m * y).dot(y);
            let hxy = (m * y).dot(x);
            acc += hxx * hyy - hxy * hxy;
        }
        acc
    }

    /// Geometry relative to the round sphere `|x| = 1/√K̄` containing the point:
    /// the radial direction is removed from the normal bundle.
    pub fn restrict_to_sphere(&self, k_bar: T) -> Result<Self> {
        let r = self.position.norm();
        let radius = T::one() / k_bar.sqrt();
        let rel = ((r - radius) / radius).abs();
        if rel > lit(1e-6) {
            return Err(Error::OffSphere { vertex: 0, error: to_f64(rel) });
        }
        let radial = &self.position / r;
        let mut basis: Vec<DVector<T>> = (0..self.n)
            .map(|i| self.tangent_frame.column(i).into_owned())
            .collect();
        basis.push(radial);
        let mut candidates: Vec<DVector<T>> = self.normal_frame.clone();
        let mut frame = Vec::with_capacity(self.k.saturating_sub(1));
        while frame.len() + 1 < self.k {
            let (idx, best) = candidates
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut w = v.clone();
                    orthogonalize(&mut w, &basis);
                    (i, w)
                })
                .fold(None::<(usize, DVector<T>)>, |acc, (i, w)| match acc {
                    Some((j, b)) if b.norm_squared() >= w.norm_squared() => Some((j, b)),
                    _ => Some((i, w)),
                })
                .expect("normal frame is nonempty");
            candidates.remove(idx);
            let mut v = best.clone() / best.norm();
            fix_sign(&mut v);
            basis.push(v.clone());
            frame.push(v);
        }
        let mut out = self.clone();
        out.h = frame
            .iter()
            .map(|nu| {
                DMatrix::from_fn(self.n, self.n, |i, j| self.h_ambient(i, j).dot(nu))
            })
            .collect();
        out.h_coord = frame
            .iter()
            .map(|nu| {
                let mut m = DMatrix::zeros(self.n, self.n);
                for (a, old) in self.normal_frame.iter().enumerate() {
                    m += &self.h_coord[a] * old.dot(nu);
                }
                m
            })
            .collect();
        out.normal_frame = frame;
        out.derive();
        Ok(out)
    }
}

fn symmetrize<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    let half: T = lit(0.5);
    (&m + m.transpose()) * half
}

/// A flat `n`-plane `F(u) = (u, 0, …, 0) ∈ R^N` over a box chart.
#[derive(Clone, Debug)]
pub struct FlatPlane {
    pub n: usize,
    pub ambient: usize,
    domain: Domain,
}

impl FlatPlane {
    pub fn new(n: usize, ambient: usize, half_width: f64) -> Self {
        assert!(ambient > n);
        FlatPlane {
            n,
            ambient,
            domain: Domain::Box { dim: n, half_width },
        }
    }
}

impl<T: Real> Immersion<T> for FlatPlane {
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.ambient
    }
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn chart_map(&self, _chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let mut out: Vec<Jet<T>> = u.to_vec();
        out.resize(self.ambient, Jet::constant(T::zero()));
        out
    }
}

/// Rigid motion and scaling applied to another immersion: `x ↦ s·Q·F + b`.
pub struct Transformed<I> {
    pub inner: I,
    pub rotation: DMatrix<f64>,
    pub scale: f64,
    pub translation: Vec<f64>,
}

impl<T: Real, I: Immersion<T>> Immersion<T> for Transformed<I> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn domain(&self) -> &Domain {
        self.inner.domain()
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let f = self.inner.chart_map(chart, u);
        let s: T = lit(self.scale);
        (0..f.len())
            .map(|a| {
                let mut acc = Jet::constant(lit(self.translation[a]));
                for (b, fb) in f.iter().enumerate() {
                    acc = acc + *fb * (s * lit::<T>(self.rotation[(a, b)]));
                }
                acc
            })
            .collect()
    }
    fn deriv_order(&self) -> usize {
        self.inner.deriv_order()
    }
}

impl<T: Real, I: Immersion<T> + ?Sized> Immersion<T> for Box<I> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn domain(&self) -> &Domain {
        (**self).domain()
    }
    fn chart_map(&self, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
        (**self).chart_map(chart, u)
    }
    fn deriv_order(&self) -> usize {
        (**self).deriv_order()
    }
}
