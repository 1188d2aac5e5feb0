//! Numerical verification of the structural identities of submanifolds in
//! flat space: `Δ_g F = H`, Gauss, Codazzi and the traced Simons identity.
//!
//! First and second derivatives of the chart map are exact (jets); every
//! further derivative is a central finite difference on the chart grid
//! spacing. Covariant derivatives of normal-valued tensors are taken in
//! ambient form, `(∇_k h)_ij = (∂_k h_ij)^⊥ − Γ^p_ki h_pj − Γ^p_kj h_ip`,
//! which includes the normal connection.

use nalgebra::{DMatrix, DVector};

use crate::domain::ChartPoint;
use crate::error::{Error, Result};
use crate::immersion::{chart_jet, point_geometry, Immersion, PointGeometry};
use crate::scalar::{lit, to_f64, Real};

/// Central first-derivative stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Order2,
    Order4,
    Order6,
}

impl Stencil {
    pub fn order(&self) -> usize {
        match self {
            Stencil::Order2 => 2,
            Stencil::Order4 => 4,
            Stencil::Order6 => 6,
        }
    }

    /// `(offset, weight)` pairs with nonzero weight.
    fn taps(&self) -> &'static [(f64, f64)] {
        match self {
            Stencil::Order2 => &[(-1.0, -0.5), (1.0, 0.5)],
            Stencil::Order4 => &[(-2.0, 1.0 / 12.0), (-1.0, -2.0 / 3.0), (1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)],
            Stencil::Order6 => &[
                (-3.0, -1.0 / 60.0),
                (-2.0, 3.0 / 20.0),
                (-1.0, -0.75),
                (1.0, 0.75),
                (2.0, -3.0 / 20.0),
                (3.0, 1.0 / 60.0),
            ],
        }
    }
}

/// Central difference of a vector-valued field along `axis`.
fn diff<T: Real, F>(p: &ChartPoint<T>, axis: usize, step: T, stencil: Stencil, f: &F) -> Result<Vec<DVector<T>>>
where
    F: Fn(&ChartPoint<T>) -> Result<Vec<DVector<T>>>,
{
    let mut acc: Option<Vec<DVector<T>>> = None;
    for &(off, w) in stencil.taps() {
        let vals = f(&p.shifted(axis, step * lit(off)))?;
        let w: T = lit::<T>(w) / step;
        match acc.as_mut() {
            None => acc = Some(vals.into_iter().map(|v| v * w).collect()),
            Some(a) => {
                for (ai, v) in a.iter_mut().zip(vals) {
                    ai.axpy(w, &v, T::one());
                }
            }
        }
    }
    Ok(acc.expect("stencil has taps"))
}

/// Sample points and finite-difference spacing for identity checks.
#[derive(Clone, Debug)]
pub struct IdentitySamples<T> {
    pub points: Vec<ChartPoint<T>>,
    /// Step per chart coordinate.
    pub steps: Vec<T>,
    pub stencil: Stencil,
}

/// Cells per axis of the fixed sample grid used by [`IdentitySamples::grid`].
pub const SAMPLE_CELLS: usize = 3;

impl<T: Real> IdentitySamples<T> {
    /// Fixed cell-centred sample points (three cells per chart axis) with the
    /// stencil spacing of an `m`-cell chart grid.
    pub fn grid<I: Immersion<T> + ?Sized>(imm: &I, m: usize, stencil: Stencil) -> Self {
        IdentitySamples {
            points: imm.domain().sample_grid(SAMPLE_CELLS),
            steps: imm.domain().stencil_steps(m),
            stencil,
        }
    }

    /// Same points, spacing halved.
    pub fn refined(&self) -> Self {
        IdentitySamples {
            points: self.points.clone(),
            steps: self.steps.iter().map(|&h| h * lit(0.5)).collect(),
            stencil: self.stencil,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidualReport {
    pub identity: &'static str,
    pub samples: usize,
    pub max_abs: f64,
    /// Largest `absolute / max(term magnitude, 1e-30)` over the samples.
    pub max_rel: f64,
    pub tolerance: f64,
    pub stencil_order: usize,
    pub pass: bool,
}

impl std::fmt::Display for IdentityResidualReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<8} samples={:<5} max_abs={:.3e} max_rel={:.3e} tol={:.1e} order={} {}",
            self.identity,
            self.samples,
            self.max_abs,
            self.max_rel,
            self.tolerance,
            self.stencil_order,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Accumulates per-sample residuals into a report.
struct Tally {
    max_abs: f64,
    max_scale: f64,
    count: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { max_abs: 0.0, max_scale: 0.0, count: 0 }
    }

    fn add(&mut self, abs: f64, scale: f64) {
        self.max_abs = self.max_abs.max(abs);
        self.max_scale = self.max_scale.max(scale);
        self.count += 1;
    }

    /// Passes when the relative residual is below `tol`, or the absolute
    /// residual is when every term vanishes.
    fn report(self, identity: &'static str, tol: f64, order: usize, samples: usize) -> IdentityResidualReport {
        let max_rel = self.max_abs / self.max_scale.max(1e-30);
        let pass = max_rel < tol || self.max_abs < tol;
        IdentityResidualReport {
            identity,
            samples,
            max_abs: self.max_abs,
            max_rel,
            tolerance: tol,
            stencil_order: order,
            pass,
        }
    }
}

fn geometry<T: Real, I: Immersion<T> + ?Sized>(imm: &I, p: &ChartPoint<T>) -> Result<PointGeometry<T>> {
    point_geometry(imm, p)
}

/// Ambient vectors `h(∂_i, ∂_j)` at index `i * n + j`.
fn h_coord_vectors<T: Real>(pg: &PointGeometry<T>) -> Vec<DVector<T>> {
    let n = pg.n;
    let big_n = pg.position.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut v = DVector::zeros(big_n);
            for (a, nu) in pg.normal_frame.iter().enumerate() {
                v.axpy(pg.h_coord[a][(i, j)], nu, T::one());
            }
            out.push(v);
        }
    }
    out
}

fn normal_projection<T: Real>(pg: &PointGeometry<T>, v: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(v.len());
    for nu in &pg.normal_frame {
        out.axpy(nu.dot(v), nu, T::one());
    }
    out
}

/// `(∇_k h)_ij` at index `(k * n + i) * n + j`, in chart coordinates.
pub fn covariant_dh<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    p: &ChartPoint<T>,
    steps: &[T],
    stencil: Stencil,
) -> Result<Vec<DVector<T>>> {
    let pg = geometry(imm, p)?;
    covariant_dh_at(imm, p, &pg, steps, stencil)
}

fn covariant_dh_at<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    p: &ChartPoint<T>,
    pg: &PointGeometry<T>,
    steps: &[T],
    stencil: Stencil,
) -> Result<Vec<DVector<T>>> {
    covariant_dh_terms(imm, p, pg, steps, stencil).map(|r| r.0)
}

/// `∇h` together with the largest magnitude among its constituent terms.
fn covariant_dh_terms<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    p: &ChartPoint<T>,
    pg: &PointGeometry<T>,
    steps: &[T],
    stencil: Stencil,
) -> Result<(Vec<DVector<T>>, f64)> {
    let n = pg.n;
    let hv = h_coord_vectors(pg);
    let mut scale = 0.0f64;
    let field = |q: &ChartPoint<T>| -> Result<Vec<DVector<T>>> { Ok(h_coord_vectors(&geometry(imm, q)?)) };
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        let dk = diff(p, k, steps[k], stencil, &field)?;
        for i in 0..n {
            for j in 0..n {
                let mut v = normal_projection(pg, &dk[i * n + j]);
                scale = scale.max(to_f64(v.norm()));
                for q in 0..n {
                    v.axpy(-pg.gamma(q, k, i), &hv[q * n + j], T::one());
                    v.axpy(-pg.gamma(q, k, j), &hv[i * n + q], T::one());
                }
                out.push(v);
            }
        }
    }
    Ok((out, scale))
}

/// `∇_k H = g^{ij} (∇_k h)_ij`.
fn trace_dh<T: Real>(pg: &PointGeometry<T>, dh: &[DVector<T>]) -> Vec<DVector<T>> {
    let n = pg.n;
    (0..n)
        .map(|k| {
            let mut v = DVector::zeros(pg.position.len());
            for i in 0..n {
                for j in 0..n {
                    v.axpy(pg.metric_inv[(i, j)], &dh[(k * n + i) * n + j], T::one());
                }
            }
            v
        })
        .collect()
}

/// Squared norms `|∇h|²` and `|∇H|²` at a point.
pub fn gradient_norms<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    p: &ChartPoint<T>,
    steps: &[T],
    stencil: Stencil,
) -> Result<(T, T)> {
    let pg = geometry(imm, p)?;
    let dh = covariant_dh_at(imm, p, &pg, steps, stencil)?;
    let n = pg.n;
    let gi = &pg.metric_inv;
    let mut grad_h2 = T::zero();
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for a in 0..n {
                    for j in 0..n {
                        for b in 0..n {
                            let w = gi[(k, l)] * gi[(i, a)] * gi[(j, b)];
                            if w != T::zero() {
                                grad_h2 += w * dh[(k * n + i) * n + j].dot(&dh[(l * n + a) * n + b]);
                            }
                        }
                    }
                }
            }
        }
    }
    let dm = trace_dh(&pg, &dh);
    let mut grad_mean2 = T::zero();
    for k in 0..n {
        for l in 0..n {
            grad_mean2 += gi[(k, l)] * dm[k].dot(&dm[l]);
        }
    }
    Ok((grad_h2, grad_mean2))
}

/// `Δ_g F = H`, with the Laplacian in divergence form
/// `(1/√g) ∂_i(√g g^{ij} ∂_j F)` (outer derivative by finite differences).
pub fn verify_laplace_position<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    samples: &IdentitySamples<T>,
    tol: f64,
) -> Result<IdentityResidualReport> {
    let n = imm.dim();
    let flux = |q: &ChartPoint<T>| -> Result<Vec<DVector<T>>> {
        let jet = chart_jet(imm, q);
        let g = jet.jacobian.transpose() * &jet.jacobian;
        let sqrt_det = g.determinant().sqrt();
        let gi = g.try_inverse().ok_or(Error::RankDeficient { ratio: 0.0 })?;
        Ok((0..n)
            .map(|i| {
                let mut v = DVector::zeros(jet.position.len());
                for j in 0..n {
                    v.axpy(sqrt_det * gi[(i, j)], &jet.jacobian.column(j).into_owned(), T::one());
                }
                v
            })
            .collect())
    };
    let mut tally = Tally::new();
    for p in &samples.points {
        let pg = geometry(imm, p)?;
        let sqrt_det = pg.metric.determinant().sqrt();
        let mut lap = DVector::zeros(pg.position.len());
        for i in 0..n {
            let d = diff(p, i, samples.steps[i], samples.stencil, &flux)?;
            lap += &d[i];
        }
        lap /= sqrt_det;
        let res = to_f64((&lap - &pg.mean_curvature).norm());
        let scale = to_f64(lap.norm().max(pg.mean_curvature.norm()));
        tally.add(res, scale);
    }
    Ok(tally.report("laplace", tol, samples.stencil.order(), samples.points.len()))
}

fn christoffel_field<T: Real, I: Immersion<T> + ?Sized>(imm: &I) -> impl Fn(&ChartPoint<T>) -> Result<Vec<DVector<T>>> + '_ {
    move |q: &ChartPoint<T>| {
        let pg = geometry(imm, q)?;
        Ok(vec![DVector::from_column_slice(&pg.christoffel)])
    }
}

/// Riemann tensor `R_ijkl = ⟨R(∂_i, ∂_j)∂_k, ∂_l⟩` from finite differences
/// of the Christoffel symbols, at index `((i n + j) n + k) n + l`.
pub fn intrinsic_riemann<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    p: &ChartPoint<T>,
    steps: &[T],
    stencil: Stencil,
) -> Result<Vec<T>> {
    let pg = geometry(imm, p)?;
    let n = pg.n;
    let field = christoffel_field(imm);
    let dgamma: Vec<DVector<T>> = (0..n)
        .map(|i| diff(p, i, steps[i], stencil, &field).map(|mut v| v.remove(0)))
        .collect::<Result<_>>()?;
    let dg = |i: usize, l: usize, j: usize, k: usize| dgamma[i][(l * n + j) * n + k];
    let mut out = vec![T::zero(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // R^m_ijk
                let up: Vec<T> = (0..n)
                    .map(|m| {
                        let mut r = dg(i, m, j, k) - dg(j, m, i, k);
                        for q in 0..n {
                            r += pg.gamma(m, i, q) * pg.gamma(q, j, k) - pg.gamma(m, j, q) * pg.gamma(q, i, k);
                        }
                        r
                    })
                    .collect();
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] =
                        (0..n).fold(T::zero(), |acc, m| acc + pg.metric[(l, m)] * up[m]);
                }
            }
        }
    }
    Ok(out)
}

/// Gauss equation `R_ijkl = ⟨h_jk, h_il⟩ − ⟨h_ik, h_jl⟩`; with `plane = Some([a, b])`
/// only the sectional components `R_abba` are compared.
pub fn verify_gauss<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    samples: &IdentitySamples<T>,
    plane: Option<[usize; 2]>,
    tol: f64,
) -> Result<IdentityResidualReport> {
    let n = imm.dim();
    let mut tally = Tally::new();
    for p in &samples.points {
        let pg = geometry(imm, p)?;
        let riem = intrinsic_riemann(imm, p, &samples.steps, samples.stencil)?;
        let hv = h_coord_vectors(&pg);
        let h = |i: usize, j: usize| &hv[i * n + j];
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if let Some([a, b]) = plane {
                            if !(i == a && j == b && k == b && l == a) {
                                continue;
                            }
                        }
                        let rhs = h(j, k).dot(h(i, l)) - h(i, k).dot(h(j, l));
                        let lhs = riem[((i * n + j) * n + k) * n + l];
                        worst = worst.max(to_f64((lhs - rhs).abs()));
                        scale = scale.max(to_f64(lhs.abs())).max(to_f64(h(j, k).dot(h(i, l)).abs()));
                    }
                }
            }
        }
        tally.add(worst, scale);
    }
    Ok(tally.report("gauss", tol, samples.stencil.order(), samples.points.len()))
}

/// Codazzi equation `∇_k h_ij = ∇_i h_kj`.
pub fn verify_codazzi<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    samples: &IdentitySamples<T>,
    tol: f64,
) -> Result<IdentityResidualReport> {
    let n = imm.dim();
    let mut tally = Tally::new();
    for p in &samples.points {
        let pg = geometry(imm, p)?;
        let (dh, mut scale) = covariant_dh_terms(imm, p, &pg, &samples.steps, samples.stencil)?;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = &dh[(k * n + i) * n + j];
                    let b = &dh[(i * n + k) * n + j];
                    worst = worst.max(to_f64((a - b).norm()));
                    scale = scale.max(to_f64(a.norm()));
                }
            }
        }
        tally.add(worst, scale);
    }
    Ok(tally.report("codazzi", tol, samples.stencil.order(), samples.points.len()))
}

/// Traced Simons identity in flat space, compared in the orthonormal tangent frame:
/// `Δh_ij = ∇_i∇_j H + ⟨H,h_ip⟩h_pj − ⟨h_ij,h_pq⟩h_pq + 2⟨h_jq,h_ip⟩h_pq
///          − ⟨h_iq,h_qp⟩h_pj − ⟨h_jq,h_qp⟩h_pi`.
pub fn verify_simons_traced<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    samples: &IdentitySamples<T>,
    tol: f64,
) -> Result<IdentityResidualReport> {
    if imm.deriv_order() < 4 {
        return Err(Error::DomainError("fourth derivatives unavailable".into()));
    }
    let n = imm.dim();
    let stencil = samples.stencil;
    let steps = &samples.steps;
    let mut tally = Tally::new();
    for p in &samples.points {
        let pg = geometry(imm, p)?;
        let dh = covariant_dh_at(imm, p, &pg, steps, stencil)?;
        let dm = trace_dh(&pg, &dh);
        // ∂_k of ∇h and ∇H, evaluated on shifted points
        let field = |q: &ChartPoint<T>| -> Result<Vec<DVector<T>>> {
            let pq = geometry(imm, q)?;
            let dhq = covariant_dh_at(imm, q, &pq, steps, stencil)?;
            let mut out = trace_dh(&pq, &dhq);
            out.extend(dhq);
            Ok(out)
        };
        let mut second_h = vec![DVector::<T>::zeros(pg.position.len()); n * n * n * n];
        let mut second_m = vec![DVector::<T>::zeros(pg.position.len()); n * n];
        for k in 0..n {
            let d = diff(p, k, steps[k], stencil, &field)?;
            let (d_m, d_h) = d.split_at(n);
            for l in 0..n {
                // ∇_k∇_l H
                let mut v = normal_projection(&pg, &d_m[l]);
                for q in 0..n {
                    v.axpy(-pg.gamma(q, k, l), &dm[q], T::one());
                }
                second_m[k * n + l] = v;
                for i in 0..n {
                    for j in 0..n {
                        let mut v = normal_projection(&pg, &d_h[(l * n + i) * n + j]);
                        for q in 0..n {
                            v.axpy(-pg.gamma(q, k, l), &dh[(q * n + i) * n + j], T::one());
                            v.axpy(-pg.gamma(q, k, i), &dh[(l * n + q) * n + j], T::one());
                            v.axpy(-pg.gamma(q, k, j), &dh[(l * n + i) * n + q], T::one());
                        }
                        second_h[((k * n + l) * n + i) * n + j] = v;
                    }
                }
            }
        }
        // coordinate Laplacian Δh_ij = g^{kl} ∇_k∇_l h_ij
        let big_n = pg.position.len();
        let mut lap = vec![DVector::<T>::zeros(big_n); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        lap[i * n + j].axpy(pg.metric_inv[(k, l)], &second_h[((k * n + l) * n + i) * n + j], T::one());
                    }
                }
            }
        }
        // to the orthonormal frame e_a = Σ_i P_ai ∂_i
        let pmat: &DMatrix<T> = &pg.frame_change;
        let to_frame = |v: &[DVector<T>], a: usize, b: usize| {
            let mut out = DVector::zeros(big_n);
            for i in 0..n {
                for j in 0..n {
                    out.axpy(pmat[(a, i)] * pmat[(b, j)], &v[i * n + j], T::one());
                }
            }
            out
        };
        let hm = &pg.mean_curvature;
        let ho: Vec<DVector<T>> = (0..n * n).map(|ij| pg.h_ambient(ij / n, ij % n)).collect();
        let h = |i: usize, j: usize| &ho[i * n + j];
        let two: T = lit(2.0);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let lhs = to_frame(&lap, i, j);
                let hess_m = to_frame(&second_m, i, j);
                let mut cubic = DVector::<T>::zeros(big_n);
                for p_ in 0..n {
                    cubic.axpy(hm.dot(h(i, p_)), h(p_, j), T::one());
                    for q in 0..n {
                        cubic.axpy(-h(i, j).dot(h(p_, q)), h(p_, q), T::one());
                        cubic.axpy(two * h(j, q).dot(h(i, p_)), h(p_, q), T::one());
                        cubic.axpy(-h(i, q).dot(h(q, p_)), h(p_, j), T::one());
                        cubic.axpy(-h(j, q).dot(h(q, p_)), h(p_, i), T::one());
                    }
                }
                let rhs = &hess_m + &cubic;
                worst = worst.max(to_f64((&lhs - &rhs).norm()));
                scale = scale
                    .max(to_f64(lhs.norm()))
                    .max(to_f64(hess_m.norm()))
                    .max(to_f64(cubic.norm()))
                    .max(to_f64(hm.norm()) * to_f64(pg.norms.h2));
            }
        }
        tally.add(worst, scale);
    }
    Ok(tally.report("simons", tol, stencil.order(), samples.points.len()))
}

/// Which identity to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityKind {
    Laplace,
    Gauss,
    Codazzi,
    Simons,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 4] = [
        IdentityKind::Laplace,
        IdentityKind::Gauss,
        IdentityKind::Codazzi,
        IdentityKind::Simons,
    ];

    pub fn parse(s: &str) -> Result<Vec<IdentityKind>> {
        match s {
            "laplace" => Ok(vec![IdentityKind::Laplace]),
            "gauss" => Ok(vec![IdentityKind::Gauss]),
            "codazzi" => Ok(vec![IdentityKind::Codazzi]),
            "simons" => Ok(vec![IdentityKind::Simons]),
            "all" => Ok(Self::ALL.to_vec()),
            other => Err(Error::BadParams(format!("unknown identity {other}"))),
        }
    }

    /// Stencil used by default: sixth order, fourth order for the nested Simons stencils.
    pub fn default_stencil(&self) -> Stencil {
        match self {
            IdentityKind::Simons => Stencil::Order4,
            _ => Stencil::Order6,
        }
    }

    /// Default relative tolerance.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            IdentityKind::Laplace => 1e-6,
            IdentityKind::Gauss => 1e-6,
            IdentityKind::Codazzi => 1e-6,
            IdentityKind::Simons => 1e-4,
        }
    }
}

/// Runs one identity on an `m`-cell grid spacing with default stencil and tolerance.
pub fn verify<T: Real, I: Immersion<T> + ?Sized>(imm: &I, kind: IdentityKind, m: usize) -> Result<IdentityResidualReport> {
    let samples = IdentitySamples::grid(imm, m, kind.default_stencil());
    verify_with(imm, kind, &samples, kind.default_tolerance())
}

pub fn verify_with<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    kind: IdentityKind,
    samples: &IdentitySamples<T>,
    tol: f64,
) -> Result<IdentityResidualReport> {
    match kind {
        IdentityKind::Laplace => verify_laplace_position(imm, samples, tol),
        IdentityKind::Gauss => verify_gauss(imm, samples, None, tol),
        IdentityKind::Codazzi => verify_codazzi(imm, samples, tol),
        IdentityKind::Simons => verify_simons_traced(imm, samples, tol),
    }
}

/// Observed convergence order `log2(r_h / r_{h/2})` of the absolute residual.
pub fn observed_order<T: Real, I: Immersion<T> + ?Sized>(
    imm: &I,
    kind: IdentityKind,
    samples: &IdentitySamples<T>,
) -> Result<(f64, f64, f64)> {
    let coarse = verify_with(imm, kind, samples, f64::INFINITY)?.max_abs;
    let fine = verify_with(imm, kind, &samples.refined(), f64::INFINITY)?.max_abs;
    Ok((coarse, fine, (coarse / fine).log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::FlatPlane;
    use crate::zoo::RoundSphere;

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        // order-p central stencils are exact on polynomials of degree ≤ p
        for st in [Stencil::Order2, Stencil::Order4, Stencil::Order6] {
            let deg = st.order() as i32;
            let f = |q: &ChartPoint<f64>| Ok(vec![DVector::from_element(1, q.coords[0].powi(deg))]);
            let p = ChartPoint::new(0, vec![0.7]);
            let d = diff(&p, 0, 0.1, st, &f).unwrap()[0][0];
            let exact = deg as f64 * 0.7f64.powi(deg - 1);
            assert!((d - exact).abs() < 1e-11, "{d} vs {exact}");
        }
    }

    #[test]
    fn plane_identities_vanish() {
        let plane = FlatPlane::new(2, 4, 1.0);
        for kind in IdentityKind::ALL {
            let r = verify::<f64, _>(&plane, kind, 16).unwrap();
            assert!(r.max_abs < 1e-12, "{r}");
            assert!(r.pass);
        }
    }

    #[test]
    fn sphere_identities() {
        let s = RoundSphere::new(2, 1.5, 3);
        let samples = IdentitySamples::grid(&s, 128, Stencil::Order6);
        for kind in IdentityKind::ALL {
            let r = verify_with::<f64, _>(&s, kind, &samples, 1e-8).unwrap();
            assert!(r.max_abs < 1e-8, "{r}");
        }
    }

    #[test]
    fn sphere_sectional_curvature() {
        let r = 1.5;
        let s = RoundSphere::new(2, r, 3);
        let p = ChartPoint::new(3, vec![0.2, -0.4]);
        let steps = Immersion::<f64>::domain(&s).stencil_steps::<f64>(128);
        let riem = intrinsic_riemann(&s, &p, &steps, Stencil::Order6).unwrap();
        let g = crate::immersion::induced_metric(&s, &p).unwrap();
        let k = riem[(2 + 1) * 2] / g.determinant();
        assert!((k - 1.0 / (r * r)).abs() < 1e-8, "{k}");
    }
}
