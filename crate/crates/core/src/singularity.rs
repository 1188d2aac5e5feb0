//! Singular time and type-I rate estimates, parabolic rescaling, Gaussian
//! density, shrinker residuals and the Hamilton blow-up.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::flow::{unit_sphere_volume, Background, FlowState, FlowTrajectory, ProductSphereState};
use crate::mesh::{triangle_area, TriMesh};
use crate::pinch::{mesh_gradients, surface_geometry};

/// Shrinker residual above which classification is refused.
pub const SHRINKER_THRESHOLD: f64 = 0.05;
/// Minimum gap between principal-curvature clusters, as a fraction of the spectral range.
pub const CLUSTER_GAP: f64 = 0.2;
/// Default type-I constant `C₀`.
pub const DEFAULT_C0: f64 = 2.0;
/// Required growth of `max|h|²` for a trajectory to count as blowing up.
pub const BLOWUP_GROWTH: f64 = 10.0;

/// Singular time fitted from `1/max|h|²` being linear in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTime {
    pub t_sing: f64,
    /// Half-width of the two-sigma interval.
    pub ci_half_width: f64,
    /// RMS residual of the line fit.
    pub fit_residual: f64,
    pub window: usize,
}

/// Line fit `y = a + b t`; returns `(a, b, rms, var_a, var_b, cov_ab)`.
fn line_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64, f64, f64, f64) {
    let m = t.len() as f64;
    let tm = t.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let stt: f64 = t.iter().map(|x| (x - tm) * (x - tm)).sum();
    let sty: f64 = t.iter().zip(y).map(|(x, v)| (x - tm) * (v - ym)).sum();
    let b = sty / stt;
    let a = ym - b * tm;
    let sse: f64 = t.iter().zip(y).map(|(x, v)| (v - a - b * x).powi(2)).sum();
    let rms = (sse / m).sqrt();
    let s2 = if t.len() > 2 { sse / (m - 2.0) } else { 0.0 };
    let var_b = s2 / stt;
    let var_a = s2 * (1.0 / m + tm * tm / stt);
    let cov = -tm * s2 / stt;
    (a, b, rms, var_a, var_b, cov)
}

/// `(t, max|h|²)` series of a trajectory.
pub fn curvature_series<S: FlowState>(traj: &FlowTrajectory<S>) -> Result<Vec<(f64, f64)>> {
    if traj.diagnostics.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(traj.diagnostics.iter().map(|d| (d.t, d.max_h2)).collect())
}

/// Fits `1/max|h|²` against `t` over the last third of the samples.
pub fn estimate_singular_time_from(series: &[(f64, f64)]) -> Result<SingularTime> {
    if series.len() < 6 {
        return Err(Error::InsufficientStates { found: series.len(), needed: 6 });
    }
    let first = series[0].1;
    let last = series[series.len() - 1].1;
    if !(last >= BLOWUP_GROWTH * first) {
        return Err(Error::NotBlowingUp(format!(
            "max|h|² grew from {first:.4e} to {last:.4e}"
        )));
    }
    let window = (series.len() / 3).max(3);
    let tail = &series[series.len() - window..];
    let t: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let y: Vec<f64> = tail.iter().map(|p| 1.0 / p.1).collect();
    let (a, b, rms, var_a, var_b, cov) = line_fit(&t, &y);
    if !(b < 0.0) {
        return Err(Error::NotBlowingUp(format!("1/max|h|² has slope {b:.4e}")));
    }
    let t_sing = -a / b;
    // delta method for T = −a/b
    let da = -1.0 / b;
    let db = a / (b * b);
    let var_t = da * da * var_a + db * db * var_b + 2.0 * da * db * cov;
    Ok(SingularTime {
        t_sing,
        ci_half_width: 2.0 * var_t.max(0.0).sqrt(),
        fit_residual: rms,
        window,
    })
}

pub fn estimate_singular_time<S: FlowState>(traj: &FlowTrajectory<S>) -> Result<SingularTime> {
    estimate_singular_time_from(&curvature_series(traj)?)
}

/// `δ(t) = 2(T − t) max|h|²` along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeOneRate {
    pub times: Vec<f64>,
    pub delta: Vec<f64>,
    pub sup: f64,
    pub min: f64,
    pub last: f64,
    pub c0: f64,
    /// `sup δ < C₀`.
    pub type_one: bool,
}

pub fn type1_rate_from(series: &[(f64, f64)], t_sing: f64, c0: f64) -> Result<TypeOneRate> {
    let Some(&(t_last, _)) = series.last() else {
        return Err(Error::EmptyTrajectory);
    };
    if !(t_sing > t_last) {
        return Err(Error::BadParams(format!("T = {t_sing} does not exceed the last time {t_last}")));
    }
    let times: Vec<f64> = series.iter().map(|p| p.0).collect();
    let delta: Vec<f64> = series.iter().map(|&(t, h2)| 2.0 * (t_sing - t) * h2).collect();
    let sup = delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = delta.iter().copied().fold(f64::INFINITY, f64::min);
    let last = delta[delta.len() - 1];
    Ok(TypeOneRate {
        times,
        delta,
        sup,
        min,
        last,
        c0,
        type_one: sup < c0,
    })
}

pub fn type1_rate<S: FlowState>(traj: &FlowTrajectory<S>, t_sing: f64, c0: f64) -> Result<TypeOneRate> {
    type1_rate_from(&curvature_series(traj)?, t_sing, c0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RescaleMode {
    FixedCenter,
    Hamilton,
}

/// Center, singular time and scales `λ_k = 1/√(2(T − t_k))` of a rescaling sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaleSpec {
    pub center: Vec<f64>,
    pub t_sing: f64,
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub mode: RescaleMode,
}

impl RescaleSpec {
    pub fn new(center: Vec<f64>, t_sing: f64, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::BadParams("no rescaling times".into()));
        }
        if times.iter().any(|&t| !(t < t_sing)) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadParams("times must increase strictly and precede T".into()));
        }
        let lambdas = times.iter().map(|&t| 1.0 / (2.0 * (t_sing - t)).sqrt()).collect();
        Ok(RescaleSpec {
            center,
            t_sing,
            times,
            lambdas,
            mode: RescaleMode::FixedCenter,
        })
    }
}

/// Mesh state at time `t` by linear interpolation of vertex positions.
pub fn interpolate_state(traj: &FlowTrajectory<TriMesh<f64>>, t: f64) -> Result<TriMesh<f64>> {
    let states = &traj.states;
    let Some(first) = states.first() else {
        return Err(Error::EmptyTrajectory);
    };
    let last = &states[states.len() - 1];
    if t < first.time || t > last.time {
        return Err(Error::OutOfRange { requested: t, start: first.time });
    }
    let k = states.partition_point(|s| s.time <= t).clamp(1, states.len() - 1);
    let (a, b) = (&states[k - 1], &states[k]);
    if b.time == a.time {
        return Ok(a.clone());
    }
    let w = ((t - a.time) / (b.time - a.time)).clamp(0.0, 1.0);
    let pos = a.positions.iter().zip(&b.positions).map(|(x, y)| x + w * (y - x)).collect();
    Ok(a.with_positions(pos, t))
}

/// `F_k = λ_k (F(T + s/λ_k²) − x₀)`, with time relabelled to `s`.
pub fn parabolic_rescale(traj: &FlowTrajectory<TriMesh<f64>>, spec: &RescaleSpec, s: f64) -> Result<Vec<TriMesh<f64>>> {
    if !(s < 0.0) {
        return Err(Error::BadParams(format!("s = {s} must be negative")));
    }
    spec.lambdas
        .iter()
        .map(|&lam| {
            let t = spec.t_sing + s / (lam * lam);
            let state = interpolate_state(traj, t)?;
            let mut out = state.rescaled(lam, &spec.center);
            out.time = s;
            Ok(out)
        })
        .collect()
}

/// Exact rescaling of a product flow: scaled radii and the image `λ(c − x₀)` of
/// the product's own center, for each `λ_k`.
pub fn parabolic_rescale_product(
    initial: &ProductSphereState,
    spec: &RescaleSpec,
    s: f64,
) -> Result<Vec<(ProductSphereState, Vec<f64>)>> {
    if !(s < 0.0) {
        return Err(Error::BadParams(format!("s = {s} must be negative")));
    }
    spec.lambdas
        .iter()
        .map(|&lam| {
            let t = spec.t_sing + s / (lam * lam);
            if t < initial.time {
                return Err(Error::OutOfRange { requested: t, start: initial.time });
            }
            let radii = initial.radii_after(t - initial.time);
            if radii.iter().any(|r| !r.is_finite()) {
                return Err(Error::OutOfRange { requested: t, start: initial.time });
            }
            let factors = initial.factors.iter().zip(&radii).map(|(&(p, _), &a)| (p, lam * a)).collect();
            let offset = spec.center.iter().map(|&x| -lam * x).collect();
            Ok((ProductSphereState { factors, time: s }, offset))
        })
        .collect()
}

/// Backwards heat kernel centred at `(x₀, t₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProbe {
    pub center: Vec<f64>,
    pub t0: f64,
    /// Samples `(t, θ(t))`.
    pub samples: Vec<(f64, f64)>,
}

impl DensityProbe {
    pub fn new(center: Vec<f64>, t0: f64) -> Self {
        DensityProbe { center, t0, samples: Vec::new() }
    }

    /// `ρ(x, t) = (4π(t₀ − t))^{−n/2} exp(−|x − x₀|²/(4(t₀ − t)))`.
    pub fn kernel(&self, x: &[f64], t: f64, n: usize) -> f64 {
        let tau = self.t0 - t;
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        (4.0 * std::f64::consts::PI * tau).powf(-(n as f64) / 2.0) * (-d2 / (4.0 * tau)).exp()
    }

    /// `Θ`: the last sample.
    pub fn limit(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }
}

/// `θ` with an estimate of its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density {
    pub theta: f64,
    pub quadrature_error: f64,
}

fn face_sum(state: &TriMesh<f64>, probe: &DensityProbe, n: usize, subdivide: bool) -> f64 {
    let t = state.time;
    let dim = state.ambient;
    let mut total = 0.0;
    for f in state.faces() {
        let [a, b, c] = [state.vertex(f[0]), state.vertex(f[1]), state.vertex(f[2])];
        let centroid: Vec<f64> = (0..dim).map(|i| (a[i] + b[i] + c[i]) / 3.0).collect();
        let area = triangle_area(a, b, c);
        let k0 = probe.kernel(&centroid, t, n);
        let corners = [a, b, c].map(|v| probe.kernel(v, t, n));
        let hi = corners.iter().copied().fold(k0, f64::max);
        let lo = corners.iter().copied().fold(k0, f64::min);
        if subdivide && hi - lo > 0.1 * hi {
            // midpoint subdivision into four triangles
            let mid = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(x, y)| 0.5 * (x + y)).collect() };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            let tris: [[&[f64]; 3]; 4] = [[a, &ab, &ca], [&ab, b, &bc], [&ca, &bc, c], [&ab, &bc, &ca]];
            for tri in tris {
                let cen: Vec<f64> = (0..dim).map(|i| (tri[0][i] + tri[1][i] + tri[2][i]) / 3.0).collect();
                total += triangle_area(tri[0], tri[1], tri[2]) * probe.kernel(&cen, t, n);
            }
        } else {
            total += area * k0;
        }
    }
    total
}

/// `θ = Σ_faces area × ρ(centroid)`, subdividing once where the kernel varies by more than 10%.
pub fn gaussian_density(state: &TriMesh<f64>, probe: &DensityProbe) -> Result<Density> {
    if !(state.time < probe.t0) {
        return Err(Error::BadParams(format!("state time {} is not before t0 = {}", state.time, probe.t0)));
    }
    let n = 2;
    let theta = face_sum(state, probe, n, true);
    let plain = face_sum(state, probe, n, false);
    Ok(Density {
        theta,
        quadrature_error: (theta - plain).abs(),
    })
}

/// `∫ g(cos φ) sin^{p−1} φ dφ` over `[0, π]` by composite Simpson.
fn polar_integral(p: usize, intervals: usize, g: impl Fn(f64) -> f64) -> f64 {
    let m = intervals + intervals % 2;
    let h = std::f64::consts::PI / m as f64;
    let mut acc = 0.0;
    for i in 0..=m {
        let phi = i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * g(phi.cos()) * phi.sin().powi(p as i32 - 1);
    }
    acc * h / 3.0
}

/// Per-factor view of a point `x₀` relative to a product of spheres: for each
/// factor, the norm of the block of `x₀` in its `R^{p+1}`.
fn factor_offsets(state: &ProductSphereState, center: &[f64]) -> Result<Vec<f64>> {
    if center.len() != state.ambient_dim() {
        return Err(Error::BadParams(format!(
            "center has {} coordinates, ambient dimension is {}",
            center.len(),
            state.ambient_dim()
        )));
    }
    let mut out = Vec::with_capacity(state.factors.len());
    let mut off = 0;
    for &(p, _) in &state.factors {
        out.push(center[off..off + p + 1].iter().map(|x| x * x).sum::<f64>().sqrt());
        off += p + 1;
    }
    Ok(out)
}

fn polar_intervals(kappa: f64) -> usize {
    (400.0 + 40.0 * kappa.abs().sqrt()).min(2.0e6) as usize
}

/// Gaussian density of a product of round spheres, by polar quadrature in each factor.
pub fn gaussian_density_product(state: &ProductSphereState, probe: &DensityProbe) -> Result<f64> {
    let tau = probe.t0 - state.time;
    if !(tau > 0.0) {
        return Err(Error::BadParams(format!("state time {} is not before t0 = {}", state.time, probe.t0)));
    }
    let offsets = factor_offsets(state, &probe.center)?;
    let n = state.dim() as f64;
    let mut log_theta = -n / 2.0 * (4.0 * std::f64::consts::PI * tau).ln();
    for (&(p, a), &c) in state.factors.iter().zip(&offsets) {
        // |a u − c|² = (a − c)² + 2ac(1 − cos φ)
        let kappa = a * c / (2.0 * tau);
        let integral = polar_integral(p, polar_intervals(kappa), |x| (kappa * (x - 1.0)).exp());
        log_theta += (unit_sphere_volume(p - 1) * a.powi(p as i32) * integral).ln() - (a - c).powi(2) / (4.0 * tau);
    }
    Ok(log_theta.exp())
}

/// `θ(t_i)` nonincreasing within `slack` plus each sample's quadrature error.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub t0: f64,
    pub samples: Vec<(f64, f64)>,
    pub slack: f64,
    /// Indices `i` with `θ(t_{i+1}) > θ(t_i) + slack + errors`.
    pub violations: Vec<usize>,
    pub pass: bool,
}

pub fn monotonicity_from(samples: Vec<(f64, f64)>, errors: &[f64], t0: f64, slack: f64) -> Result<MonotonicityReport> {
    if samples.len() < 3 {
        return Err(Error::InsufficientStates { found: samples.len(), needed: 3 });
    }
    let violations: Vec<usize> = (0..samples.len() - 1)
        .filter(|&i| samples[i + 1].1 > samples[i].1 + slack + errors[i] + errors[i + 1])
        .collect();
    Ok(MonotonicityReport {
        t0,
        pass: violations.is_empty(),
        samples,
        slack,
        violations,
    })
}

/// Densities of every retained mesh state before `t₀`.
pub fn monotonicity_check(traj: &FlowTrajectory<TriMesh<f64>>, probe: &mut DensityProbe, slack: f64) -> Result<MonotonicityReport> {
    let mut samples = Vec::new();
    let mut errors = Vec::new();
    for s in traj.states.iter().filter(|s| s.time < probe.t0) {
        let d = gaussian_density(s, probe)?;
        samples.push((s.time, d.theta));
        errors.push(d.quadrature_error);
    }
    probe.samples = samples.clone();
    monotonicity_from(samples, &errors, probe.t0, slack)
}

pub fn monotonicity_check_product(
    traj: &FlowTrajectory<ProductSphereState>,
    probe: &mut DensityProbe,
    slack: f64,
) -> Result<MonotonicityReport> {
    let mut samples = Vec::new();
    for s in traj.states.iter().filter(|s| s.time < probe.t0) {
        samples.push((s.time, gaussian_density_product(s, probe)?));
    }
    probe.samples = samples.clone();
    let errors = vec![0.0; samples.len()];
    monotonicity_from(samples, &errors, probe.t0, slack)
}

/// `(∫|H − F⊥/(2s)|² ρ dμ / ∫|H|² ρ dμ)^{1/2}` at the rescaled time `s < 0`,
/// with `ρ` the kernel centred at the origin at time 0.
pub fn shrinker_residual(state: &TriMesh<f64>, s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::BadParams(format!("s = {s} must be negative")));
    }
    let geo = surface_geometry(state, Background::Euclidean)?;
    let mass = crate::mesh::lumped_mass(state);
    let probe = DensityProbe::new(vec![0.0; state.ambient], 0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, pg) in geo.iter().enumerate() {
        let x = DVector::from_column_slice(state.vertex(v));
        let mut xperp = DVector::zeros(state.ambient);
        for nu in &pg.normal_frame {
            xperp += nu * nu.dot(&x);
        }
        let r = &pg.mean_curvature - xperp / (2.0 * s);
        let w = mass[v] * probe.kernel(state.vertex(v), s, pg.n);
        num += w * r.norm_squared();
        den += w * pg.norms.mean2;
    }
    shrinker_ratio(num, den)
}

fn shrinker_ratio(num: f64, den: f64) -> Result<f64> {
    if !(den > 1e-300) {
        return Err(Error::ZeroMeanCurvature(format!("∫|H|²ρ = {den:.3e}, numerator {num:.3e}")));
    }
    Ok((num / den).sqrt())
}

/// [`shrinker_residual`] of a product of spheres whose own center sits at
/// `offset` relative to the kernel center.
pub fn shrinker_residual_product(state: &ProductSphereState, offset: &[f64], s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::BadParams(format!("s = {s} must be negative")));
    }
    // F − x₀ = Σ (a_i u_i + c_i) with c = offset; normals u_i; H = −Σ (p_i/a_i) u_i
    let cs = factor_offsets(state, offset)?;
    let tau = -s;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(p, a), &c) in state.factors.iter().zip(&cs) {
        let kappa = a * c / (2.0 * tau);
        let weight = |x: f64| (-kappa * (1.0 + x)).exp();
        // ⟨c_i, u⟩ = −c cos φ so the kernel peaks at φ = π; substitute x → −x
        let m = polar_intervals(kappa);
        let w = polar_integral(p, m, |x| weight(-x));
        let hm = p as f64 / a;
        let f = polar_integral(p, m, |x| {
            let fperp = a - c * x;
            let r = -hm - fperp / (2.0 * s);
            r * r * weight(-x)
        });
        num += f / w;
        den += hm * hm;
    }
    shrinker_ratio(num, den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShrinkerKind {
    Sphere(usize),
    /// `S^m × R^{n−m}`.
    Cylinder(usize, usize),
    Plane,
    Unknown,
}

impl std::fmt::Display for ShrinkerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShrinkerKind::Sphere(m) => write!(f, "sphere({m})"),
            ShrinkerKind::Cylinder(m, k) => write!(f, "cylinder({m},{k})"),
            ShrinkerKind::Plane => write!(f, "plane"),
            ShrinkerKind::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkerClass {
    pub kind: ShrinkerKind,
    pub residual: f64,
    /// Radius of the curved factor.
    pub radius: f64,
    /// `√m` at `s = −1/2`, scaled by `√(−2s)` otherwise.
    pub template_radius: f64,
    /// Relative deviation of `radius` from `template_radius`.
    pub fit_error: f64,
}

/// Decision on a sorted principal-curvature spectrum (absolute values).
pub fn classify_spectrum(spectrum: &[f64], residual: f64, parallel_error: f64, s: f64) -> Result<ShrinkerClass> {
    if !(residual < SHRINKER_THRESHOLD) {
        return Err(Error::NotAShrinker { residual });
    }
    let n = spectrum.len();
    let mut k: Vec<f64> = spectrum.iter().map(|x| x.abs()).collect();
    k.sort_by(f64::total_cmp);
    let top = k[n - 1];
    let range = top - k[0];
    let scale = (-2.0 * s).sqrt();
    let mut out = ShrinkerClass {
        kind: ShrinkerKind::Unknown,
        residual,
        radius: f64::NAN,
        template_radius: f64::NAN,
        fit_error: f64::NAN,
    };
    // flat relative to the kernel width
    if top * scale < CLUSTER_GAP {
        out.kind = ShrinkerKind::Plane;
        return Ok(out);
    }
    if parallel_error > CLUSTER_GAP {
        return Ok(out);
    }
    let split = if range <= CLUSTER_GAP * top {
        0
    } else {
        // largest gap
        let (i, gap) = (1..n)
            .map(|i| (i, k[i] - k[i - 1]))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if gap < CLUSTER_GAP * range {
            return Ok(out);
        }
        i
    };
    let upper = &k[split..];
    let lower = &k[..split];
    let spread = upper[upper.len() - 1] - upper[0];
    if spread > CLUSTER_GAP * range.max(CLUSTER_GAP * top) || lower.iter().any(|&x| x > CLUSTER_GAP * top) {
        return Ok(out);
    }
    let m = upper.len();
    let kappa = upper.iter().sum::<f64>() / m as f64;
    out.kind = if split == 0 {
        ShrinkerKind::Sphere(m)
    } else {
        ShrinkerKind::Cylinder(m, n - m)
    };
    out.radius = 1.0 / kappa;
    out.template_radius = (m as f64).sqrt() * scale;
    out.fit_error = (out.radius - out.template_radius).abs() / out.template_radius;
    Ok(out)
}

/// Classification of a rescaled mesh state at time `s`, weighting vertices by the kernel.
pub fn classify_shrinker(state: &TriMesh<f64>, s: f64) -> Result<ShrinkerClass> {
    let residual = shrinker_residual(state, s)?;
    if !(residual < SHRINKER_THRESHOLD) {
        return Err(Error::NotAShrinker { residual });
    }
    let geo = surface_geometry(state, Background::Euclidean)?;
    let grads = mesh_gradients(state, &geo);
    let probe = DensityProbe::new(vec![0.0; state.ambient], 0.0);
    let n = geo.first().map_or(2, |g| g.n);
    let mut spectrum = vec![0.0; n];
    let mut total = 0.0;
    let mut parallel = 0.0;
    for (v, pg) in geo.iter().enumerate() {
        let w = probe.kernel(state.vertex(v), s, n);
        let mut pc: Vec<f64> = pg
            .principal_curvatures()
            .unwrap_or_else(|| vec![0.0; n])
            .iter()
            .map(|x| x.abs())
            .collect();
        pc.sort_by(f64::total_cmp);
        for (acc, x) in spectrum.iter_mut().zip(&pc) {
            *acc += w * x;
        }
        let h2 = pg.norms.h2.max(1e-300);
        let g = grads[v].0;
        if g.is_finite() {
            // |∇h| / |h|^{3/2} is scale free
            parallel += w * g.sqrt() / h2.powf(0.75);
        }
        total += w;
    }
    if !(total > 0.0) {
        return Err(Error::ZeroMeanCurvature("kernel weight vanishes on the state".into()));
    }
    for x in &mut spectrum {
        *x /= total;
    }
    classify_spectrum(&spectrum, residual, parallel / total, s)
}

/// Classification of a rescaled product of spheres (`∇h = 0` exactly).
pub fn classify_shrinker_product(state: &ProductSphereState, offset: &[f64], s: f64) -> Result<ShrinkerClass> {
    let residual = shrinker_residual_product(state, offset, s)?;
    let spectrum: Vec<f64> = state
        .factors
        .iter()
        .flat_map(|&(p, a)| std::iter::repeat(1.0 / a).take(p))
        .collect();
    classify_spectrum(&spectrum, residual, 0.0, s)
}

/// Per-state curvature access used by [`hamilton_blowup`].
pub trait BlowupState: FlowState {
    /// `(position, |H|², |h̊|²)` at each sample point.
    fn curvature_samples(&self, background: Background) -> Result<Vec<(Vec<f64>, f64, f64)>>;
    /// `λ(F − center)`.
    fn rescale_about(&self, lambda: f64, center: &[f64]) -> Self;
}

impl BlowupState for TriMesh<f64> {
    fn curvature_samples(&self, background: Background) -> Result<Vec<(Vec<f64>, f64, f64)>> {
        let geo = surface_geometry(self, background)?;
        Ok(geo
            .iter()
            .enumerate()
            .map(|(v, g)| (self.vertex(v).to_vec(), g.norms.mean2, g.norms.traceless2))
            .collect())
    }
    fn rescale_about(&self, lambda: f64, center: &[f64]) -> Self {
        let mut out = self.rescaled(lambda, center);
        out.time = self.time;
        out
    }
}

impl BlowupState for ProductSphereState {
    fn curvature_samples(&self, _background: Background) -> Result<Vec<(Vec<f64>, f64, f64)>> {
        let m2 = self.mean2();
        let t2 = self.h2() - m2 / self.dim() as f64;
        Ok(vec![(vec![0.0; self.ambient_dim()], m2, t2)])
    }
    /// Homogeneous: only the radii scale.
    fn rescale_about(&self, lambda: f64, _center: &[f64]) -> Self {
        self.scaled(lambda)
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonBlowup<S> {
    pub states: Vec<S>,
    pub lambdas: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    /// `max |h̊|²` of each rescaled state.
    pub traceless2: Vec<f64>,
    /// Last over first entry of `traceless2`.
    pub decay: f64,
}

/// Rescales each state by `λ_k = max|H|` about its maximizing point.
pub fn hamilton_blowup<S: BlowupState>(traj: &FlowTrajectory<S>) -> Result<HamiltonBlowup<S>> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut out = HamiltonBlowup {
        states: Vec::new(),
        lambdas: Vec::new(),
        centers: Vec::new(),
        traceless2: Vec::new(),
        decay: f64::NAN,
    };
    let mut first_m2 = f64::NAN;
    let mut last_m2 = f64::NAN;
    for s in &traj.states {
        let samples = s.curvature_samples(traj.background)?;
        let (center, m2, _) = samples
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .cloned()
            .ok_or(Error::EmptyTrajectory)?;
        if !(m2 > 0.0) {
            return Err(Error::ZeroMeanCurvature("max|H| vanishes".into()));
        }
        if first_m2.is_nan() {
            first_m2 = m2;
        }
        last_m2 = m2;
        let lambda = m2.sqrt();
        let t2 = samples.iter().map(|x| x.2).fold(0.0, f64::max) / m2;
        out.states.push(s.rescale_about(lambda, &center));
        out.lambdas.push(lambda);
        out.centers.push(center);
        out.traceless2.push(t2);
    }
    if !(last_m2 >= BLOWUP_GROWTH * first_m2) {
        return Err(Error::NotBlowingUp(format!("max|H|² grew from {first_m2:.4e} to {last_m2:.4e}")));
    }
    out.decay = out.traceless2[out.traceless2.len() - 1] / out.traceless2[0].max(1e-300);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::exact_product_flow;
    use crate::mesh::shapes;

    #[test]
    fn line_fit_recovers_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b, rms, ..) = line_fit(&t, &y);
        assert!((a - 2.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14 && rms < 1e-14);
    }

    #[test]
    fn sphere_singular_time() {
        let s = ProductSphereState::new(vec![(2, 1.0)], 0.0).unwrap();
        let flow = exact_product_flow(&s, 0.002).unwrap();
        let est = estimate_singular_time(&flow.trajectory).unwrap();
        assert!((est.t_sing - 0.25).abs() < 1e-12, "{est:?}");
        assert!(est.fit_residual < 1e-12);
        let rate = type1_rate(&flow.trajectory, 0.25, DEFAULT_C0).unwrap();
        assert!(rate.delta.iter().all(|d| (d - 1.0).abs() < 1e-10));
        assert!(rate.type_one);
    }

    #[test]
    fn too_few_states() {
        assert!(matches!(
            estimate_singular_time_from(&[(0.0, 1.0); 5]),
            Err(Error::InsufficientStates { found: 5, needed: 6 })
        ));
        assert!(matches!(estimate_singular_time_from(&[(0.0, 1.0); 8]), Err(Error::NotBlowingUp(_))));
    }

    #[test]
    fn polar_integral_gives_sphere_area() {
        for p in 1..=4 {
            let v = unit_sphere_volume(p - 1) * polar_integral(p, 400, |_| 1.0);
            assert!((v - unit_sphere_volume(p)).abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn centered_sphere_density() {
        let s = ProductSphereState::new(vec![(2, 2.0)], 0.0).unwrap();
        let probe = DensityProbe::new(vec![0.0; 3], 1.0);
        let theta = gaussian_density_product(&s, &probe).unwrap();
        assert!((theta - 4.0 / std::f64::consts::E).abs() < 1e-10, "{theta}");
    }

    #[test]
    fn mesh_sphere_density() {
        let mut m = shapes::icosphere::<f64>(5, 2.0, 3);
        m.time = 0.0;
        let probe = DensityProbe::new(vec![0.0; 3], 1.0);
        let d = gaussian_density(&m, &probe).unwrap();
        assert!((d.theta - 4.0 / std::f64::consts::E).abs() < 1e-3, "{d:?}");
    }

    #[test]
    fn sphere_shrinker_residual() {
        let s = ProductSphereState::new(vec![(2, 2.0f64.sqrt())], -0.5).unwrap();
        let r = shrinker_residual_product(&s, &[0.0; 3], -0.5).unwrap();
        assert!(r < 1e-12, "{r}");
        let c = classify_shrinker_product(&s, &[0.0; 3], -0.5).unwrap();
        assert_eq!(c.kind, ShrinkerKind::Sphere(2));
        assert!(c.fit_error < 1e-12);
        let off = shrinker_residual_product(&s, &[0.5, 0.0, 0.0], -0.5).unwrap();
        assert!(off > 0.1, "{off}");
    }

    #[test]
    fn spectrum_cases() {
        let s = -0.5;
        assert_eq!(classify_spectrum(&[0.0, 1.0], 0.0, 0.0, s).unwrap().kind, ShrinkerKind::Cylinder(1, 1));
        assert_eq!(classify_spectrum(&[0.7, 0.71], 0.0, 0.0, s).unwrap().kind, ShrinkerKind::Sphere(2));
        assert_eq!(classify_spectrum(&[0.0, 0.01], 0.0, 0.0, s).unwrap().kind, ShrinkerKind::Plane);
        assert_eq!(classify_spectrum(&[0.3, 0.6, 1.0], 0.0, 0.0, s).unwrap().kind, ShrinkerKind::Unknown);
        assert!(matches!(classify_spectrum(&[1.0, 1.0], 0.2, 0.0, s), Err(Error::NotAShrinker { .. })));
    }

    #[test]
    fn interpolation_out_of_range() {
        let m = shapes::icosphere::<f64>(1, 1.0, 3);
        let mut later = m.clone();
        later.time = 0.1;
        let traj = FlowTrajectory {
            states: vec![m, later],
            diagnostics: Vec::new(),
            background: Background::Euclidean,
            stop: crate::flow::StopReason::User,
        };
        assert!(matches!(interpolate_state(&traj, -0.1), Err(Error::OutOfRange { .. })));
        assert!((interpolate_state(&traj, 0.05).unwrap().time - 0.05).abs() < 1e-15);
    }
}
