//! Closed-form and ODE flows of symmetric families.

use super::{Background, FlowState, FlowTrajectory, StopReason};
use crate::error::{Error, Result};
use crate::pinch::{DiagnosticsRecord, PinchParams};
use crate::zoo::ProductSpheres;

/// `S^{p_1}(a_1) × … × S^{p_m}(a_m)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSphereState {
    /// `(p_i, a_i)` per factor.
    pub factors: Vec<(usize, f64)>,
    pub time: f64,
}

impl ProductSphereState {
    pub fn new(factors: Vec<(usize, f64)>, time: f64) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&(p, a)| p == 0 || !(a > 0.0)) {
            return Err(Error::BadParams("every factor needs p ≥ 1 and a > 0".into()));
        }
        if factors.iter().map(|f| f.0).sum::<usize>() < 2 {
            return Err(Error::BadParams("total dimension must be at least 2".into()));
        }
        Ok(ProductSphereState { factors, time })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.0).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.0 + 1).sum()
    }

    /// Radii after flowing for an additional time `dt` (`NaN` past extinction).
    pub fn radii_after(&self, dt: f64) -> Vec<f64> {
        self.factors
            .iter()
            .map(|&(p, a)| {
                let r2 = a * a - 2.0 * p as f64 * dt;
                if r2 >= 0.0 {
                    r2.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect()
    }

    /// Time of the first factor extinction and the indices of the factors
    /// vanishing there.
    pub fn first_extinction(&self) -> (f64, Vec<usize>) {
        let times: Vec<f64> = self.factors.iter().map(|&(p, a)| a * a / (2.0 * p as f64)).collect();
        let first = times.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * first.max(1e-300);
        let vanishing = (0..times.len()).filter(|&i| times[i] - first <= tol).collect();
        (self.time + first, vanishing)
    }

    pub fn h2(&self) -> f64 {
        self.factors.iter().map(|&(p, a)| p as f64 / (a * a)).sum()
    }

    pub fn mean2(&self) -> f64 {
        self.factors.iter().map(|&(p, a)| (p * p) as f64 / (a * a)).sum()
    }

    /// `Π |S^{p_i}| a_i^{p_i}`.
    pub fn area(&self) -> f64 {
        self.factors
            .iter()
            .map(|&(p, a)| unit_sphere_volume(p) * a.powi(p as i32))
            .product()
    }

    pub fn immersion(&self) -> ProductSpheres {
        ProductSpheres::new(self.factors.clone())
    }
}

/// Volume of the unit sphere `S^p`.
pub fn unit_sphere_volume(p: usize) -> f64 {
    use std::f64::consts::PI;
    // |S^p| = 2π^{(p+1)/2} / Γ((p+1)/2), by recursion |S^p| = 2π/(p−1) |S^{p−2}|
    match p {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (p as f64 - 1.0) * unit_sphere_volume(p - 2),
    }
}

impl FlowState for ProductSphereState {
    fn time(&self) -> f64 {
        self.time
    }
    fn scaled(&self, s: f64) -> Self {
        ProductSphereState {
            factors: self.factors.iter().map(|&(p, a)| (p, a * s)).collect(),
            time: self.time,
        }
    }
}

/// Output of [`exact_product_flow`].
#[derive(Clone, Debug)]
pub struct ProductFlow {
    pub trajectory: FlowTrajectory<ProductSphereState>,
    /// Time of the first factor extinction.
    pub extinction_time: f64,
    /// Factors whose radius vanishes at the extinction time.
    pub vanishing: Vec<usize>,
    /// Surviving factors `(p_i, a_i(T))`; empty when the flow shrinks to a point.
    pub collapse_target: Vec<(usize, f64)>,
}

/// Exact flow `a_i(t) = √(a_i(0)² − 2 p_i t)`, sampled every `record_dt`
/// strictly before the first extinction.
pub fn exact_product_flow(initial: &ProductSphereState, record_dt: f64) -> Result<ProductFlow> {
    if !(record_dt > 0.0) {
        return Err(Error::BadParams(format!("record_dt must be positive, got {record_dt}")));
    }
    let (t_ext, vanishing) = initial.first_extinction();
    let params = PinchParams::new(initial.dim(), Background::Euclidean)?;
    let mut states = Vec::new();
    let mut diagnostics = Vec::new();
    let mut k = 0usize;
    loop {
        let dt = k as f64 * record_dt;
        let t = initial.time + dt;
        if t >= t_ext {
            break;
        }
        let radii = initial.radii_after(dt);
        let factors: Vec<(usize, f64)> = initial.factors.iter().zip(&radii).map(|(&(p, _), &a)| (p, a)).collect();
        let state = ProductSphereState { factors, time: t };
        diagnostics.push(DiagnosticsRecord::for_product(&state, &params));
        states.push(state);
        k += 1;
    }
    let radii_at_t = initial.radii_after(t_ext - initial.time);
    let collapse_target = initial
        .factors
        .iter()
        .enumerate()
        .filter(|(i, _)| !vanishing.contains(i))
        .map(|(i, &(p, _))| (p, radii_at_t[i]))
        .collect();
    Ok(ProductFlow {
        trajectory: FlowTrajectory {
            states,
            diagnostics,
            background: Background::Euclidean,
            stop: StopReason::Extinction,
        },
        extinction_time: t_ext,
        vanishing,
        collapse_target,
    })
}

/// Geodesic sphere of intrinsic radius `rho` in the round sphere of curvature `k_bar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicSphereState {
    pub n: usize,
    pub k_bar: f64,
    pub rho: f64,
    pub time: f64,
}

impl GeodesicSphereState {
    /// Principal curvature `√K̄ cot(√K̄ ρ)` inside the sphere.
    pub fn principal_curvature(&self) -> f64 {
        let s = self.k_bar.sqrt();
        s / (s * self.rho).tan()
    }

    /// `|h|²` relative to the ambient sphere.
    pub fn h2(&self) -> f64 {
        self.n as f64 * self.principal_curvature().powi(2)
    }
}

impl FlowState for GeodesicSphereState {
    fn time(&self) -> f64 {
        self.time
    }
    /// Scaling is not a symmetry of the spherical background; returns the state unchanged.
    fn scaled(&self, _s: f64) -> Self {
        *self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicFlowOptions {
    /// Step `dt = cfl / max(|h|², floor)` capped by `record_dt`.
    pub cfl: f64,
    pub dt_floor: f64,
    pub record_dt: f64,
    pub t_max: f64,
    /// Integration stops once `ρ` falls below `rho_stop × ρ₀`.
    pub rho_stop: f64,
}

impl Default for GeodesicFlowOptions {
    fn default() -> Self {
        GeodesicFlowOptions {
            cfl: 0.01,
            dt_floor: 1e-8,
            record_dt: 0.01,
            t_max: 10.0,
            rho_stop: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicFlow {
    pub trajectory: FlowTrajectory<GeodesicSphereState>,
    /// Extinction time estimate (`None` when the sphere did not shrink away within `t_max`).
    pub extinction_time: Option<f64>,
}

/// Integrates `ρ' = −n√K̄ cot(√K̄ ρ)` with classical RK4.
pub fn exact_geodesic_sphere_flow_in_sphere(
    rho0: f64,
    n: usize,
    k_bar: f64,
    opts: &GeodesicFlowOptions,
) -> Result<GeodesicFlow> {
    if !(k_bar > 0.0) {
        return Err(Error::DomainError(format!("K̄ must be positive, got {k_bar}")));
    }
    let s = k_bar.sqrt();
    let equator = std::f64::consts::FRAC_PI_2 / s;
    if !(rho0 > 0.0 && rho0 <= equator * (1.0 + 1e-15)) {
        return Err(Error::DomainError(format!("ρ₀ = {rho0} outside (0, {equator}]")));
    }
    let nf = n as f64;
    let rhs = |rho: f64| -nf * s / (s * rho).tan();
    let mut state = GeodesicSphereState { n, k_bar, rho: rho0, time: 0.0 };
    let mut states = vec![state];
    let mut next_record = opts.record_dt;
    let mut extinction_time = None;
    let mut stop = StopReason::StepBudget;
    while state.time < opts.t_max {
        if state.rho < opts.rho_stop * rho0 {
            // remaining time −ln cos(√K̄ρ)/(nK̄) expanded for small ρ
            let r2 = state.rho * state.rho;
            extinction_time = Some(state.time + r2 / (2.0 * nf) + k_bar * r2 * r2 / (12.0 * nf));
            stop = StopReason::Extinction;
            break;
        }
        let dt = (opts.cfl / state.h2().max(opts.dt_floor))
            .min(opts.record_dt)
            .min(opts.t_max - state.time);
        let rho = state.rho;
        let k1 = rhs(rho);
        let k2 = rhs(rho + 0.5 * dt * k1);
        let k3 = rhs(rho + 0.5 * dt * k2);
        let k4 = rhs(rho + dt * k3);
        state.rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        state.time += dt;
        if !(state.rho > 0.0) {
            return Err(Error::SolverFailure("step overshot the extinction".into()));
        }
        if state.time >= next_record - 1e-15 || state.rho < opts.rho_stop * rho0 {
            states.push(state);
            while next_record <= state.time + 1e-15 {
                next_record += opts.record_dt;
            }
        }
    }
    if states.last().map(|s| s.time) != Some(state.time) {
        states.push(state);
    }
    Ok(GeodesicFlow {
        trajectory: FlowTrajectory {
            states,
            diagnostics: Vec::new(),
            background: Background::Sphere(k_bar),
            stop,
        },
        extinction_time,
    })
}
