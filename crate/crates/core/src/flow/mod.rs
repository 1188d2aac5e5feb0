//! Mean curvature flow: exact symmetric solutions and triangle-mesh flows
//! in Euclidean space and in round spheres.

mod exact;
mod mesh_flow;

pub use exact::{
    exact_geodesic_sphere_flow_in_sphere, exact_product_flow, unit_sphere_volume, GeodesicFlow,
    GeodesicFlowOptions, GeodesicSphereState, ProductFlow, ProductSphereState,
};
pub use mesh_flow::{
    adaptive_dt, adaptive_dt_from, deturck_regularize, deturck_regularize_spherical, max_h2, mesh_step,
    sphere_deviation, spherical_mesh_step, Scheme, SphericalStep, DEFAULT_CFL, DEFAULT_DT_FLOOR,
};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::pinch::{DiagnosticsRecord, PinchParams};

/// Ambient space of the flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Background {
    Euclidean,
    /// Round sphere of curvature `K̄ > 0`, centred at the origin.
    Sphere(f64),
}

impl Background {
    pub fn k_bar(&self) -> f64 {
        match self {
            Background::Euclidean => 0.0,
            Background::Sphere(k) => *k,
        }
    }
}

impl std::fmt::Display for Background {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Background::Euclidean => write!(f, "euclidean"),
            Background::Sphere(k) => write!(f, "sphere:{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Extinction,
    BlowUpThreshold,
    StepBudget,
    /// Requested end time reached.
    User,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Extinction => "extinction",
            StopReason::BlowUpThreshold => "blowup-threshold",
            StopReason::StepBudget => "step-budget",
            StopReason::User => "user",
        }
    }
}

/// State types carried by a trajectory.
pub trait FlowState: Clone {
    fn time(&self) -> f64;
    /// The state scaled by `s` about the origin.
    fn scaled(&self, s: f64) -> Self;
}

impl FlowState for TriMesh<f64> {
    fn time(&self) -> f64 {
        self.time
    }
    fn scaled(&self, s: f64) -> Self {
        let mut out = self.rescaled(s, &vec![0.0; self.ambient]);
        out.time = self.time;
        out
    }
}

/// Retained states of a flow with one diagnostics record per state
/// (diagnostics may be empty for engines that do not compute them).
#[derive(Clone, Debug)]
pub struct FlowTrajectory<S> {
    pub states: Vec<S>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub background: Background,
    pub stop: StopReason,
}

impl<S: FlowState> FlowTrajectory<S> {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(FlowState::time).collect()
    }

    /// Strictly increasing times, diagnostics aligned with states.
    pub fn check(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let t = self.times();
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadParams("trajectory times are not strictly increasing".into()));
        }
        if !self.diagnostics.is_empty() && self.diagnostics.len() != self.states.len() {
            return Err(Error::BadParams("diagnostics do not match retained states".into()));
        }
        Ok(())
    }
}

/// Spatial scale, normalized time and average curvature of the area-normalized flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedState {
    pub time: f64,
    /// `ψ = (|Σ₀| / |Σ_t|)^{1/n}`.
    pub psi: f64,
    /// `t̃ = ∫ ψ² dt` (trapezoid rule over the retained states).
    pub t_tilde: f64,
    /// `ħ = ∫|H|² dμ / |Σ_t|` of the unnormalized state.
    pub hbar: f64,
    pub area0: f64,
}

impl NormalizedState {
    /// `ħ` of the normalized state, `ψ⁻² ħ`.
    pub fn hbar_normalized(&self) -> f64 {
        self.hbar / (self.psi * self.psi)
    }
}

/// Rescales each retained state by `ψ` so that its area equals the initial area.
pub fn normalize_trajectory<S: FlowState>(
    traj: &FlowTrajectory<S>,
    dim: usize,
) -> Result<Vec<(NormalizedState, S)>> {
    if traj.states.is_empty() || traj.diagnostics.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let area0 = traj.diagnostics[0].area;
    let mut out: Vec<(NormalizedState, S)> = Vec::with_capacity(traj.states.len());
    let mut t_tilde = 0.0;
    for (k, (s, d)) in traj.states.iter().zip(&traj.diagnostics).enumerate() {
        if !(d.area > 0.0) {
            return Err(Error::BadParams(format!("non-positive area at state {k}")));
        }
        let psi = (area0 / d.area).powf(1.0 / dim as f64);
        if let Some((prev, _)) = out.last() {
            t_tilde += 0.5 * (prev.psi * prev.psi + psi * psi) * (s.time() - prev.time);
        }
        let ns = NormalizedState {
            time: s.time(),
            psi,
            t_tilde,
            hbar: d.hbar,
            area0,
        };
        out.push((ns, s.scaled(psi)));
    }
    Ok(out)
}

/// Settings of [`run_mesh_flow`].
#[derive(Clone, Debug)]
pub struct MeshFlowOptions {
    pub background: Background,
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_floor: f64,
    /// Step budget.
    pub steps: usize,
    pub deturck_weight: f64,
    /// Flow stops when the worst face quality drops below this value.
    pub min_quality: f64,
    /// Optional end time.
    pub t_max: Option<f64>,
    /// Fixed step overriding the adaptive rule.
    pub fixed_dt: Option<f64>,
    pub pinch: PinchParams,
    /// Exponent of the tracked `L^p` norm of `f_σ`.
    pub lp: f64,
    /// Fill the `psi` column relative to the initial area.
    pub normalize: bool,
}

impl MeshFlowOptions {
    pub fn new(background: Background) -> Result<Self> {
        Ok(MeshFlowOptions {
            background,
            scheme: Scheme::SemiImplicit,
            cfl: DEFAULT_CFL,
            dt_floor: DEFAULT_DT_FLOOR,
            steps: 1000,
            deturck_weight: 0.0,
            min_quality: 0.05,
            t_max: None,
            fixed_dt: None,
            pinch: PinchParams::new(2, background)?,
            lp: crate::pinch::DEFAULT_P,
            normalize: false,
        })
    }
}

/// Retention cadence `ceil(steps / 256)`.
pub fn retention_cadence(steps: usize) -> usize {
    steps.div_ceil(256).max(1)
}

/// Flows a closed surface mesh, retaining every `ceil(steps/256)`-th state
/// and the last accepted one, with diagnostics for each retained state.
pub fn run_mesh_flow(initial: &TriMesh<f64>, opts: &MeshFlowOptions) -> Result<FlowTrajectory<TriMesh<f64>>> {
    initial.validate()?;
    if !(opts.cfl > 0.0) || !(opts.dt_floor > 0.0) {
        return Err(Error::BadParams("cfl and dt_floor must be positive".into()));
    }
    if let Background::Sphere(k) = opts.background {
        let dev = sphere_deviation(initial, k);
        if !(dev <= 1e-8) {
            return Err(Error::OffSphere { vertex: 0, error: dev });
        }
    }
    let blowup = 1.0 / (2.0 * opts.dt_floor);
    let cadence = retention_cadence(opts.steps);
    let mut state = initial.clone();
    let mut h2 = max_h2(&state)?;
    let mut retained = vec![state.clone()];
    let mut stop = StopReason::StepBudget;
    for step in 1..=opts.steps {
        if let Some(t_max) = opts.t_max {
            if state.time >= t_max - 1e-14 * t_max.abs().max(1.0) {
                stop = StopReason::User;
                break;
            }
        }
        let mut dt = opts.fixed_dt.unwrap_or_else(|| adaptive_dt_from(h2, opts.cfl, opts.dt_floor));
        if let Some(t_max) = opts.t_max {
            dt = dt.min(t_max - state.time);
        }
        let stepped = match opts.background {
            Background::Euclidean => mesh_step(&state, dt, opts.scheme),
            Background::Sphere(k) => spherical_mesh_step(&state, dt, k, opts.scheme).map(|s| s.state),
        };
        let mut next = match stepped {
            Ok(s) => s,
            Err(Error::DegenerateFace { .. }) | Err(Error::SolverFailure(_)) => {
                stop = StopReason::BlowUpThreshold;
                break;
            }
            Err(e) => return Err(e),
        };
        if opts.deturck_weight > 0.0 {
            next = match opts.background {
                Background::Euclidean => deturck_regularize(&next, opts.deturck_weight),
                Background::Sphere(k) => deturck_regularize_spherical(&next, opts.deturck_weight, k),
            };
        }
        if next.min_face_quality() < opts.min_quality || next.check_faces().is_err() {
            stop = StopReason::BlowUpThreshold;
            break;
        }
        match max_h2(&next) {
            Ok(v) if v.is_finite() && v <= blowup => h2 = v,
            Ok(_) | Err(Error::IllConditionedFit { .. }) | Err(Error::RankDeficient { .. }) => {
                stop = StopReason::BlowUpThreshold;
                break;
            }
            Err(e) => return Err(e),
        }
        state = next;
        if step % cadence == 0 {
            retained.push(state.clone());
        }
    }
    if retained.last().map(|s| s.time) != Some(state.time) {
        retained.push(state);
    }
    let area0 = retained[0].area();
    let mut diagnostics = Vec::with_capacity(retained.len());
    for s in &retained {
        let mut d = DiagnosticsRecord::for_mesh(s, &opts.pinch, opts.lp)?;
        if opts.normalize {
            d.psi = (area0 / d.area).powf(0.5);
        }
        diagnostics.push(d);
    }
    Ok(FlowTrajectory {
        states: retained,
        diagnostics,
        background: opts.background,
        stop,
    })
}
