//! Run directories: `config.echo`, `diagnostics.csv`, `snap_%05d.hcm`, `report.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{parse_config, RunConfig, SurfaceSource};
use crate::error::{Error, Result};
use crate::flow::{run_mesh_flow, FlowTrajectory, MeshFlowOptions};
use crate::io::{diagnostics_from_csv, diagnostics_to_csv, export_mesh, import_mesh};
use crate::mesh::TriMesh;
use crate::pinch::PinchParams;
use crate::singularity::{estimate_singular_time, gaussian_density, type1_rate, DensityProbe, DEFAULT_C0};
use crate::zoo::{parse_surface, zoo_make};

/// Initial mesh of a configuration.
pub fn initial_mesh(cfg: &RunConfig) -> Result<TriMesh<f64>> {
    match &cfg.surface {
        SurfaceSource::Zoo(spec) => {
            let (name, params) = parse_surface(spec)?;
            zoo_make(&name, &params, cfg.seed)?.mesh(cfg.level)
        }
        SurfaceSource::File(p) => import_mesh(p),
    }
}

pub fn flow_options(cfg: &RunConfig) -> Result<MeshFlowOptions> {
    let mut opts = MeshFlowOptions::new(cfg.background)?;
    opts.scheme = cfg.scheme;
    opts.cfl = cfg.cfl;
    opts.dt_floor = cfg.dt_floor;
    opts.steps = cfg.steps;
    opts.deturck_weight = cfg.deturck_weight;
    opts.normalize = cfg.normalize;
    opts.pinch = PinchParams::new(2, cfg.background)?;
    Ok(opts)
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: FlowTrajectory<TriMesh<f64>>,
    pub out_dir: PathBuf,
    pub report: String,
}

/// Flows the configured surface, tracks `θ` at the final centroid when a
/// singular time can be estimated, and writes the run directory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let initial = initial_mesh(cfg)?;
    let opts = flow_options(cfg)?;
    let mut traj = run_mesh_flow(&initial, &opts)?;
    let mut report = String::new();
    let _ = writeln!(report, "stop = {}", traj.stop.as_str());
    let _ = writeln!(report, "retained_states = {}", traj.states.len());
    let last = traj.states.last().ok_or(Error::EmptyTrajectory)?;
    let _ = writeln!(report, "final_time = {:.16e}", last.time);
    let max_q = traj.diagnostics.iter().map(|d| d.max_q).fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(report, "max_q = {max_q:.6e}");
    match estimate_singular_time(&traj) {
        Ok(est) => {
            let center = last.centroid();
            let probe = DensityProbe::new(center.clone(), est.t_sing);
            for (s, d) in traj.states.iter().zip(traj.diagnostics.iter_mut()) {
                d.theta = gaussian_density(s, &probe).map_or(f64::NAN, |x| x.theta);
            }
            let _ = writeln!(report, "singular_time = {:.10e} +- {:.3e}", est.t_sing, est.ci_half_width);
            if let Ok(rate) = type1_rate(&traj, est.t_sing, DEFAULT_C0) {
                let _ = writeln!(report, "delta_final = {:.6e}", rate.last);
                let _ = writeln!(report, "delta_sup = {:.6e}", rate.sup);
            }
            let coords: Vec<String> = center.iter().map(|x| format!("{x:.10e}")).collect();
            let _ = writeln!(report, "theta_center = {}", coords.join(","));
        }
        Err(e) => {
            let _ = writeln!(report, "singular_time = none ({e})");
        }
    }
    write_run_dir(&cfg.out_dir, cfg, &traj, &report)?;
    Ok(RunOutcome {
        trajectory: traj,
        out_dir: cfg.out_dir.clone(),
        report,
    })
}

pub fn snapshot_name(k: usize) -> String {
    format!("snap_{k:05}.hcm")
}

pub fn write_run_dir(dir: &Path, cfg: &RunConfig, traj: &FlowTrajectory<TriMesh<f64>>, report: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.echo"), cfg.echo())?;
    fs::write(dir.join("diagnostics.csv"), diagnostics_to_csv(&traj.diagnostics))?;
    for (k, s) in traj.states.iter().enumerate() {
        export_mesh(s, &dir.join(snapshot_name(k)))?;
    }
    fs::write(dir.join("report.txt"), report)?;
    Ok(())
}

/// Reads a run directory back into a trajectory.
pub fn load_run(dir: &Path) -> Result<(RunConfig, FlowTrajectory<TriMesh<f64>>)> {
    let cfg = parse_config(&fs::read_to_string(dir.join("config.echo"))?)?;
    let diagnostics = diagnostics_from_csv(&fs::read_to_string(dir.join("diagnostics.csv"))?)?;
    let mut states = Vec::new();
    loop {
        let p = dir.join(snapshot_name(states.len()));
        if !p.exists() {
            break;
        }
        states.push(import_mesh(&p)?);
    }
    if states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let traj = FlowTrajectory {
        states,
        diagnostics,
        background: cfg.background,
        stop: crate::flow::StopReason::User,
    };
    traj.check()?;
    Ok((cfg, traj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("surface = sphere\nlevel = 1\nsteps = 5\nout_dir = {}\n", dir.path().display());
        let cfg = parse_config(&text).unwrap();
        let out = execute(&cfg).unwrap();
        let (back_cfg, traj) = load_run(dir.path()).unwrap();
        assert_eq!(back_cfg, cfg);
        assert_eq!(traj.states.len(), out.trajectory.states.len());
        assert_eq!(traj.states.last().unwrap().positions, out.trajectory.states.last().unwrap().positions);
        assert!(dir.path().join("report.txt").exists());
    }
}
