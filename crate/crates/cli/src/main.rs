use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hicoflow::config::parse_config;
use hicoflow::identity::{verify, IdentityKind};
use hicoflow::io::{export_mesh, write_table};
use hicoflow::run::{execute, load_run};
use hicoflow::singularity::{
    classify_shrinker, estimate_singular_time, monotonicity_check, parabolic_rescale, shrinker_residual, DensityProbe,
    RescaleSpec,
};
use hicoflow::zoo::{parse_surface, zoo_make, ZOO_NAMES};

#[derive(Parser)]
#[command(name = "hicoflow", version, about = "Mean curvature flow lab for submanifolds of any codimension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check structure identities on a zoo immersion.
    Verify {
        /// Zoo surface, `name[:key=value,...]`.
        #[arg(long)]
        immersion: String,
        /// laplace, gauss, codazzi, simons or all.
        #[arg(long, default_value = "all")]
        identity: String,
        /// Cells per chart axis setting the stencil step.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Flow a surface as described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parabolically rescale a stored run and classify the blow-ups.
    Rescale {
        #[arg(long)]
        traj: PathBuf,
        /// `auto` (final centroid) or comma-separated coordinates.
        #[arg(long, default_value = "auto")]
        center: String,
        /// Comma-separated times before the singular time.
        #[arg(long)]
        times: String,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        s: f64,
        /// `auto` or a value for the singular time.
        #[arg(long = "T", default_value = "auto")]
        t_sing: String,
    },
    /// Gaussian density along a stored run.
    Density {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value = "auto")]
        center: String,
        #[arg(long = "T", default_value = "auto")]
        t_sing: String,
    },
    /// Inspect the surface zoo.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List,
    Show {
        /// Zoo surface, `name[:key=value,...]`.
        name: String,
    },
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("invalid number {x:?}")))
        .collect()
}

fn resolve_center(text: &str, auto: &[f64]) -> Result<Vec<f64>> {
    if text == "auto" {
        return Ok(auto.to_vec());
    }
    let c = parse_list(text)?;
    if c.len() != auto.len() {
        bail!("center has {} coordinates, the surface lives in R^{}", c.len(), auto.len());
    }
    Ok(c)
}

fn resolve_time(text: &str, traj: &hicoflow::flow::FlowTrajectory<hicoflow::mesh::TriMesh<f64>>) -> Result<f64> {
    if text == "auto" {
        Ok(estimate_singular_time(traj)?.t_sing)
    } else {
        text.parse().with_context(|| format!("invalid singular time {text:?}"))
    }
}

fn cmd_verify(immersion: &str, identity: &str, grid: usize, seed: u64) -> Result<bool> {
    let (name, params) = parse_surface(immersion)?;
    let entry = zoo_make(&name, &params, seed)?;
    let mut all = true;
    for kind in IdentityKind::parse(identity)? {
        let r = verify::<f64, _>(entry.immersion.as_ref(), kind, grid)?;
        println!("{r}");
        all &= r.pass;
    }
    Ok(all)
}

fn cmd_run(config: &Path) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = parse_config(&text)?;
    let out = execute(&cfg)?;
    print!("{}", out.report);
    println!("wrote {}", out.out_dir.display());
    Ok(())
}

fn cmd_rescale(dir: &Path, center: &str, times: &str, s: f64, t_sing: &str) -> Result<()> {
    let (_, traj) = load_run(dir)?;
    let last = traj.states.last().expect("load_run returns states");
    let center = resolve_center(center, &last.centroid())?;
    let t = resolve_time(t_sing, &traj)?;
    let spec = RescaleSpec::new(center, t, parse_list(times)?)?;
    let rescaled = parabolic_rescale(&traj, &spec, s)?;
    let mut rows = Vec::new();
    for (k, state) in rescaled.iter().enumerate() {
        export_mesh(state, &dir.join(format!("rescaled_{k:02}.hcm")))?;
        let residual = shrinker_residual(state, s)?;
        let (class, fit) = match classify_shrinker(state, s) {
            Ok(c) => (c.kind.to_string(), format!("{:.6e}", c.fit_error)),
            Err(_) => ("none".to_string(), "nan".to_string()),
        };
        println!("t = {:.10e}  lambda = {:.4e}  residual = {residual:.4e}  class = {class}", spec.times[k], spec.lambdas[k]);
        rows.push(vec![format!("{s}"), format!("{residual:.6e}"), class, fit]);
    }
    write_table(&dir.join("shrinker.csv"), "s,residual,class,fit_error", &rows)?;
    Ok(())
}

fn cmd_density(dir: &Path, center: &str, t_sing: &str) -> Result<()> {
    let (_, traj) = load_run(dir)?;
    let last = traj.states.last().expect("load_run returns states");
    let center = resolve_center(center, &last.centroid())?;
    let t0 = resolve_time(t_sing, &traj)?;
    let mut probe = DensityProbe::new(center, t0);
    let report = monotonicity_check(&traj, &mut probe, 1e-3)?;
    let rows: Vec<Vec<String>> = report
        .samples
        .iter()
        .map(|(t, th)| vec![format!("{t:.16e}"), format!("{th:.16e}")])
        .collect();
    write_table(&dir.join("density.csv"), "t,theta", &rows)?;
    println!(
        "t0 = {t0:.10e}  samples = {}  nonincreasing = {}",
        report.samples.len(),
        if report.pass { "yes" } else { "no" }
    );
    Ok(())
}

fn cmd_zoo(action: &ZooAction) -> Result<()> {
    match action {
        ZooAction::List => {
            for name in ZOO_NAMES {
                println!("{name}");
            }
        }
        ZooAction::Show { name } => {
            let (n, params) = parse_surface(name)?;
            let e = zoo_make(&n, &params, 0)?;
            let domain = e.immersion.domain();
            println!("name: {}", e.name);
            for (k, v) in &e.params.0 {
                println!("param {k} = {v}");
            }
            println!("dimension: {}", domain.dim());
            println!("ambient: {}", e.immersion.ambient_dim());
            println!("mesh: {}", if e.has_mesh() { "yes" } else { "no" });
            for kv in &e.known {
                println!("known {} = {:.12e} ({})", kv.label, kv.value, kv.provenance.as_str());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { immersion, identity, grid, seed } => cmd_verify(immersion, identity, *grid, *seed).map(|ok| {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }),
        Command::Run { config } => cmd_run(config).map(|_| ExitCode::SUCCESS),
        Command::Rescale { traj, center, times, s, t_sing } => {
            cmd_rescale(traj, center, times, *s, t_sing).map(|_| ExitCode::SUCCESS)
        }
        Command::Density { traj, center, t_sing } => cmd_density(traj, center, t_sing).map(|_| ExitCode::SUCCESS),
        Command::Zoo { action } => cmd_zoo(action).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
