//! `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::flow::{Background, Scheme, DEFAULT_CFL, DEFAULT_DT_FLOOR};

/// Initial surface of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSource {
    /// Zoo surface spec `name[:key=value,...]`.
    Zoo(String),
    /// Mesh file in `.hcm` format.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceSource,
    /// Mesh refinement level of zoo surfaces.
    pub level: usize,
    pub background: Background,
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_floor: f64,
    pub steps: usize,
    pub normalize: bool,
    pub deturck_weight: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            surface: SurfaceSource::Zoo("sphere".into()),
            level: 3,
            background: Background::Euclidean,
            scheme: Scheme::SemiImplicit,
            cfl: DEFAULT_CFL,
            dt_floor: DEFAULT_DT_FLOOR,
            steps: 200,
            normalize: false,
            deturck_weight: 0.0,
            out_dir: PathBuf::from("run"),
            seed: 0,
        }
    }
}

pub const CONFIG_KEYS: [&str; 11] = [
    "surface",
    "level",
    "background",
    "scheme",
    "cfl",
    "dt_floor",
    "steps",
    "normalize",
    "deturck_weight",
    "out_dir",
    "seed",
];

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("invalid value {v:?} for {key}"),
    })
}

pub fn parse_background(v: &str) -> Result<Background> {
    if v == "euclidean" {
        return Ok(Background::Euclidean);
    }
    let k = v
        .strip_prefix("sphere:")
        .and_then(|k| k.parse::<f64>().ok())
        .ok_or_else(|| Error::BadParams(format!("background {v:?}: expected euclidean or sphere:K")))?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::BadParams(format!("sphere curvature must be positive, got {k}")));
    }
    Ok(Background::Sphere(k))
}

pub fn parse_scheme(v: &str) -> Result<Scheme> {
    match v {
        "semi-implicit" | "semi_implicit" | "implicit" => Ok(Scheme::SemiImplicit),
        "explicit" => Ok(Scheme::Explicit),
        _ => Err(Error::BadParams(format!("unknown scheme {v:?}"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment. Missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::ParseError {
            line,
            message: format!("expected `key = value`, found {body:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(Error::ParseError { line, message: format!("missing value for {key}") });
        }
        match key {
            "surface" => {
                cfg.surface = match value.strip_prefix("file:") {
                    Some(p) => SurfaceSource::File(PathBuf::from(p)),
                    None => SurfaceSource::Zoo(value.to_string()),
                }
            }
            "level" => cfg.level = parse_num(line, key, value)?,
            "background" => cfg.background = parse_background(value)?,
            "scheme" => cfg.scheme = parse_scheme(value)?,
            "cfl" => cfg.cfl = parse_num(line, key, value)?,
            "dt_floor" => cfg.dt_floor = parse_num(line, key, value)?,
            "steps" => cfg.steps = parse_num(line, key, value)?,
            "normalize" => {
                cfg.normalize = match value {
                    "on" | "true" => true,
                    "off" | "false" => false,
                    _ => return Err(Error::ParseError { line, message: format!("normalize expects on|off, found {value:?}") }),
                }
            }
            "deturck_weight" => cfg.deturck_weight = parse_num(line, key, value)?,
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            "seed" => cfg.seed = parse_num(line, key, value)?,
            _ => return Err(Error::UnknownKey { line, key: key.to_string() }),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::BadParams(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.dt_floor > 0.0 && self.dt_floor.is_finite()) {
            return Err(Error::BadParams(format!("dt_floor must be positive, got {}", self.dt_floor)));
        }
        if !(self.deturck_weight >= 0.0 && self.deturck_weight <= 1.0) {
            return Err(Error::BadParams(format!("deturck_weight must lie in [0, 1], got {}", self.deturck_weight)));
        }
        if self.steps == 0 {
            return Err(Error::BadParams("steps must be positive".into()));
        }
        if self.level > 7 {
            return Err(Error::BadParams(format!("level {} is too fine", self.level)));
        }
        Ok(())
    }

    /// Effective configuration, one `key = value` line per key.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let surface = match &self.surface {
            SurfaceSource::Zoo(z) => z.clone(),
            SurfaceSource::File(p) => format!("file:{}", p.display()),
        };
        let _ = writeln!(s, "surface = {surface}");
        let _ = writeln!(s, "level = {}", self.level);
        let _ = writeln!(s, "background = {}", self.background);
        let _ = writeln!(s, "scheme = {}", self.scheme.as_str());
        let _ = writeln!(s, "cfl = {:?}", self.cfl);
        let _ = writeln!(s, "dt_floor = {:?}", self.dt_floor);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "normalize = {}", if self.normalize { "on" } else { "off" });
        let _ = writeln!(s, "deturck_weight = {:?}", self.deturck_weight);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
