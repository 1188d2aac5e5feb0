use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("jacobian is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("vertex {vertex} has only {found} neighbours within the fitting ring")]
    InsufficientNeighbors { vertex: usize, found: usize },
    #[error("quadratic fit at vertex {vertex} is ill-conditioned (condition number {condition:e})")]
    IllConditionedFit { vertex: usize, condition: f64 },
    #[error("mean curvature vanishes: {0}")]
    ZeroMeanCurvature(String),
    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("vertex {vertex} is off the ambient sphere (relative error {error:e})")]
    OffSphere { vertex: usize, error: f64 },
    #[error("mesh is not closed: {0}")]
    OpenMesh(String),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("trajectory holds {found} states, {needed} are required")]
    InsufficientStates { found: usize, needed: usize },
    #[error("mesh graph is disconnected")]
    Disconnected,
    #[error("flow is not blowing up: {0}")]
    NotBlowingUp(String),
    #[error("requested time {requested} precedes trajectory start {start}")]
    OutOfRange { requested: f64, start: f64 },
    #[error("state is not a self-shrinker (residual {residual:e})")]
    NotAShrinker { residual: f64 },
    #[error("unknown zoo entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown configuration key `{key}` on line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: malformed mesh file: {message}")]
    FormatError { line: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
