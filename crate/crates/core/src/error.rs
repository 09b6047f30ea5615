use thiserror::Error;

/// Every failure the library reports. `code()` gives a stable identifier
/// used in machine-readable output.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("boundaries cross or touch at node {node} (layers {outer} and {inner})")]
    NestingViolation {
        outer: usize,
        inner: usize,
        node: usize,
    },
    #[error("quadrature under-resolved: {0}")]
    QuadratureUnderresolved(String),
    #[error("closure radicand is not positive ({0:e})")]
    NegativeRadicand(f64),
    #[error("closed inner radius {b3} is not inside b2 = {b2}")]
    NotNested { b3: f64, b2: f64 },
    #[error("point ({x}, {y}) lies within the standoff distance of boundary {layer}")]
    PointOnBoundary { x: f64, y: f64, layer: usize },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("b = {b} is not below the critical radius {critical} for m = {m}")]
    BTooLarge { b: f64, m: usize, critical: f64 },
    #[error("Θ = {theta} is not a root of the dispersion polynomial (residual {residual:e})")]
    NotARoot { theta: f64, residual: f64 },
    #[error("parameters outside the admissible window: {0}")]
    ParamWindow(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("degenerate bifurcation: {0}")]
    Degenerate(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },
    #[error("T_s is rank deficient (condition estimate {condition:e})")]
    TsSingular { condition: f64 },
    #[error("Θ = b² gives zero total vorticity; Δ_m(b²) = {delta:e} so no bifurcation occurs there")]
    ZeroMeanNoBifurcation { delta: f64 },
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NestingViolation { .. } => "NESTING_VIOLATION",
            Error::QuadratureUnderresolved(_) => "QUADRATURE_UNDERRESOLVED",
            Error::NegativeRadicand(_) => "NEGATIVE_RADICAND",
            Error::NotNested { .. } => "NOT_NESTED",
            Error::PointOnBoundary { .. } => "POINT_ON_BOUNDARY",
            Error::Domain(_) => "DOMAIN",
            Error::BTooLarge { .. } => "B_TOO_LARGE",
            Error::NotARoot { .. } => "NOT_A_ROOT",
            Error::ParamWindow(_) => "PARAM_WINDOW",
            Error::NoRoot(_) => "NO_ROOT",
            Error::Degenerate(_) => "DEGENERATE",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::SingularJacobian { .. } => "SINGULAR_JACOBIAN",
            Error::TsSingular { .. } => "T_S_SINGULAR",
            Error::ZeroMeanNoBifurcation { .. } => "ZERO_MEAN_NO_BIFURCATION",
            Error::Io(_) => "IO",
            Error::Config(_) => "CONFIG",
        }
    }

    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::BTooLarge { .. }
            | Error::ParamWindow(_)
            | Error::NoRoot(_)
            | Error::NegativeRadicand(_)
            | Error::NotNested { .. }
            | Error::ZeroMeanNoBifurcation { .. }
            | Error::NotARoot { .. }
            | Error::Config(_) => 2,
            Error::Io(_) => 3,
            Error::NoConvergence { .. }
            | Error::SingularJacobian { .. }
            | Error::TsSingular { .. }
            | Error::NestingViolation { .. } => 4,
            Error::Degenerate(_)
            | Error::QuadratureUnderresolved(_)
            | Error::PointOnBoundary { .. } => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
