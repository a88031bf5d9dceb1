use thiserror::Error;

/// Errors raised by the numerical kernel, the analysis and the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (symmetric part {sym_norm:.3e} exceeds {tol:.1e})")]
    NonSkewInput { sym_norm: f64, tol: f64 },

    #[error("rotation angle {angle:.15} is within {margin:.1e} of pi; logarithm is not unique")]
    NearAntipodalRotation { angle: f64, margin: f64 },

    #[error("vector norm {norm:.17} is not 1 within {tol:.1e}")]
    NotUnitVector { norm: f64, tol: f64 },

    #[error("matrix is not a rotation (orthogonality error {orth_err:.3e}, det {det:.17})")]
    NotRotation { orth_err: f64, det: f64 },

    #[error("spherical point (phi={phi}, theta={theta}) outside the open chart")]
    InvalidSphericalPoint { phi: f64, theta: f64 },

    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeExceeded { degree: u32, max: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("adaptive step size underflow at t = {t:.17}")]
    StepSizeUnderflow { t: f64 },

    #[error("trajectory left the polar band at theta = {theta:.6} (phi = {phi:.6})")]
    PolarBandExit { theta: f64, phi: f64 },

    #[error("d(theta)/dt = {rate:.3e} at theta = {theta:.6} is not sign-definite; the angle clock is invalid")]
    DegenerateClock { theta: f64, rate: f64 },

    #[error("chart point ({x1}, {x2}) is outside the chart domain")]
    ChartDomainExceeded { x1: f64, x2: f64 },

    #[error("Newton iteration did not converge: {0}")]
    NewtonDivergence(String),

    #[error("stability criterion says {criterion} but the eigenvalues say {eigen}")]
    StabilityCriterionMismatch { criterion: String, eigen: String },

    #[error("fixed-point secant slope degenerated ({slope:.3e}); root is not simple")]
    NonSimpleRoot { slope: f64 },

    #[error("conjugated generator is {residual:.3e} off the symmetry axis")]
    OffAxisResidualExceeded { residual: f64 },

    #[error("monodromy factor moves the symmetry axis by {defect:.3e}")]
    MonodromyNotAboutQ { defect: f64 },

    #[error("drift frequency branch is ambiguous (candidates {a:.6e} and {b:.6e})")]
    AmbiguousBranch { a: f64, b: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
