use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),

    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),

    #[error("invalid k-grid: {0}")]
    InvalidGrid(String),

    #[error("k-grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid does not cover the packet: {0}")]
    Coverage(String),

    #[error("phase unwrap failed on k in [{lo}, {hi}]: raw step {step:.4} rad has no consistent branch (refine the grid)")]
    PhaseUnwrap { lo: f64, hi: f64, step: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{channel} channel is empty (norm {norm:e})")]
    ChannelEmpty { channel: &'static str, norm: f64 },

    #[error("packet has zero norm")]
    EmptyPacket,

    #[error("no closed-form position law for a {role} packet")]
    NoPositionLaw { role: &'static str },

    #[error("packet modulus vanishes on {fraction:.3} of the grid")]
    DegenerateModulus { fraction: f64 },

    #[error("negative variance coefficient sigma = {0:e}")]
    NegativeVariance(f64),

    #[error("{0} is only defined for left-side incidence")]
    RightSideUnsupported(&'static str),

    #[error("geometry precondition violated: {0}")]
    Geometry(String),

    #[error("time step too coarse: {0}")]
    StepSize(String),

    #[error("propagation domain too small: {0}")]
    Domain(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
