use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the domain ball of radius {radius}")]
    Domain { point: String, radius: f64 },

    #[error("operator undefined: gradient vanishes at {point}")]
    ZeroGradient { point: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "dimension {0} not supported by the deterministic ball quadrature (n <= 4); use Monte Carlo sampling instead"
    )]
    UnsupportedDimension(usize),

    #[error("{failed} of {total} paths exceeded the cap of {cap} steps")]
    Nontermination { failed: usize, total: usize, cap: u64 },

    #[error("{failed} of {total} diffusion paths escaped the domain ball of radius {radius}; reduce the time step")]
    DomainEscape { failed: usize, total: usize, radius: f64 },

    #[error("quadrature tolerance violated: {0}")]
    Tolerance(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
