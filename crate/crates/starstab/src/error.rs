//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid pressure law: {0}")]
    InvalidLaw(String),

    #[error("exponent gamma = {value} outside the admissible open interval ({lo}, {hi})")]
    GammaOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("enthalpy tabulation failed: {0}")]
    Tabulation(String),

    #[error("argument tau = {tau} below the vacuum bound -rho_b = {bound}")]
    BelowVacuumBound { tau: f64, bound: f64 },

    #[error("no vacuum boundary found before r = {r_max} (mu at or above mu_max, or invalid law)")]
    NoVacuumBoundary { r_max: f64 },

    #[error("step size underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error("star solve failed at mu = {mu}: {source}")]
    FamilySample { mu: f64, source: Box<Error> },

    #[error("classifier rejected gamma0 = 4/3: the small-mu seed of the turning point rule is undefined there")]
    DegenerateGamma0,

    #[error("derivative noise too large near mu = {mu}; refine the sweep around it")]
    DerivativeNoise { mu: f64 },

    #[error("sign test indeterminate at sample {index}: both products within threshold of zero")]
    IndeterminateIndex { index: usize },

    #[error("spectral assembly: {0}")]
    Spectral(String),

    #[error("coercivity constant requested on a report with n^- = {n_neg}, n^0 = {n_zero}")]
    NotCoercive { n_neg: usize, n_zero: usize },

    #[error("quadrature produced a non-finite value in {term}")]
    NonFiniteQuadrature { term: String },

    #[error("negative distance term {term} = {value}; quadrature bug")]
    NegativeDistanceTerm { term: &'static str, value: f64 },

    #[error("perturbation drives the density negative (min {min_rho})")]
    NegativeDensity { min_rho: f64 },

    #[error("time step underflow at t = {t}")]
    DtUnderflow { t: f64 },

    #[error("non-finite state detected at t = {t}, cell {cell}")]
    NonFiniteState { t: f64, cell: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed {kind} file {path}: {detail}")]
    Format {
        kind: &'static str,
        path: String,
        detail: String,
    },
}

impl Error {
    /// Process exit code buckets used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Format { .. } | Error::Io(_) => 2,
            Error::NegativeDistanceTerm { .. }
            | Error::IndeterminateIndex { .. }
            | Error::NotCoercive { .. } => 3,
            _ => 4,
        }
    }
}
