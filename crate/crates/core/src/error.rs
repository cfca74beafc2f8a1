use thiserror::Error;

use crate::mmv::MmvSolution;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. Each variant names the contract that was
/// violated; none of them is used for control flow inside the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("generator banks disagree on {0}")]
    MismatchedBanks(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} at grid index {index})")]
    NotHermitian { index: usize, asymmetry: f64 },

    #[error("sequence of length {len} does not fit a grid of size {grid}")]
    TooLong { len: usize, grid: usize },

    #[error("grid size {grid} is not divisible by {n}")]
    GridNotDivisible { grid: usize, n: usize },

    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("input is not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("cross-correlation matrix is not unitary at grid index {index}; banks span different spaces")]
    NotUnitaryCross { index: usize },

    #[error("column {0} is zero")]
    ZeroColumn(usize),

    #[error("coherence {mu} violates the bound [{lower}, {upper}]")]
    CoherenceBoundViolated { mu: f64, lower: f64, upper: f64 },

    #[error("exhaustive search too large: {0}")]
    TooLarge(String),

    #[error("no support of size <= {k_max} reproduces the measurements")]
    NoSolution { k_max: usize },

    #[error("solver did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    NotConverged {
        iterations: usize,
        primal: f64,
        dual: f64,
        best: Box<MmvSolution>,
    },

    #[error("inconsistent system: {0}")]
    InconsistentSystem(String),

    #[error("dictionary spectrum has no constant factorization (max deviation {max_deviation:.3e}, {arcs} arcs)")]
    StructureNotConstant { max_deviation: f64, arcs: usize },

    #[error("restricted dictionary is rank deficient at grid index {index} (omega = {omega})")]
    RankDeficientAtFrequency { index: usize, omega: f64 },

    #[error("sampler does not generate a Riesz basis (lower bound {alpha:.3e})")]
    SamplerNotBasis { alpha: f64 },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::MismatchedBanks(_) => "MismatchedBanks",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TooLong { .. } => "TooLong",
            Error::GridNotDivisible { .. } => "GridNotDivisible",
            Error::NotPerfectSquare(_) => "NotPerfectSquare",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::NotUnitaryCross { .. } => "NotUnitaryCross",
            Error::ZeroColumn(_) => "ZeroColumn",
            Error::CoherenceBoundViolated { .. } => "CoherenceBoundViolated",
            Error::TooLarge(_) => "TooLarge",
            Error::NoSolution { .. } => "NoSolution",
            Error::NotConverged { .. } => "NotConverged",
            Error::InconsistentSystem(_) => "InconsistentSystem",
            Error::StructureNotConstant { .. } => "StructureNotConstant",
            Error::RankDeficientAtFrequency { .. } => "RankDeficientAtFrequency",
            Error::SamplerNotBasis { .. } => "SamplerNotBasis",
        }
    }
}
