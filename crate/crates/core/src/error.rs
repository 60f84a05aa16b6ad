use thiserror::Error;

/// Errors raised by the spectral, operator and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {mode} lies outside the band |k| <= {band}")]
    OutOfBand { mode: i64, band: usize },

    #[error("field is not real: coefficient at k = {mode} is not the conjugate of k = {neg}", neg = -mode)]
    NotConjugateSymmetric { mode: i64 },

    #[error("mean mode must vanish, found |u_0| = {0:e}")]
    NonzeroMean(f64),

    #[error("non-finite coefficient at k = {0}")]
    NonFinite(i64),

    #[error("grid mismatch: band {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("dealias limit {dealias} exceeds band {band}")]
    BadDealias { dealias: usize, band: usize },

    #[error("band limit must be positive")]
    EmptyBand,

    #[error("semigroup factor overflows: t = {t}, epsilon = {epsilon}, K = {band}")]
    SemigroupOverflow { t: f64, epsilon: f64, band: usize },

    #[error("phase denominator vanishes at {0:?}")]
    SingularPhase(Vec<i64>),

    #[error("lattice point {0:?} violates the momentum constraint")]
    NotOnLattice(Vec<i64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step does not resolve the configuration: {0}")]
    UnresolvedStep(String),

    #[error("blow-up detected at t = {t}: norm {norm:e} exceeds {limit:e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },

    #[error("Picard gate failed: {statistic:e} > {gate:e} (T = {horizon}, |phi| = {norm:e})")]
    GateExceeded {
        statistic: f64,
        gate: f64,
        horizon: f64,
        norm: f64,
    },

    #[error("Picard iteration is not contracting: ratios {ratios:?}")]
    NotContracting { ratios: Vec<f64>, distances: Vec<f64> },

    #[error("Picard iteration did not converge in {iterations} iterations (last distance {distance:e})")]
    NoConvergence { iterations: usize, distance: f64 },

    #[error("split frequency N = {split} must satisfy 1 <= N <= K = {band}")]
    BadSplit { split: usize, band: usize },

    #[error("history does not cover quadrature node {0}")]
    MissingNodes(usize),

    #[error("non-finite value in {0}")]
    NonFiniteDiagnostic(String),

    #[error("{leg} solve failed: {source}")]
    Leg { leg: String, source: Box<Error> },

    #[error("fit needs at least {needed} usable points, got {got}")]
    DegenerateFit { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
