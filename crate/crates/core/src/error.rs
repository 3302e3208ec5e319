use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("parameters outside the admissible domain: {0}")]
    Inadmissible(String),
    #[error("evaluation at the interface is side-ambiguous; use the one-sided variant")]
    AtInterface,
    #[error("{map}: argument {value} is not above the domain limit {limit}")]
    OutOfDomain {
        map: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("interface perturbation {value} is outside the invertibility basin (limit {limit})")]
    OutOfBasin { value: f64, limit: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("lambda = {re}{im:+}i is on or left of a branch point (edge {edge})")]
    BranchCut { re: f64, im: f64, edge: f64 },
    #[error(
        "dispersion function nearly vanishes on the contour at {re}{im:+}i; retry with jittered bounds"
    )]
    ZeroOnContour { re: f64, im: f64 },
    #[error("contour refinement exhausted near {re}{im:+}i")]
    ContourRefinement { re: f64, im: f64 },
    #[error("lambda is numerically in the spectrum (|D| = {0:e})")]
    NearSpectrum(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("left the small-perturbation regime: Stefan denominator {0} <= 0.5")]
    LeftSmallRegime(f64),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("time {0} is outside the recorded horizon")]
    TimeOutOfRange(f64),
    #[error("decay fit: {0}")]
    Fit(&'static str),
}

impl Error {
    /// Errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Inadmissible(_)
                | Error::InvalidGrid(_)
                | Error::InvalidConfig(_)
                | Error::GridTooCoarse(_)
        )
    }
}
