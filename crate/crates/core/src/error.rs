use thiserror::Error;

/// Errors raised by the walk library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("coupling {name} must be nonzero")]
    ZeroCoupling { name: &'static str },

    #[error("site count {0} must be even and at least 4")]
    BadSize(usize),

    #[error("length mismatch: expected {expected} sites, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("time step must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error("invalid walk config: {0}")]
    InvalidConfig(String),

    #[error("non-finite amplitude at site {site}, t = {time}")]
    NonFiniteDetected { site: usize, time: f64 },

    #[error("Laplace variable must be positive and finite, got {0}")]
    NonPositiveS(f64),

    #[error("invariant state needs a nonzero amplitude at the origin")]
    ZeroPhi0,

    #[error("invariant state is not square-summable when |gamma0| >= |gamma1|")]
    NotNormalizable,

    #[error("trajectory samples are not on a uniform time grid (sample {index})")]
    NonUniformGrid { index: usize },

    #[error("tail bound {tail_bound:e} exceeds 10% of |F| = {value:e} at s = {s}")]
    TailDominates { s: f64, tail_bound: f64, value: f64 },

    #[error("no samples in window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("site {site} out of range for a lattice of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("front reached the boundary after {clean_samples} clean samples (need 10)")]
    FrontReachedBoundary { clean_samples: usize },

    #[error("grid point ({gamma0}, {gamma1}) has a zero coupling")]
    ZeroCouplingInGrid { gamma0: f64, gamma1: f64 },
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
