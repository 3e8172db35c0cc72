use thiserror::Error;

/// Errors produced by the numerical toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overcritical core: m^2 + beta0 = {value} < 0 (fall to centre)")]
    OvercriticalCore { value: f64 },

    #[error("overcritical tail: m^2 + beta_inf = {value} < 0")]
    OvercriticalTail { value: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("wavefunction has an interior node near rho = {rho}")]
    NodePresent { rho: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("step too large: local error estimate {estimate:e} exceeds tolerance")]
    StepTooLarge { estimate: f64 },

    #[error("core unresolved: non-singular part still {ratio:e} of nu^2 at rho_min = {rho_min:e}")]
    CoreUnresolved { rho_min: f64, ratio: f64 },

    #[error("tail not asymptotic at rho_match = {rho_match}: relative deviation {deviation:e}")]
    TailNotAsymptotic { rho_match: f64, deviation: f64 },

    #[error("phase unstable under matching radius change: {difference:e} rad")]
    MatchUnstable { difference: f64 },

    #[error("phase unwrap ambiguous between k = {k_lo} and k = {k_hi}")]
    UnwrapAmbiguous { k_lo: f64, k_hi: f64 },

    #[error("divergent eikonal integral: {0}")]
    DivergentIntegral(String),

    #[error("partial-wave sum not converged at m_max = {m_max}: last term {last_term:e}")]
    TruncationNotConverged { m_max: i32, last_term: f64 },

    #[error("channel m = {m} has no bound state")]
    NoBoundState { m: i32 },

    #[error("eigenvalue search failed: {0}")]
    EigenSearch(String),

    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
