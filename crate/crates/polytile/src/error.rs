use crate::spaceform::SpaceForm;
use thiserror::Error;

/// Errors surfaced by constructions, solvers, and tilers.
///
/// The CLI maps these onto its exit-code contract: `Nonexistence` -> 2,
/// `BracketFailure` / `NonMonotone` -> 3, tiler consistency errors -> 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: {0:?} vs {1:?}")]
    SpaceMismatch(SpaceForm, SpaceForm),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction does not exist: {0}")]
    Nonexistence(String),

    #[error("bracket failure: f({lo}) = {f_lo:.6e}, f({hi}) = {f_hi:.6e} do not straddle zero")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("pre-scan detected a non-monotone profile for {context}; refusing a possibly non-unique root")]
    NonMonotone { context: String },

    #[error("fingerprint collision: frames differ by {dist:.3e} (> 10 * grid pitch)")]
    FingerprintCollision { dist: f64 },

    #[error("weld ambiguity: vertices at distance {dist:.3e} fall between tol and 3*tol; adjust weld tolerance")]
    WeldAmbiguity { dist: f64 },

    #[error("tiler consistency error: {0}")]
    TilerConsistency(String),

    #[error("surface depth insufficient: {0}")]
    InsufficientDepth(String),

    #[error("unsupported mode: {0}")]
    Mode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expectation failed: {0}")]
    Expectation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
