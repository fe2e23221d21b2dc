use thiserror::Error;

/// Errors raised by poset construction, the operator calculus and the
/// matrix/spectral machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("relations imply a cycle through element {0}")]
    Cycle(usize),

    #[error("label {label} outside 1..={n}")]
    Label { label: usize, n: usize },

    #[error("poset size {0} unsupported (must be 1..={max})", max = crate::poset::MAX_SIZE)]
    Size(usize),

    #[error("{0}")]
    Range(String),

    #[error("posets have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),

    #[error("word is not a permutation of 1..={0}")]
    NotAPermutation(usize),

    #[error("word is not a linear extension of the poset")]
    NotALinearExtension,

    #[error("position {pos} outside 1..={max}")]
    PositionRange { pos: usize, max: usize },

    #[error("target poset is not a componentwise chain refinement of the source")]
    IncompatiblePosets,

    #[error("not lumpable: states {sigma} and {sigma_prime} disagree on block {block}")]
    NotLumpable {
        sigma: usize,
        sigma_prime: usize,
        block: usize,
    },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not row-stochastic")]
    NotStochastic,

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("poset is a chain; there is no second eigenvalue")]
    TrivialPoset,

    #[error("poset is connected")]
    ConnectedPoset,

    #[error("eigenvalue lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("vector is not a probability distribution")]
    NotADistribution,

    #[error("distance still above epsilon after {0} steps")]
    NoConvergence(usize),

    #[error("arithmetic overflow in exact matrix operation")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
