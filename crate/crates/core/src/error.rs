use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} must be odd, squarefree and at least 3")]
    BadModulus(u64),
    #[error("generator {gen} is not a unit modulo {m}")]
    NonUnitGenerator { gen: i64, m: u64 },
    #[error("{value} is not a unit modulo {m}")]
    NonUnit { value: i64, m: u64 },
    #[error("prime {q} divides m = {m}")]
    RamifiedPrime { q: u64, m: u64 },
    #[error("element is zero")]
    ZeroElement,
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("element is not fixed by the degree-{f} Frobenius")]
    NotInSubfield { f: u32 },
    #[error("unsupported residue context: {0}")]
    UnsupportedContext(String),
    #[error("bin expectations must all be positive")]
    EmptyBins,
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),
    #[error("insufficient samples: smallest expected bin count {min_expected:.3} < 5 ({samples} samples, {bins} bins)")]
    InsufficientSamples { samples: usize, bins: usize, min_expected: f64 },
    #[error("linear system over F_q is singular (rank {rank} < {n})")]
    SingularSystem { rank: usize, n: usize },
    #[error("attack failed on {} twist(s): {failures:?}", failures.len())]
    PartialFailure { failures: Vec<(u64, String)> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("instance hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
