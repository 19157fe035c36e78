use thiserror::Error;

/// Errors raised by the library. Method failures (a congruence that could not
/// be proved) are ordinary values, not errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("division by zero in GF({modulus})")]
    DivisionByZero { modulus: u32 },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("the modulus 3 is unsupported: 3 has no inverse")]
    ModulusThree,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series is not invertible: constant term is zero")]
    NotInvertible,

    #[error("incompatible series: {0}")]
    IncompatibleSeries(String),

    #[error("incompatible polynomial rings")]
    IncompatibleRings,

    #[error("no value assigned to J{0}")]
    MissingAssignment(u32),

    #[error("polynomial is not homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("cannot parse polynomial: {0}")]
    Parse(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("internal self-check failed: {0}")]
    SelfCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
