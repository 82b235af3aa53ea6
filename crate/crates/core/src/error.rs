use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data, files, manifests or configuration.
    Data,
    /// A linear-algebra or numeric routine could not produce a valid result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed image payload: {0}")]
    MalformedPayload(String),
    #[error("unsupported bit depth {0} (only 8-bit images are accepted)")]
    UnsupportedDepth(u32),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("kernel size must be odd, got {0}")]
    EvenSize(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("down-sampling factor {0} is not a perfect square")]
    NonSquareFactor(usize),
    #[error("map dims {width}x{height} are not divisible by block side {block}")]
    IndivisibleDims {
        width: usize,
        height: usize,
        block: usize,
    },
    #[error("requested {keep} components but at most {max} are available")]
    KeepTooLarge { keep: usize, max: usize },
    #[error("neighbour count {k} must be in 1..{n}")]
    KTooLarge { k: usize, n: usize },
    #[error("within-class scatter is singular even after regularization")]
    SingularScatter,
    #[error("graph constraint matrix is singular even after regularization")]
    SingularConstraint,
    #[error("constraint matrix is not positive definite")]
    NotSpd,
    #[error("eigen-solver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("gallery is empty")]
    EmptyGallery,
    #[error("claimed label {0:?} has no gallery entries")]
    UnknownClaimedLabel(String),
    #[error("score pool is empty")]
    EmptyPool,
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {field}: {msg}")]
    InvariantViolation { field: String, msg: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SingularScatter
            | Error::SingularConstraint
            | Error::NotSpd
            | Error::ConvergenceFailure(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
