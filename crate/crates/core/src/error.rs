use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("deal already decided")]
    DealDecided,
    #[error("deal not decided yet")]
    DealNotDecided,
    #[error("illegal move {mv}: {rule}")]
    IllegalMove { mv: String, rule: &'static str },
    #[error("no valid moves to choose from")]
    NoMoves,
    #[error("inconsistent perspective: {0}")]
    InconsistentPerspective(String),
    #[error("invalid bot spec '{spec}': {reason}")]
    BotSpec { spec: String, reason: String },
    #[error("{0}")]
    Parse(String),
    #[error("non-finite network input")]
    NonFiniteInput,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("warmup incomplete: buffer holds {have} samples, {need} requested")]
    WarmupIncomplete { have: usize, need: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("pairing {player} vs {opponent}: {cause}")]
    Pairing {
        player: String,
        opponent: String,
        cause: Box<Error>,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The file-format failure behind this error, looking through pairing context.
    pub fn store_error(&self) -> Option<&StoreError> {
        match self {
            Error::Store(s) => Some(s),
            Error::Pairing { cause, .. } => cause.store_error(),
            _ => None,
        }
    }
}

/// Failures reading checkpoint or dataset files. Each variant has a distinct [`code`](Self::code).
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("encoder version {found} does not match {expected}")]
    EncoderVersion { found: u16, expected: u16 },
    #[error("checksum mismatch (file truncated or corrupt)")]
    Checksum,
    #[error("unexpected dimensions {0:?}")]
    Dims([u32; 3]),
    #[error("header declares {declared} records but body holds {actual}")]
    CountMismatch { declared: u64, actual: u64 },
    #[error("file truncated")]
    Truncated,
    #[error("invalid label {0}")]
    Label(u8),
}

impl StoreError {
    pub fn code(&self) -> i32 {
        match self {
            StoreError::BadMagic { .. } => 10,
            StoreError::UnsupportedVersion(_) => 11,
            StoreError::EncoderVersion { .. } => 12,
            StoreError::Checksum => 13,
            StoreError::Dims(_) => 14,
            StoreError::CountMismatch { .. } => 15,
            StoreError::Truncated => 16,
            StoreError::Label(_) => 17,
        }
    }
}
