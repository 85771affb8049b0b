use thiserror::Error;

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),

    #[error("sentence {sentence_id:?} is not part of session {session_id:?}")]
    UnknownItem {
        session_id: String,
        sentence_id: String,
    },

    #[error("sentence {0:?} has not been served yet; rate the current item first")]
    NotServed(String),

    #[error("sentence {0:?} has already been rated in this session")]
    Duplicate(String),

    #[error("rating {0} is out of range; values must be integers from 0 to 99")]
    OutOfRange(i64),

    #[error("session {0:?} is complete")]
    SessionComplete(String),

    #[error("annotator {0:?} is not marked eligible")]
    NotEligible(String),

    #[error("insufficient capacity: {0}")]
    InsufficientCapacity(String),

    #[error("the filler pool is too small or lacks one of the two filler kinds")]
    InsufficientFillers,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("record log {path}: {message}")]
    CorruptLog { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] kasus_core::Error),
}

impl ServiceError {
    /// Stable machine-readable code used in wire error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownItem { .. } => "unknown_item",
            ServiceError::NotServed(_) => "not_served",
            ServiceError::Duplicate(_) => "duplicate_rating",
            ServiceError::OutOfRange(_) => "out_of_range",
            ServiceError::SessionComplete(_) => "session_complete",
            ServiceError::NotEligible(_) => "not_eligible",
            ServiceError::InsufficientCapacity(_) => "insufficient_capacity",
            ServiceError::InsufficientFillers => "insufficient_fillers",
            ServiceError::Config(_) => "config",
            ServiceError::CorruptLog { .. } => "corrupt_log",
            ServiceError::Io(_) => "io",
            ServiceError::Core(_) => "internal",
        }
    }
}
