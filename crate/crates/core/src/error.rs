use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: usize, message: String },

    #[error("no scene divisions found")]
    NoScenes,

    #[error("graph has {0} node(s); at least 2 are required")]
    DegenerateGraph(usize),

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("no qualifying non-group characters in play `{0}`")]
    NoQualifyingCharacters(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("act {act} out of range for a play with {act_count} act(s)")]
    ActOutOfRange { act: usize, act_count: usize },

    #[error("no plays with exactly {required} acts (act counts present: {available})")]
    EmptyRestriction { required: usize, available: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
