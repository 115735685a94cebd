use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,

    #[error("invalid lemma {lemma:?} at index {index}: {reason}")]
    InvalidLemma {
        index: usize,
        lemma: String,
        reason: String,
    },

    #[error("invalid word-form group on line {line}: {reason}")]
    InvalidWordForms { line: usize, reason: String },

    #[error("unknown concept {0:?}")]
    UnknownConcept(String),

    #[error("no parseable assertion lines ({lines} lines read, {malformed} malformed)")]
    Format { lines: usize, malformed: usize },

    #[error("corrupt matrix file: {0}")]
    CorruptFile(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("concept set and matrix are bound to different vocabularies")]
    VocabMismatch,

    #[error("set operation requires a nonempty set")]
    EmptySet,

    #[error("both persona concept sets are empty")]
    EmptyPersona,

    #[error("episode has no turns")]
    EmptyEpisode,

    #[error("{input} has {got} entries but the episode has {expected} self turns")]
    MismatchedScorerLength {
        input: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyVocabulary => "EmptyVocabulary",
            Error::InvalidLemma { .. } => "InvalidLemma",
            Error::InvalidWordForms { .. } => "InvalidWordForms",
            Error::UnknownConcept(_) => "UnknownConcept",
            Error::Format { .. } => "FormatError",
            Error::CorruptFile(_) => "CorruptFile",
            Error::InvalidParams(_) => "InvalidParams",
            Error::VocabMismatch => "VocabMismatch",
            Error::EmptySet => "EmptySet",
            Error::EmptyPersona => "EmptyPersona",
            Error::EmptyEpisode => "EmptyEpisode",
            Error::MismatchedScorerLength { .. } => "MismatchedScorerLength",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}
