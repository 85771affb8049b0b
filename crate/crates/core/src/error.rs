use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("lexeme {lexeme:?}: missing field `{field}`")]
    MissingField { lexeme: String, field: &'static str },

    #[error("lexeme {lexeme:?}: invalid field `{field}`: {message}")]
    InvalidField {
        lexeme: String,
        field: &'static str,
        message: String,
    },

    #[error("duplicate lexeme id {0:?}")]
    DuplicateLexeme(String),

    #[error("unknown lexeme id {0:?}")]
    UnknownLexeme(String),

    #[error("template {template:?}: {message}")]
    InvalidTemplate { template: String, message: String },

    #[error("duplicate template id {0:?}")]
    DuplicateTemplate(String),

    #[error("unknown sentence id {0:?}")]
    UnknownSentence(String),

    #[error("sentence {0:?} is not labelled acceptable")]
    NotAcceptable(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot score an empty token sequence")]
    EmptyTokens,

    #[error("token {0:?} has zero probability under an unsmoothed model; train on a corpus whose vocabulary exceeds the vocabulary size so that <unk> has mass")]
    ZeroProbability(String),

    #[error("malformed model file: {0}")]
    Model(String),

    #[error("duplicate score for sentence {id:?} at line {line}")]
    DuplicateScore { id: String, line: usize },

    #[error("non-finite score for sentence {id:?} at line {line}")]
    NonFiniteScore { id: String, line: usize },

    #[error("missing scores for {} sentence(s): {}", .0.len(), preview(.0))]
    MissingScores(Vec<String>),

    #[error("empty {0} score list")]
    EmptySample(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown label {label:?} for {axis}")]
    UnknownLabel { axis: &'static str, label: String },

    #[error("ranking {axis} is not a permutation of its 6 labels: {message}")]
    InvalidRanking { axis: &'static str, message: String },

    #[error("correlation needs equal-length inputs with at least 2 values (got {0} and {1})")]
    CorrelationLength(usize, usize),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("malformed aggregate table: {0}")]
    MalformedTable(String),

    #[error("rating {0} outside 0..=99")]
    RatingOutOfRange(i64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn preview(ids: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = ids
        .iter()
        .take(SHOWN)
        .cloned()
        .collect::<Vec<_>>()
        .join(", ");
    if ids.len() > SHOWN {
        out.push_str(&format!(", ... ({} more)", ids.len() - SHOWN));
    }
    out
}
