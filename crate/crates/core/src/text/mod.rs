//! Text preprocessing: tokenization, dictionary word segmentation,
//! vocabulary lookup and label encoding.

pub mod segment;
pub mod tokenize;
pub mod vocab;

use std::path::Path;

use thiserror::Error;

pub use segment::{segment_fmm, ForwardMaxMatch, Segmenter, SegmenterDict};
pub use tokenize::{is_punctuation, tokenize, tokenize_bytes};
pub use vocab::{sentence_to_ids, LabelTable, TokenIdSequence, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("invalid UTF-8 after byte {0}")]
    InvalidUtf8(usize),
    #[error("dictionary entries must be non-empty")]
    EmptyDictEntry,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: expected reserved token {expected:?}, found {found:?}")]
    ReservedToken {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("duplicate token {token:?} on lines {first} and {second}")]
    DuplicateToken {
        token: String,
        first: usize,
        second: usize,
    },
    #[error("line {0}: empty token")]
    EmptyToken(usize),
    #[error("line {0}: carriage return in token (files must use LF line endings)")]
    CarriageReturn(usize),
    #[error("max_len must be at least {min}, got {max_len}")]
    InvalidMaxLen { max_len: usize, min: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label table is empty")]
    EmptyLabelTable,
}

impl TextError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
