//! Declarative op graphs over audio, text and numeric inputs.
//!
//! A pipeline is parsed from YAML into a [`PipelineSpec`], compiled into a
//! [`Pipeline`] and then run per utterance, either whole ([`Pipeline::run`])
//! or incrementally ([`Pipeline::open_stream`]). Both paths drive the same
//! stage implementations, so streaming output matches batch output bit for
//! bit regardless of chunking.

pub mod concat;
pub mod engine;
pub mod manifest;
pub mod ops;
pub mod spec;
mod stages;

use thiserror::Error;

pub use concat::{concat_features, ConcatError, ConcatState};
pub use engine::{BatchOptions, Pipeline, StreamSession, UtteranceInput, UtteranceOutput, Value};
pub use manifest::{export_manifest, verify_manifest, PipelineManifest, TOOL_VERSION};
pub use ops::{OpKind, OpParams, ValueType};
pub use spec::{parse_pipeline, InputSpec, Modality, PipelineSpec, StageSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Spec(String),
    #[error("input {input}: {message}")]
    Input { input: String, message: String },
    #[error("stage {stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("output {output}: {message}")]
    Output { output: String, message: String },
    #[error("stage {stage} ({op}) is an offline stage and cannot run in streaming mode")]
    NotStreamable { stage: String, op: &'static str },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("manifest hash mismatch: stored {stored}, contents hash to {computed}")]
    ManifestIntegrity { stored: String, computed: String },
    #[error("manifest differs from config at {path}: manifest has {manifest}, config has {config}")]
    ManifestMismatch {
        path: String,
        manifest: String,
        config: String,
    },
    #[error("skipped after an earlier failure")]
    Skipped,
    #[error("{0}")]
    Runtime(String),
}
