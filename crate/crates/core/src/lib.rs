//! Declarative speech and text feature pipelines whose streaming execution
//! reproduces batch execution bit for bit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod features;
pub mod io;
pub mod matrix;
pub mod normalization;
pub mod pipeline;
pub mod text;

use thiserror::Error;

pub use matrix::{FeatureMatrix, FrameTiming};
pub use pipeline::{parse_pipeline, Pipeline, PipelineError, PipelineSpec};

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Wav(#[from] io::WavError),
    #[error(transparent)]
    Archive(#[from] io::ArchiveError),
    #[error(transparent)]
    CmvnFile(#[from] io::CmvnFileError),
    #[error(transparent)]
    Dsp(#[from] dsp::DspError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Cmvn(#[from] normalization::CmvnError),
    #[error(transparent)]
    Text(#[from] text::TextError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error(transparent)]
    Shape(#[from] matrix::ShapeError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
