use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use featgraph::{parse_pipeline, Pipeline, PipelineSpec};
use serde::Serialize;

/// Why a command failed, which fixes its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or referenced files: exit 2.
    Usage(anyhow::Error),
    /// Bad or failing data: exit 1.
    Data(anyhow::Error),
    /// Data failure already reported on stdout/stderr: exit 1, no message.
    Reported,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) | Failure::Reported => 1,
        }
    }

    pub fn message(&self) -> Option<&anyhow::Error> {
        match self {
            Failure::Usage(e) | Failure::Data(e) => Some(e),
            Failure::Reported => None,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

pub fn load_spec(path: &Path) -> Result<PipelineSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .usage()?;
    parse_pipeline(&text)
        .with_context(|| format!("config {}", path.display()))
        .usage()
}

pub fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_pipeline(path: &Path) -> Result<Pipeline, Failure> {
    let spec = load_spec(path)?;
    Pipeline::compile(&spec, &config_dir(path))
        .with_context(|| format!("config {}", path.display()))
        .usage()
}

pub fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

#[derive(Debug, Serialize)]
pub struct FailureEntry {
    pub key: String,
    pub message: String,
}

/// Summary printed on stdout by batch commands.
#[derive(Debug, Serialize)]
pub struct JobReport {
    pub utterances_processed: usize,
    pub failures: Vec<FailureEntry>,
    pub wall_time_seconds: f64,
    pub frames_emitted: usize,
}
