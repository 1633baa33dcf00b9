use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use featgraph::io::read_wav;
use featgraph::pipeline::{UtteranceInput, Value};
use serde::Serialize;

use crate::failure::{load_pipeline, print_json, Classify, CmdResult, Failure};
use crate::ConfigArg;

#[derive(Debug, Args)]
pub struct ParityArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    wav: PathBuf,
    /// Comma-separated chunk sizes in samples.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 160, 1000])]
    chunk_sizes: Vec<usize>,
    /// Corrupt the streaming buffer after this many chunks (self-test of the checker).
    #[arg(long, hide = true)]
    inject_fault_after: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Mismatch {
    output: String,
    frame: Option<usize>,
    dim: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ChunkResult {
    chunk_size: usize,
    identical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<Mismatch>,
}

#[derive(Debug, Serialize)]
struct ParityReport {
    identical: bool,
    chunks: Vec<ChunkResult>,
}

pub fn run(args: ParityArgs) -> CmdResult {
    if args.chunk_sizes.is_empty() || args.chunk_sizes.contains(&0) {
        return Err(Failure::Usage(anyhow!("chunk sizes must be positive")));
    }
    let pipeline = load_pipeline(&args.config.config)?;
    let audio = pipeline.check_streamable().usage()?.to_string();
    if pipeline.spec().inputs.len() != 1 {
        return Err(Failure::Usage(anyhow!(
            "verify-parity only feeds the audio input, the pipeline declares {} inputs",
            pipeline.spec().inputs.len()
        )));
    }
    let wave = read_wav(&args.wav)
        .with_context(|| format!("reading {}", args.wav.display()))
        .data()?;
    let input = UtteranceInput::from([(audio, Value::Audio(wave))]);
    let batch = pipeline.run(&input).data()?;

    let mut chunks = Vec::new();
    for &size in &args.chunk_sizes {
        let stream = match args.inject_fault_after {
            Some(n) => pipeline.run_stream_with_fault(&input, size, n),
            None => pipeline.run_stream(&input, size),
        }
        .data()?;
        let mismatch = batch.first_difference(&stream).map(|(output, at)| {
            match at {
                Some((frame, dim)) => {
                    eprintln!("chunk size {size}: output {output} diverges at frame {frame}, dim {dim}")
                }
                None => eprintln!("chunk size {size}: output {output} differs in shape"),
            }
            Mismatch {
                output,
                frame: at.map(|a| a.0),
                dim: at.map(|a| a.1),
            }
        });
        chunks.push(ChunkResult {
            chunk_size: size,
            identical: mismatch.is_none(),
            mismatch,
        });
    }
    let identical = chunks.iter().all(|c| c.identical);
    print_json(&ParityReport { identical, chunks });
    if identical {
        Ok(())
    } else {
        Err(Failure::Reported)
    }
}
