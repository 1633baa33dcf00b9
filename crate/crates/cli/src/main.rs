use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmvn;
mod extract;
mod failure;
mod manifest;
mod parity;
mod reconstruct;
mod text;

/// Config-driven speech and text feature extraction.
#[derive(Debug, Parser)]
#[command(name = "featgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a pipeline over every utterance of a wav scp and archive the outputs.
    Extract(extract::ExtractArgs),
    /// Global mean and variance normalization statistics.
    #[command(subcommand)]
    Cmvn(cmvn::CmvnCommand),
    /// Map sentences (one per line) to padded id sequences.
    TextToIds(text::TextArgs),
    /// Analysis/synthesis round trip of a wav file.
    Reconstruct(reconstruct::ReconstructArgs),
    /// Check that streaming output equals batch output for several chunk sizes.
    VerifyParity(parity::ParityArgs),
    /// Export or verify hash-sealed pipeline manifests.
    #[command(subcommand)]
    Manifest(manifest::ManifestCommand),
}

/// The `--config` flag shared by pipeline-driven commands.
#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Pipeline config (YAML). Relative file parameters resolve against its directory.
    #[arg(long)]
    pub config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract::run(a),
        Command::Cmvn(c) => cmvn::run(c),
        Command::TextToIds(a) => text::run(a),
        Command::Reconstruct(a) => reconstruct::run(a),
        Command::VerifyParity(a) => parity::run(a),
        Command::Manifest(c) => manifest::run(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("error: {msg:#}");
            }
            ExitCode::from(f.code())
        }
    }
}
