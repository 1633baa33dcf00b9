use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Subcommand;
use featgraph::pipeline::{export_manifest, verify_manifest, PipelineError, PipelineManifest};
use serde::Serialize;

use crate::failure::{load_spec, print_json, Classify, CmdResult, Failure};

#[derive(Debug, Subcommand)]
pub enum ManifestCommand {
    /// Write the canonical, hash-sealed form of a config.
    Export {
        #[arg(long)]
        config: PathBuf,
        /// Output file. Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a config still matches a manifest.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    verified: bool,
    sha256: &'a str,
}

pub fn run(cmd: ManifestCommand) -> CmdResult {
    match cmd {
        ManifestCommand::Export { config, out } => {
            let text = export_manifest(&load_spec(&config)?).to_canonical_string();
            match out {
                Some(path) => fs::write(&path, &text)
                    .with_context(|| format!("writing {}", path.display()))
                    .data(),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
        ManifestCommand::Verify { manifest, config } => {
            let text = fs::read_to_string(&manifest)
                .with_context(|| format!("reading {}", manifest.display()))
                .usage()?;
            let m = PipelineManifest::parse(&text)
                .with_context(|| format!("manifest {}", manifest.display()))
                .usage()?;
            let spec = load_spec(&config)?;
            match verify_manifest(&m, &spec) {
                Ok(()) => {
                    print_json(&VerifyReport {
                        verified: true,
                        sha256: &m.sha256,
                    });
                    Ok(())
                }
                Err(
                    e @ (PipelineError::ManifestMismatch { .. } | PipelineError::ManifestIntegrity { .. }),
                ) => {
                    print_json(&VerifyReport {
                        verified: false,
                        sha256: &m.sha256,
                    });
                    Err(Failure::Data(e.into()))
                }
                Err(e) => Err(Failure::Usage(e.into())),
            }
        }
    }
}
