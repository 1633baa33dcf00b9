use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Subcommand;
use featgraph::io::{read_cmvn, read_scp, write_cmvn, ArchiveWriter, FeatureArchiveEntry};
use featgraph::normalization::CmvnStats;
use serde::Serialize;

use crate::failure::{print_json, Classify, CmdResult, Failure};

#[derive(Debug, Subcommand)]
pub enum CmvnCommand {
    /// Gather statistics over feature archives. Each `--feats-scp` is one shard;
    /// shard statistics are merged in the order given.
    Accumulate {
        #[arg(long = "feats-scp", required = true)]
        feats_scp: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize every matrix of an archive with stored statistics.
    Apply {
        #[arg(long)]
        feats_scp: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        out_ark: PathBuf,
        #[arg(long)]
        out_scp: PathBuf,
        /// Subtract the mean only.
        #[arg(long)]
        no_norm_vars: bool,
    },
    /// Sum statistics files of the same dimension.
    Merge {
        #[arg(long = "stats", required = true)]
        stats: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct StatsReport {
    dim: usize,
    count: u64,
    matrices: usize,
}

#[derive(Debug, Serialize)]
struct ApplyReport {
    matrices: usize,
    frames: usize,
}

/// Statistics of one shard, with the number of matrices read.
fn accumulate_shard(scp: &Path) -> Result<(Option<CmvnStats>, usize), Failure> {
    let entries = read_scp(scp)
        .with_context(|| format!("reading {}", scp.display()))
        .usage()?;
    let mut stats: Option<CmvnStats> = None;
    for e in &entries {
        let m = e
            .read()
            .with_context(|| format!("entry {}", e.key))
            .data()?
            .to_matrix();
        let acc = match &mut stats {
            Some(acc) => acc,
            None => stats.insert(CmvnStats::new(m.cols()).data()?),
        };
        acc.accumulate(&m)
            .with_context(|| format!("entry {}", e.key))
            .data()?;
    }
    Ok((stats, entries.len()))
}

fn merge_into(total: &mut Option<CmvnStats>, part: CmvnStats, origin: &Path) -> Result<(), Failure> {
    match total {
        None => *total = Some(part),
        Some(acc) => acc
            .merge(&part)
            .with_context(|| format!("merging {}", origin.display()))
            .data()?,
    }
    Ok(())
}

fn save(stats: Option<CmvnStats>, out: &Path, matrices: usize) -> CmdResult {
    let stats = stats.ok_or_else(|| Failure::Data(anyhow!("no features to accumulate")))?;
    write_cmvn(&stats, out).data()?;
    print_json(&StatsReport {
        dim: stats.dim,
        count: stats.count,
        matrices,
    });
    Ok(())
}

pub fn run(cmd: CmvnCommand) -> CmdResult {
    match cmd {
        CmvnCommand::Accumulate { feats_scp, out } => {
            let mut total = None;
            let mut matrices = 0;
            for scp in &feats_scp {
                let (part, n) = accumulate_shard(scp)?;
                matrices += n;
                if let Some(part) = part {
                    merge_into(&mut total, part, scp)?;
                }
            }
            save(total, &out, matrices)
        }
        CmvnCommand::Merge { stats, out } => {
            let mut total = None;
            for path in &stats {
                let part = read_cmvn(path).usage()?;
                merge_into(&mut total, part, path)?;
            }
            save(total, &out, 0)
        }
        CmvnCommand::Apply {
            feats_scp,
            stats,
            out_ark,
            out_scp,
            no_norm_vars,
        } => {
            let stats = read_cmvn(&stats).usage()?;
            let transform = stats.transform(!no_norm_vars).data()?;
            let entries = read_scp(&feats_scp)
                .with_context(|| format!("reading {}", feats_scp.display()))
                .usage()?;
            let mut writer = ArchiveWriter::create(&out_ark, &out_scp)
                .with_context(|| format!("creating {}", out_ark.display()))
                .usage()?;
            let mut frames = 0;
            for e in &entries {
                let m = e
                    .read()
                    .with_context(|| format!("entry {}", e.key))
                    .data()?
                    .to_matrix();
                let normed = transform
                    .apply(&m)
                    .with_context(|| format!("entry {}", e.key))
                    .data()?;
                frames += normed.rows();
                writer
                    .write(&FeatureArchiveEntry::from_matrix(&e.key, &normed).data()?)
                    .data()?;
            }
            writer.finish().data()?;
            print_json(&ApplyReport {
                matrices: entries.len(),
                frames,
            });
            Ok(())
        }
    }
}
