use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use featgraph::io::{read_wav, write_cmvn, ArchiveWriter, FeatureArchiveEntry};
use featgraph::normalization::CmvnStats;
use featgraph::pipeline::{BatchOptions, Modality, OpKind, PipelineError, UtteranceInput, Value, ValueType};
use featgraph::FeatureMatrix;

use crate::failure::{load_pipeline, print_json, Classify, CmdResult, Failure, FailureEntry, JobReport};
use crate::ConfigArg;

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Lines of `key<TAB>path`.
    #[arg(long)]
    wav_scp: PathBuf,
    #[arg(long)]
    out_ark: PathBuf,
    #[arg(long)]
    out_scp: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Process every utterance and exit 0 even if some fail.
    #[arg(long)]
    keep_going: bool,
    /// Where to write statistics gathered by the pipeline's `cmvn_accumulate` stage.
    #[arg(long)]
    cmvn_out: Option<PathBuf>,
}

/// One line of a wav scp.
#[derive(Debug, Clone)]
pub struct WavScpEntry {
    pub key: String,
    pub path: PathBuf,
}

pub fn parse_wav_scp(text: &str) -> anyhow::Result<Vec<WavScpEntry>> {
    let mut out: Vec<WavScpEntry> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, path)) = line.split_once(char::is_whitespace) else {
            bail!("wav scp line {}: expected `key<TAB>path`", n + 1);
        };
        let path = path.trim();
        if out.iter().any(|e| e.key == key) {
            bail!("wav scp line {}: duplicate key '{key}'", n + 1);
        }
        out.push(WavScpEntry {
            key: key.to_string(),
            path: PathBuf::from(path),
        });
    }
    Ok(out)
}

/// Converts one pipeline output to an archivable matrix.
fn to_matrix(value: &Value) -> anyhow::Result<FeatureMatrix> {
    match value {
        Value::Features(m) => Ok(m.clone()),
        Value::Ids(seq) => Ok(FeatureMatrix::new(
            1,
            seq.ids.len(),
            seq.ids.iter().map(|&i| i as f64).collect(),
        )?),
        Value::Label(id) => Ok(FeatureMatrix::new(1, 1, vec![*id as f64])?),
        other => Err(anyhow!("{} values cannot be archived", other.value_type())),
    }
}

fn archive_key(key: &str, output: &str, single: bool) -> String {
    if single {
        key.to_string()
    } else {
        format!("{key}.{output}")
    }
}

pub fn run(args: ExtractArgs) -> CmdResult {
    let started = Instant::now();
    let pipeline = load_pipeline(&args.config.config)?;
    let spec = pipeline.spec();

    let audio = match spec.inputs.as_slice() {
        [one] if one.modality == Modality::Audio => one.name.clone(),
        _ => {
            return Err(Failure::Usage(anyhow!(
                "extract needs a pipeline with a single audio input, {} declares {} input(s)",
                args.config.config.display(),
                spec.inputs.len()
            )))
        }
    };
    for name in &spec.outputs {
        if let Some(ty @ (ValueType::Tokens | ValueType::Text)) = spec.stage(name).map(|s| s.op.output_type())
        {
            return Err(Failure::Usage(anyhow!(
                "output {name} carries {ty}, which cannot be archived"
            )));
        }
    }
    let accumulators: Vec<&str> = spec
        .stages
        .iter()
        .filter(|s| s.op == OpKind::CmvnAccumulate)
        .map(|s| s.name.as_str())
        .collect();
    if args.cmvn_out.is_some() && accumulators.len() != 1 {
        return Err(Failure::Usage(anyhow!(
            "--cmvn-out needs exactly one cmvn_accumulate stage, the pipeline has {}",
            accumulators.len()
        )));
    }

    let scp_text = fs::read_to_string(&args.wav_scp)
        .with_context(|| format!("reading {}", args.wav_scp.display()))
        .usage()?;
    let entries = parse_wav_scp(&scp_text).usage()?;

    let opts = BatchOptions {
        jobs: args.jobs.max(1),
        fail_fast: !args.keep_going,
    };
    let results = pipeline
        .run_batch_with(&entries, &opts, |e| {
            let wave = read_wav(&e.path).map_err(|err| PipelineError::Input {
                input: audio.clone(),
                message: format!("{}: {err}", e.path.display()),
            })?;
            Ok(UtteranceInput::from([(audio.clone(), Value::Audio(wave))]))
        })
        .data()?;

    let mut writer = ArchiveWriter::create(&args.out_ark, &args.out_scp)
        .with_context(|| format!("creating {}", args.out_ark.display()))
        .usage()?;
    let single = spec.outputs.len() == 1;
    let mut report = JobReport {
        utterances_processed: 0,
        failures: Vec::new(),
        wall_time_seconds: 0.0,
        frames_emitted: 0,
    };
    let mut stats: Option<CmvnStats> = None;
    for (entry, result) in entries.iter().zip(results) {
        let out = match result {
            Ok(out) => out,
            Err(PipelineError::Skipped) => continue,
            Err(e) => {
                report.utterances_processed += 1;
                report.failures.push(FailureEntry {
                    key: entry.key.clone(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        report.utterances_processed += 1;
        report.frames_emitted += out.frames();
        for (name, value) in &out.values {
            let m = to_matrix(value)
                .with_context(|| format!("utterance {} output {name}", entry.key))
                .data()?;
            let rec = FeatureArchiveEntry::from_matrix(archive_key(&entry.key, name, single), &m).data()?;
            writer
                .write(&rec)
                .with_context(|| format!("writing {}", args.out_ark.display()))
                .data()?;
        }
        for (_, s) in out.cmvn_stats {
            match &mut stats {
                None => stats = Some(s),
                Some(acc) => acc
                    .merge(&s)
                    .with_context(|| format!("utterance {}", entry.key))
                    .data()?,
            }
        }
    }
    writer.finish().data()?;

    if let Some(path) = &args.cmvn_out {
        match &stats {
            Some(s) => write_cmvn(s, path).data()?,
            None => eprintln!(
                "warning: no utterance produced statistics, {} not written",
                path.display()
            ),
        }
    }

    report.wall_time_seconds = started.elapsed().as_secs_f64();
    for f in &report.failures {
        eprintln!("utterance {}: {}", f.key, f.message);
    }
    print_json(&report);
    if report.failures.is_empty() || args.keep_going {
        Ok(())
    } else {
        Err(Failure::Reported)
    }
}
