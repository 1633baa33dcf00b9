use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use featgraph::dsp::filterbank::max_interior_error;
use featgraph::dsp::{analysis_filterbank, check_cola, next_pow2, synthesis_filterbank, FrameConfig};
use featgraph::io::{read_wav, write_wav};
use serde::Serialize;

use crate::failure::{print_json, Classify, CmdResult};

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    in_wav: PathBuf,
    #[arg(long)]
    out_wav: PathBuf,
    #[arg(long, default_value_t = 25.0)]
    frame_length_ms: f64,
    #[arg(long, default_value_t = 12.5)]
    frame_shift_ms: f64,
}

#[derive(Debug, Serialize)]
struct ReconstructReport {
    samples: usize,
    frames: usize,
    max_interior_error: f64,
}

pub fn run(args: ReconstructArgs) -> CmdResult {
    let cfg = FrameConfig {
        frame_length_ms: args.frame_length_ms,
        frame_shift_ms: args.frame_shift_ms,
        ..FrameConfig::analysis()
    };
    let wave = read_wav(&args.in_wav)
        .with_context(|| format!("reading {}", args.in_wav.display()))
        .data()?;
    let rate = wave.sample_rate_hz();
    check_cola(&cfg, rate).usage()?;

    let len = cfg.frame_length(rate);
    let spec = analysis_filterbank(&wave, &cfg, next_pow2(len)).data()?;
    let rebuilt = synthesis_filterbank(&spec, &cfg).data()?;
    // measured before the output is quantized to 16-bit PCM
    let err = max_interior_error(wave.samples(), rebuilt.samples(), len);
    write_wav(&args.out_wav, &rebuilt)
        .with_context(|| format!("writing {}", args.out_wav.display()))
        .data()?;
    print_json(&ReconstructReport {
        samples: rebuilt.len(),
        frames: spec.num_frames(),
        max_interior_error: err,
    });
    Ok(())
}
