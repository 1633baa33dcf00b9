use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use featgraph::text::{
    sentence_to_ids, tokenize_bytes, ForwardMaxMatch, Segmenter, SegmenterDict, Vocabulary,
};

use crate::failure::{Classify, CmdResult};

#[derive(Debug, Args)]
pub struct TextArgs {
    /// One token per line; the first four lines must be `<pad>`, `<unk>`, `<s>`, `</s>`.
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    max_len: usize,
    #[arg(long)]
    lowercase: bool,
    /// Split punctuation characters into their own tokens.
    #[arg(long)]
    split_punct: bool,
    /// Word list for forward maximum matching, applied to every whitespace token.
    #[arg(long)]
    segment_dict: Option<PathBuf>,
    /// Wrap each sentence in `<s>` and `</s>`.
    #[arg(long)]
    add_bos_eos: bool,
    /// Input file, one sentence per line. Defaults to standard input.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Writes one `ids | true_length` line per input line.
fn convert(
    input: &[u8],
    vocab: &Vocabulary,
    segmenter: Option<&dyn Segmenter>,
    args: &TextArgs,
    out: &mut impl Write,
) -> anyhow::Result<()> {
    if input.is_empty() {
        return Ok(());
    }
    let body = input.strip_suffix(b"\n").unwrap_or(input);
    for (n, line) in body.split(|&b| b == b'\n').enumerate() {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let mut tokens = tokenize_bytes(line, args.lowercase, args.split_punct)
            .with_context(|| format!("input line {}", n + 1))?;
        if let Some(seg) = segmenter {
            tokens = tokens.iter().flat_map(|t| seg.segment(t)).collect();
        }
        let seq = sentence_to_ids(&tokens, vocab, args.max_len, args.add_bos_eos)?;
        writeln!(out, "{}", seq.to_line())?;
    }
    Ok(())
}

pub fn run(args: TextArgs) -> CmdResult {
    let vocab = Vocabulary::load(&args.vocab).usage()?;
    sentence_to_ids::<&str>(&[], &vocab, args.max_len, args.add_bos_eos).usage()?;
    let segmenter = match &args.segment_dict {
        Some(p) => Some(ForwardMaxMatch::new(SegmenterDict::load(p).usage()?)),
        None => None,
    };
    let input = match &args.input {
        Some(p) => fs::read(p)
            .with_context(|| format!("reading {}", p.display()))
            .usage()?,
        None => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .context("reading standard input")
                .data()?;
            buf
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    convert(
        &input,
        &vocab,
        segmenter.as_ref().map(|s| s as &dyn Segmenter),
        &args,
        &mut out,
    )
    .data()?;
    out.flush().data()
}
