//! Stage implementations. Every stage is incremental: the batch path feeds
//! it one chunk marked final, the streaming path feeds many.

use std::path::Path;
use std::sync::Arc;

use super::concat::ConcatState;
use super::engine::{Chunk, Value};
use super::ops::{OpParams, SentenceToIdsParams, TokenizeParams};
use crate::dsp::filterbank::Analyzer;
use crate::dsp::{next_pow2, FrameConfig, Framer};
use crate::features::energy::{power_frame, zcr_frame};
use crate::features::{
    CepstralTransform, DeltaConfig, DeltaState, MelFilterbank, PitchTracker, PlpAnalyzer, PowerFrontEnd,
};
use crate::io::read_cmvn;
use crate::matrix::{FeatureMatrix, FrameTiming};
use crate::normalization::{CmvnStats, CmvnTransform};
use crate::text::{
    sentence_to_ids, tokenize, ForwardMaxMatch, LabelTable, Segmenter, SegmenterDict, Vocabulary,
};

/// Per-frame computation of an audio op.
#[derive(Debug)]
enum FrameKernel {
    Analysis(Analyzer),
    Fbank(PowerFrontEnd, MelFilterbank),
    Mfcc(PowerFrontEnd, MelFilterbank, CepstralTransform),
    Plp(PowerFrontEnd, PlpAnalyzer),
    Pitch(PitchTracker),
    Zcr,
    Power,
}

#[derive(Debug)]
pub(crate) struct FramedOp {
    kernel: FrameKernel,
    timing: FrameTiming,
    dim: usize,
}

impl FramedOp {
    fn new(params: &OpParams, sample_rate_hz: u32) -> Result<Self, String> {
        let s = |e: &dyn std::fmt::Display| e.to_string();
        let raw_timing = |cfg: &FrameConfig| -> Result<FrameTiming, String> {
            cfg.validate(sample_rate_hz).map_err(|e| s(&e))?;
            Ok(FrameTiming {
                sample_rate_hz,
                frame_length: cfg.frame_length(sample_rate_hz),
                frame_shift: cfg.frame_shift(sample_rate_hz),
            })
        };
        let (kernel, timing, dim) = match params {
            OpParams::AnalysisFilterbank(p) => {
                let cfg = p.frame();
                cfg.validate(sample_rate_hz).map_err(|e| s(&e))?;
                let nfft = p
                    .nfft
                    .unwrap_or_else(|| next_pow2(cfg.frame_length(sample_rate_hz)));
                let a = Analyzer::new(&cfg, sample_rate_hz, nfft).map_err(|e| s(&e))?;
                let (t, d) = (a.timing(), 2 * a.bins());
                (FrameKernel::Analysis(a), t, d)
            }
            OpParams::Fbank(p) => {
                let front = PowerFrontEnd::new(&p.frame(), sample_rate_hz).map_err(|e| s(&e))?;
                let bank = MelFilterbank::new(&p.mel(), sample_rate_hz, front.nfft()).map_err(|e| s(&e))?;
                let (t, d) = (front.timing(), bank.num_filters());
                (FrameKernel::Fbank(front, bank), t, d)
            }
            OpParams::Mfcc(p) => {
                let front = PowerFrontEnd::new(&p.frame(), sample_rate_hz).map_err(|e| s(&e))?;
                let bank = MelFilterbank::new(&p.mel(), sample_rate_hz, front.nfft()).map_err(|e| s(&e))?;
                let dct = CepstralTransform::new(bank.num_filters(), p.num_ceps, p.lifter_coeff)
                    .map_err(|e| s(&e))?;
                let (t, d) = (front.timing(), dct.outputs());
                (FrameKernel::Mfcc(front, bank, dct), t, d)
            }
            OpParams::Plp(p) => {
                let front = PowerFrontEnd::new(&p.frame(), sample_rate_hz).map_err(|e| s(&e))?;
                let plp = PlpAnalyzer::new(&p.plp(), sample_rate_hz, front.nfft()).map_err(|e| s(&e))?;
                let (t, d) = (front.timing(), plp.num_ceps());
                (FrameKernel::Plp(front, plp), t, d)
            }
            OpParams::Pitch(p) => {
                let t = raw_timing(&p.frame())?;
                let tracker =
                    PitchTracker::new(&p.pitch(), sample_rate_hz, t.frame_length).map_err(|e| s(&e))?;
                (FrameKernel::Pitch(tracker), t, 2)
            }
            OpParams::Zcr(p) => {
                let t = raw_timing(&p.frame())?;
                if t.frame_length < 2 {
                    return Err("zero crossing rate needs frames of at least 2 samples".into());
                }
                (FrameKernel::Zcr, t, 1)
            }
            OpParams::FramePower(p) => (FrameKernel::Power, raw_timing(&p.frame())?, 1),
            _ => unreachable!("not an audio op"),
        };
        Ok(Self { kernel, timing, dim })
    }

    fn frame(&self, frame: &mut [f64], out: &mut Vec<f64>) {
        match &self.kernel {
            FrameKernel::Analysis(a) => {
                let mut phase = Vec::with_capacity(self.dim / 2);
                a.analyze_frame(frame, out, &mut phase);
                out.extend(phase);
            }
            FrameKernel::Fbank(front, bank) => bank.log_energies(&front.power(frame), out),
            FrameKernel::Mfcc(front, bank, dct) => {
                let mut logmel = Vec::with_capacity(bank.num_filters());
                bank.log_energies(&front.power(frame), &mut logmel);
                dct.apply_row(&logmel, out);
            }
            FrameKernel::Plp(front, plp) => {
                plp.frame(&front.power(frame), out);
            }
            FrameKernel::Pitch(t) => out.extend(t.frame(frame)),
            FrameKernel::Zcr => out.push(zcr_frame(frame)),
            FrameKernel::Power => out.push(power_frame(frame)),
        }
    }
}

/// Immutable, shareable part of a compiled stage.
#[derive(Debug, Clone)]
pub(crate) enum Template {
    Framed(Arc<FramedOp>),
    Deltas(DeltaConfig),
    CmvnApply(Arc<CmvnTransform>),
    CmvnAccumulate,
    Tokenize(TokenizeParams),
    Segment(Arc<ForwardMaxMatch>),
    SentenceToIds {
        vocab: Arc<Vocabulary>,
        max_len: usize,
        add_bos_eos: bool,
    },
    LabelToId(Arc<LabelTable>),
    IdsToFeatures,
    Concat,
}

fn require_path(field: &str, value: &str) -> Result<(), String> {
    if value.is_empty() {
        Err(format!("parameter {field} (a file path) is required"))
    } else {
        Ok(())
    }
}

fn check_max_len(p: &SentenceToIdsParams) -> Result<(), String> {
    let min = if p.add_bos_eos { 2 } else { 1 };
    if p.max_len < min {
        return Err(format!("max_len must be at least {min}, got {}", p.max_len));
    }
    Ok(())
}

/// Validates parameters without touching the filesystem.
pub(crate) fn check_params(params: &OpParams, sample_rate_hz: Option<u32>) -> Result<(), String> {
    match params {
        OpParams::AnalysisFilterbank(_)
        | OpParams::Fbank(_)
        | OpParams::Mfcc(_)
        | OpParams::Plp(_)
        | OpParams::Pitch(_)
        | OpParams::Zcr(_)
        | OpParams::FramePower(_) => {
            let rate = sample_rate_hz.ok_or("audio op without an audio input")?;
            FramedOp::new(params, rate).map(drop)
        }
        OpParams::AddDeltas(p) => p.config().validate().map_err(|e| e.to_string()),
        OpParams::CmvnApply(p) => require_path("stats", &p.stats),
        OpParams::Segment(p) => require_path("dict", &p.dict),
        OpParams::SentenceToIds(p) => {
            require_path("vocab", &p.vocab)?;
            check_max_len(p)
        }
        OpParams::LabelToId(p) => require_path("labels", &p.labels),
        OpParams::CmvnAccumulate(_)
        | OpParams::Tokenize(_)
        | OpParams::IdsToFeatures(_)
        | OpParams::Concat(_) => Ok(()),
    }
}

/// Builds the template, loading any referenced files relative to `base`.
pub(crate) fn build(params: &OpParams, sample_rate_hz: Option<u32>, base: &Path) -> Result<Template, String> {
    check_params(params, sample_rate_hz)?;
    let s = |e: &dyn std::fmt::Display| e.to_string();
    Ok(match params {
        OpParams::AnalysisFilterbank(_)
        | OpParams::Fbank(_)
        | OpParams::Mfcc(_)
        | OpParams::Plp(_)
        | OpParams::Pitch(_)
        | OpParams::Zcr(_)
        | OpParams::FramePower(_) => {
            Template::Framed(Arc::new(FramedOp::new(params, sample_rate_hz.expect("checked"))?))
        }
        OpParams::AddDeltas(p) => Template::Deltas(p.config()),
        OpParams::CmvnApply(p) => {
            let stats = read_cmvn(base.join(&p.stats)).map_err(|e| s(&e))?;
            Template::CmvnApply(Arc::new(stats.transform(p.norm_vars).map_err(|e| s(&e))?))
        }
        OpParams::CmvnAccumulate(_) => Template::CmvnAccumulate,
        OpParams::Tokenize(p) => Template::Tokenize(p.clone()),
        OpParams::Segment(p) => {
            let dict = SegmenterDict::load(base.join(&p.dict)).map_err(|e| s(&e))?;
            Template::Segment(Arc::new(ForwardMaxMatch::new(dict)))
        }
        OpParams::SentenceToIds(p) => Template::SentenceToIds {
            vocab: Arc::new(Vocabulary::load(base.join(&p.vocab)).map_err(|e| s(&e))?),
            max_len: p.max_len,
            add_bos_eos: p.add_bos_eos,
        },
        OpParams::LabelToId(p) => Template::LabelToId(Arc::new(
            LabelTable::load(base.join(&p.labels)).map_err(|e| s(&e))?,
        )),
        OpParams::IdsToFeatures(_) => Template::IdsToFeatures,
        OpParams::Concat(_) => Template::Concat,
    })
}

/// Mutable per-utterance state of one stage.
pub(crate) trait StageRun: Send {
    /// Consumes the newest chunk of every input and returns newly produced
    /// output, if any.
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String>;

    fn stats(&self) -> Option<CmvnStats> {
        None
    }

    /// Test hook for fault injection; returns whether any state was altered.
    fn corrupt(&mut self) -> bool {
        false
    }
}

impl Template {
    pub(crate) fn start(&self) -> Box<dyn StageRun> {
        match self {
            Template::Framed(op) => Box::new(FramedRun {
                framer: Framer::new(op.timing.frame_length, op.timing.frame_shift),
                op: Arc::clone(op),
            }),
            Template::Deltas(cfg) => Box::new(DeltaRun {
                state: DeltaState::new(*cfg).expect("validated"),
                finished: false,
            }),
            Template::CmvnApply(t) => Box::new(CmvnApplyRun(Arc::clone(t))),
            Template::CmvnAccumulate => Box::new(CmvnAccumulateRun(None)),
            Template::Concat => Box::new(ConcatRun(ConcatState::default())),
            other => Box::new(PureRun(other.clone())),
        }
    }
}

fn unexpected(v: &Value) -> String {
    format!("unexpected {} input", v.value_type())
}

struct FramedRun {
    op: Arc<FramedOp>,
    framer: Framer,
}

impl StageRun for FramedRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        let frames = match &inputs[0].value {
            Some(Value::Audio(w)) => {
                if w.sample_rate_hz() != self.op.timing.sample_rate_hz {
                    return Err(format!(
                        "audio at {} Hz, stage configured for {} Hz",
                        w.sample_rate_hz(),
                        self.op.timing.sample_rate_hz
                    ));
                }
                self.framer.push(w.samples())
            }
            Some(other) => return Err(unexpected(other)),
            None => Vec::new(),
        };
        let mut data = Vec::with_capacity(frames.len() * self.op.dim);
        for mut f in frames {
            self.op.frame(&mut f, &mut data);
        }
        let m =
            FeatureMatrix::new(data.len() / self.op.dim, self.op.dim, data).expect("fixed width per frame");
        Ok(Some(Value::Features(m.with_timing(Some(self.op.timing)))))
    }

    fn corrupt(&mut self) -> bool {
        self.framer.perturb_pending(1e-3)
    }
}

struct DeltaRun {
    state: DeltaState,
    finished: bool,
}

impl StageRun for DeltaRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        let mut out = match &inputs[0].value {
            Some(Value::Features(m)) => Some(self.state.push(m).map_err(|e| e.to_string())?),
            Some(other) => return Err(unexpected(other)),
            None => None,
        };
        if inputs[0].done && !self.finished {
            self.finished = true;
            let tail = self.state.finish(0);
            match &mut out {
                Some(o) => o.append(&tail).map_err(|e| e.to_string())?,
                None => out = Some(tail),
            }
        }
        Ok(out.map(Value::Features))
    }
}

struct CmvnApplyRun(Arc<CmvnTransform>);

impl StageRun for CmvnApplyRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        match &inputs[0].value {
            Some(Value::Features(m)) => {
                Ok(Some(Value::Features(self.0.apply(m).map_err(|e| e.to_string())?)))
            }
            Some(other) => Err(unexpected(other)),
            None => Ok(None),
        }
    }
}

struct CmvnAccumulateRun(Option<CmvnStats>);

impl StageRun for CmvnAccumulateRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        match &inputs[0].value {
            Some(Value::Features(m)) => {
                if m.cols() > 0 {
                    let stats = match &mut self.0 {
                        Some(s) => s,
                        None => self
                            .0
                            .insert(CmvnStats::new(m.cols()).map_err(|e| e.to_string())?),
                    };
                    stats.accumulate(m).map_err(|e| e.to_string())?;
                }
                Ok(Some(Value::Features(m.clone())))
            }
            Some(other) => Err(unexpected(other)),
            None => Ok(None),
        }
    }

    fn stats(&self) -> Option<CmvnStats> {
        self.0.clone()
    }
}

struct ConcatRun(ConcatState);

impl StageRun for ConcatRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        let side = |c: &Chunk| match &c.value {
            Some(Value::Features(m)) => Ok(Some(m.clone())),
            Some(other) => Err(unexpected(other)),
            None => Ok(None),
        };
        let (a, b) = (side(inputs[0])?, side(inputs[1])?);
        self.0
            .push(a.as_ref(), inputs[0].done, b.as_ref(), inputs[1].done)
            .map(|m| m.map(Value::Features))
            .map_err(|e| e.to_string())
    }
}

/// Stateless text and id ops: output is produced whenever input arrives.
struct PureRun(Template);

impl StageRun for PureRun {
    fn process(&mut self, inputs: &[&Chunk]) -> Result<Option<Value>, String> {
        let Some(input) = &inputs[0].value else {
            return Ok(None);
        };
        let out = match (&self.0, input) {
            (Template::Tokenize(p), Value::Text(t)) => Value::Tokens(tokenize(t, p.lowercase, p.split_punct)),
            (Template::Segment(seg), Value::Text(t)) => Value::Tokens(seg.segment(t)),
            (
                Template::SentenceToIds {
                    vocab,
                    max_len,
                    add_bos_eos,
                },
                Value::Tokens(tokens),
            ) => {
                Value::Ids(sentence_to_ids(tokens, vocab, *max_len, *add_bos_eos).map_err(|e| e.to_string())?)
            }
            (Template::LabelToId(table), Value::Text(t)) => {
                Value::Label(table.label_to_id(t.trim()).map_err(|e| e.to_string())?)
            }
            (Template::IdsToFeatures, Value::Ids(seq)) => {
                let row: Vec<f64> = seq.ids.iter().map(|&i| f64::from(i)).collect();
                Value::Features(FeatureMatrix::new(1, row.len(), row).expect("single row"))
            }
            (Template::IdsToFeatures, Value::Label(id)) => {
                Value::Features(FeatureMatrix::new(1, 1, vec![f64::from(*id)]).expect("single value"))
            }
            (_, other) => return Err(unexpected(other)),
        };
        Ok(Some(out))
    }
}
