//! Compiled pipelines and their batch and streaming executors.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

use super::ops::{OpKind, ValueType};
use super::spec::{Modality, PipelineSpec};
use super::stages::{self, StageRun, Template};
use super::PipelineError;
use crate::io::Waveform;
use crate::matrix::FeatureMatrix;
use crate::normalization::CmvnStats;
use crate::text::TokenIdSequence;

/// A value flowing between stages.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Audio(Waveform),
    Features(FeatureMatrix),
    Text(String),
    Tokens(Vec<String>),
    Ids(TokenIdSequence),
    Label(u32),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Audio(_) => ValueType::Audio,
            Value::Features(_) => ValueType::Features,
            Value::Text(_) => ValueType::Text,
            Value::Tokens(_) => ValueType::Tokens,
            Value::Ids(_) => ValueType::Ids,
            Value::Label(_) => ValueType::Label,
        }
    }

    pub fn as_features(&self) -> Option<&FeatureMatrix> {
        match self {
            Value::Features(m) => Some(m),
            _ => None,
        }
    }

    /// Bitwise equality; feature matrices compare by bit pattern.
    pub fn bit_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Features(a), Value::Features(b)) => a.bit_eq(b),
            (a, b) => a == b,
        }
    }
}

/// Newest piece of a value plus whether its producer has finished.
#[derive(Debug, Clone)]
pub(crate) struct Chunk {
    pub value: Option<Value>,
    pub done: bool,
}

/// Named inputs of one utterance.
pub type UtteranceInput = BTreeMap<String, Value>;

/// Results of one utterance: declared outputs in order, plus the statistics
/// gathered by every `cmvn_accumulate` stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UtteranceOutput {
    pub values: Vec<(String, Value)>,
    pub cmvn_stats: Vec<(String, CmvnStats)>,
}

impl UtteranceOutput {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn features(&self, name: &str) -> Option<&FeatureMatrix> {
        self.get(name).and_then(Value::as_features)
    }

    /// Total rows over all feature outputs.
    pub fn frames(&self) -> usize {
        self.values
            .iter()
            .filter_map(|(_, v)| v.as_features())
            .map(FeatureMatrix::rows)
            .sum()
    }

    /// First output that differs bitwise from `other`, with the first
    /// divergent `(frame, dim)` for feature outputs.
    pub fn first_difference(&self, other: &UtteranceOutput) -> Option<(String, Option<(usize, usize)>)> {
        for ((name, a), (_, b)) in self.values.iter().zip(&other.values) {
            if !a.bit_eq(b) {
                let at = match (a, b) {
                    (Value::Features(x), Value::Features(y)) => x.first_difference(y),
                    _ => None,
                };
                return Some((name.clone(), at));
            }
        }
        None
    }
}

#[derive(Debug)]
struct CompiledStage {
    name: String,
    op: OpKind,
    /// Indices into the slot table: inputs first, then stages in order.
    inputs: Vec<usize>,
    template: Template,
}

/// Options for [`Pipeline::run_batch`].
#[derive(Debug, Clone, Copy)]
pub struct BatchOptions {
    pub jobs: usize,
    /// Skip utterances not yet started once one has failed.
    pub fail_fast: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            fail_fast: false,
        }
    }
}

/// A spec with all tables built and files loaded. Immutable; one compiled
/// pipeline serves any number of concurrent runs.
#[derive(Debug)]
pub struct Pipeline {
    spec: PipelineSpec,
    stages: Vec<CompiledStage>,
    outputs: Vec<(String, usize)>,
}

impl Pipeline {
    /// Relative file parameters are resolved against `base_dir`.
    pub fn compile(spec: &PipelineSpec, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut slots: BTreeMap<&str, usize> = spec
            .inputs
            .iter()
            .enumerate()
            .map(|(i, inp)| (inp.name.as_str(), i))
            .collect();
        let mut stages = Vec::with_capacity(spec.stages.len());
        for (k, s) in spec.stages.iter().enumerate() {
            let inputs: Vec<usize> = s.inputs.iter().map(|r| slots[r.as_str()]).collect();
            let rate = s
                .inputs
                .iter()
                .find_map(|r| spec.input(r).and_then(|i| i.sample_rate_hz));
            let template =
                stages::build(&s.params, rate, base_dir).map_err(|message| PipelineError::Stage {
                    stage: s.name.clone(),
                    message,
                })?;
            slots.insert(&s.name, spec.inputs.len() + k);
            stages.push(CompiledStage {
                name: s.name.clone(),
                op: s.op,
                inputs,
                template,
            });
        }
        let outputs = spec
            .outputs
            .iter()
            .map(|o| (o.clone(), slots[o.as_str()]))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            stages,
            outputs,
        })
    }

    pub fn spec(&self) -> &PipelineSpec {
        &self.spec
    }

    fn start(&self) -> Vec<Box<dyn StageRun>> {
        self.stages.iter().map(|s| s.template.start()).collect()
    }

    fn check_input(&self, name: &str, value: &Value) -> Result<(), PipelineError> {
        let err = |message: String| PipelineError::Input {
            input: name.to_string(),
            message,
        };
        let decl = self
            .spec
            .input(name)
            .ok_or_else(|| err("not declared by the pipeline".into()))?;
        let want = decl.modality.value_type();
        if value.value_type() != want {
            return Err(err(format!("expected {want}, got {}", value.value_type())));
        }
        if let (Value::Audio(w), Some(rate)) = (value, decl.sample_rate_hz) {
            if w.sample_rate_hz() != rate {
                return Err(err(format!(
                    "sample rate {} Hz, pipeline declares {rate} Hz",
                    w.sample_rate_hz()
                )));
            }
        }
        Ok(())
    }

    /// Runs every stage once over the given input chunks and returns the
    /// chunk produced by each slot.
    fn step(
        &self,
        runs: &mut [Box<dyn StageRun>],
        mut slots: Vec<Chunk>,
    ) -> Result<Vec<Chunk>, PipelineError> {
        for (stage, run) in self.stages.iter().zip(runs.iter_mut()) {
            let inputs: Vec<&Chunk> = stage.inputs.iter().map(|&i| &slots[i]).collect();
            let done = inputs.iter().all(|c| c.done);
            let value = run.process(&inputs).map_err(|message| PipelineError::Stage {
                stage: stage.name.clone(),
                message,
            })?;
            slots.push(Chunk { value, done });
        }
        Ok(slots)
    }

    fn collect(&self, slots: &[Chunk]) -> Vec<(String, Value)> {
        self.outputs
            .iter()
            .filter_map(|(name, slot)| slots[*slot].value.clone().map(|v| (name.clone(), v)))
            .collect()
    }

    fn stats(&self, runs: &[Box<dyn StageRun>]) -> Vec<(String, CmvnStats)> {
        self.stages
            .iter()
            .zip(runs)
            .filter_map(|(s, r)| r.stats().map(|st| (s.name.clone(), st)))
            .collect()
    }

    /// Processes one whole utterance: every stage sees a single final chunk.
    pub fn run(&self, input: &UtteranceInput) -> Result<UtteranceOutput, PipelineError> {
        for (name, value) in input {
            self.check_input(name, value)?;
        }
        let mut slots = Vec::with_capacity(self.spec.inputs.len() + self.stages.len());
        for decl in &self.spec.inputs {
            let value = input.get(&decl.name).ok_or_else(|| PipelineError::Input {
                input: decl.name.clone(),
                message: "missing".into(),
            })?;
            slots.push(Chunk {
                value: Some(value.clone()),
                done: true,
            });
        }
        let mut runs = self.start();
        let slots = self.step(&mut runs, slots)?;
        let mut acc = Accumulator::new(&self.outputs);
        acc.extend(self.collect(&slots))?;
        Ok(UtteranceOutput {
            values: acc.finish()?,
            cmvn_stats: self.stats(&runs),
        })
    }

    /// Runs many utterances on a pool of `opts.jobs` threads. Results are in
    /// input order and each utterance is independent of the others.
    pub fn run_batch(
        &self,
        inputs: &[UtteranceInput],
        opts: &BatchOptions,
    ) -> Result<Vec<Result<UtteranceOutput, PipelineError>>, PipelineError> {
        self.run_batch_with(inputs, opts, |i| Ok(i.clone()))
    }

    /// Like [`Pipeline::run_batch`], loading each item inside the worker.
    pub fn run_batch_with<T, F>(
        &self,
        items: &[T],
        opts: &BatchOptions,
        load: F,
    ) -> Result<Vec<Result<UtteranceOutput, PipelineError>>, PipelineError>
    where
        T: Sync,
        F: Fn(&T) -> Result<UtteranceInput, PipelineError> + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs.max(1))
            .build()
            .map_err(|e| PipelineError::Runtime(e.to_string()))?;
        let failed = AtomicBool::new(false);
        Ok(pool.install(|| {
            items
                .par_iter()
                .map(|item| {
                    if opts.fail_fast && failed.load(Ordering::SeqCst) {
                        return Err(PipelineError::Skipped);
                    }
                    let result = load(item).and_then(|input| self.run(&input));
                    if result.is_err() {
                        failed.store(true, Ordering::SeqCst);
                    }
                    result
                })
                .collect()
        }))
    }

    /// Streaming needs exactly one audio input and no offline stages.
    pub fn check_streamable(&self) -> Result<&str, PipelineError> {
        if let Some(s) = self.stages.iter().find(|s| !s.op.is_streamable()) {
            return Err(PipelineError::NotStreamable {
                stage: s.name.clone(),
                op: s.op.as_str(),
            });
        }
        match self.spec.audio_inputs().as_slice() {
            [one] => Ok(one.name.as_str()),
            other => Err(PipelineError::Spec(format!(
                "streaming needs exactly one audio input, the pipeline declares {}",
                other.len()
            ))),
        }
    }

    /// Opens an incremental session. `statics` supplies every non-audio input.
    pub fn open_stream(&self, statics: &UtteranceInput) -> Result<StreamSession<'_>, PipelineError> {
        let audio = self.check_streamable()?;
        let mut pending = Vec::new();
        for (i, decl) in self.spec.inputs.iter().enumerate() {
            if decl.modality == Modality::Audio {
                continue;
            }
            let value = statics.get(&decl.name).ok_or_else(|| PipelineError::Input {
                input: decl.name.clone(),
                message: "missing".into(),
            })?;
            self.check_input(&decl.name, value)?;
            pending.push((i, value.clone()));
        }
        let audio_slot = self
            .spec
            .inputs
            .iter()
            .position(|i| i.name == audio)
            .expect("declared");
        Ok(StreamSession {
            pipeline: self,
            runs: self.start(),
            audio_slot,
            sample_rate_hz: self.spec.inputs[audio_slot].sample_rate_hz.expect("audio input"),
            statics: Some(pending),
            chunks: 0,
            fault_after: None,
        })
    }

    /// Streams the audio input of `input` in chunks of `chunk_size` samples
    /// and reassembles the incremental outputs.
    pub fn run_stream(
        &self,
        input: &UtteranceInput,
        chunk_size: usize,
    ) -> Result<UtteranceOutput, PipelineError> {
        self.run_stream_inner(input, chunk_size, None)
    }

    /// [`Pipeline::run_stream`] with [`StreamSession::inject_fault_after`] armed.
    #[doc(hidden)]
    pub fn run_stream_with_fault(
        &self,
        input: &UtteranceInput,
        chunk_size: usize,
        fault_after: usize,
    ) -> Result<UtteranceOutput, PipelineError> {
        self.run_stream_inner(input, chunk_size, Some(fault_after))
    }

    fn run_stream_inner(
        &self,
        input: &UtteranceInput,
        chunk_size: usize,
        fault_after: Option<usize>,
    ) -> Result<UtteranceOutput, PipelineError> {
        let mut session = self.open_stream(input)?;
        session.fault_after = fault_after;
        let audio_name = &self.spec.inputs[session.audio_slot].name;
        let wave = match input.get(audio_name) {
            Some(v @ Value::Audio(w)) => {
                self.check_input(audio_name, v)?;
                w
            }
            Some(other) => {
                return Err(PipelineError::Input {
                    input: audio_name.clone(),
                    message: format!("expected audio, got {}", other.value_type()),
                })
            }
            None => {
                return Err(PipelineError::Input {
                    input: audio_name.clone(),
                    message: "missing".into(),
                })
            }
        };
        let mut acc = Accumulator::new(&self.outputs);
        for chunk in wave.samples().chunks(chunk_size.max(1)) {
            acc.extend(session.push(chunk)?)?;
        }
        acc.extend(session.finish()?)?;
        Ok(UtteranceOutput {
            values: acc.finish()?,
            cmvn_stats: Vec::new(),
        })
    }
}

/// Incremental execution over one audio stream.
pub struct StreamSession<'p> {
    pipeline: &'p Pipeline,
    runs: Vec<Box<dyn StageRun>>,
    audio_slot: usize,
    sample_rate_hz: u32,
    /// Non-audio inputs, delivered with the first chunk.
    statics: Option<Vec<(usize, Value)>>,
    chunks: usize,
    fault_after: Option<usize>,
}

impl StreamSession<'_> {
    /// Test hook: after `chunks` pushes, perturb the first stage that holds
    /// buffered audio, so later output diverges from batch output.
    #[doc(hidden)]
    pub fn inject_fault_after(&mut self, chunks: usize) {
        self.fault_after = Some(chunks);
    }

    fn feed(&mut self, samples: &[f64], done: bool) -> Result<Vec<(String, Value)>, PipelineError> {
        let p = self.pipeline;
        let input_name = &p.spec.inputs[self.audio_slot].name;
        let wave =
            Waveform::new(samples.to_vec(), self.sample_rate_hz).map_err(|e| PipelineError::Input {
                input: input_name.clone(),
                message: e.to_string(),
            })?;
        let statics = self.statics.take();
        let mut slots: Vec<Chunk> = (0..p.spec.inputs.len())
            .map(|_| Chunk {
                value: None,
                done: true,
            })
            .collect();
        for (i, v) in statics.into_iter().flatten() {
            slots[i].value = Some(v);
        }
        slots[self.audio_slot] = Chunk {
            value: Some(Value::Audio(wave)),
            done,
        };
        let slots = p.step(&mut self.runs, slots)?;
        self.chunks += 1;
        if self.fault_after == Some(self.chunks) {
            self.fault_after = None;
            for run in &mut self.runs {
                if run.corrupt() {
                    break;
                }
            }
        }
        Ok(p.collect(&slots))
    }

    /// Feeds samples; returns every output piece that became available.
    pub fn push(&mut self, samples: &[f64]) -> Result<Vec<(String, Value)>, PipelineError> {
        self.feed(samples, false)
    }

    /// Flushes all carried-over state and returns the final pieces.
    pub fn finish(mut self) -> Result<Vec<(String, Value)>, PipelineError> {
        self.feed(&[], true)
    }
}

/// Reassembles output pieces: feature rows are appended, other values are
/// taken from the single piece that carries them.
struct Accumulator {
    names: Vec<String>,
    values: Vec<Option<Value>>,
}

impl Accumulator {
    fn new(outputs: &[(String, usize)]) -> Self {
        Self {
            names: outputs.iter().map(|(n, _)| n.clone()).collect(),
            values: vec![None; outputs.len()],
        }
    }

    fn extend(&mut self, pieces: Vec<(String, Value)>) -> Result<(), PipelineError> {
        for (name, piece) in pieces {
            let k = self
                .names
                .iter()
                .position(|n| *n == name)
                .expect("declared output");
            let err = |message: String| PipelineError::Output {
                output: name.clone(),
                message,
            };
            match (&mut self.values[k], piece) {
                (slot @ None, v) => *slot = Some(v),
                (Some(Value::Features(m)), Value::Features(p)) => {
                    m.append(&p).map_err(|e| err(e.to_string()))?
                }
                (Some(_), _) => return Err(err("produced more than one value".into())),
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<(String, Value)>, PipelineError> {
        self.names
            .into_iter()
            .zip(self.values)
            .map(|(name, v)| match v {
                Some(v) => Ok((name, v)),
                None => Err(PipelineError::Output {
                    output: name,
                    message: "produced no value".into(),
                }),
            })
            .collect()
    }
}
