//! Registered operations, their parameters and their type signatures.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dsp::{FrameConfig, WindowKind};
use crate::features::{DeltaConfig, MelFilterbankConfig, MfccConfig, PitchConfig, PlpConfig};

/// Kind of value flowing along an edge of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Audio,
    Features,
    Text,
    Tokens,
    Ids,
    Label,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueType::Audio => "audio",
            ValueType::Features => "features",
            ValueType::Text => "text",
            ValueType::Tokens => "tokens",
            ValueType::Ids => "ids",
            ValueType::Label => "label",
        };
        f.write_str(s)
    }
}

macro_rules! op_kinds {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum OpKind {
            $($variant),*
        }

        impl OpKind {
            pub const ALL: &'static [OpKind] = &[$(OpKind::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(OpKind::$variant => $name),*
                }
            }
        }

        impl FromStr for OpKind {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(OpKind::$variant),)*
                    _ => Err(format!(
                        "unknown op {s:?} (known: {})",
                        OpKind::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
                    )),
                }
            }
        }
    };
}

op_kinds! {
    AnalysisFilterbank => "analysis_filterbank",
    Fbank => "fbank",
    Mfcc => "mfcc",
    Plp => "plp",
    Pitch => "pitch",
    Zcr => "zcr",
    FramePower => "frame_power",
    AddDeltas => "add_deltas",
    CmvnApply => "cmvn_apply",
    CmvnAccumulate => "cmvn_accumulate",
    Tokenize => "tokenize",
    Segment => "segment",
    SentenceToIds => "sentence_to_ids",
    LabelToId => "label_to_id",
    IdsToFeatures => "ids_to_features",
    Concat => "concat",
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl OpKind {
    /// Accepted value types for each input position.
    pub fn input_types(self) -> &'static [&'static [ValueType]] {
        use ValueType::*;
        match self {
            OpKind::AnalysisFilterbank
            | OpKind::Fbank
            | OpKind::Mfcc
            | OpKind::Plp
            | OpKind::Pitch
            | OpKind::Zcr
            | OpKind::FramePower => &[&[Audio]],
            OpKind::AddDeltas | OpKind::CmvnApply | OpKind::CmvnAccumulate => &[&[Features]],
            OpKind::Tokenize | OpKind::Segment | OpKind::LabelToId => &[&[Text]],
            OpKind::SentenceToIds => &[&[Tokens]],
            OpKind::IdsToFeatures => &[&[Ids, Label]],
            OpKind::Concat => &[&[Features], &[Features]],
        }
    }

    pub fn output_type(self) -> ValueType {
        match self {
            OpKind::Tokenize | OpKind::Segment => ValueType::Tokens,
            OpKind::SentenceToIds => ValueType::Ids,
            OpKind::LabelToId => ValueType::Label,
            _ => ValueType::Features,
        }
    }

    /// Offline stages need the whole corpus and cannot run incrementally.
    pub fn is_streamable(self) -> bool {
        self != OpKind::CmvnAccumulate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub window: WindowKind,
    /// FFT size; `None` picks the next power of two at or above the frame length.
    pub nfft: Option<usize>,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        let f = FrameConfig::analysis();
        Self {
            frame_length_ms: f.frame_length_ms,
            frame_shift_ms: f.frame_shift_ms,
            window: f.window,
            nfft: None,
        }
    }
}

impl AnalysisParams {
    pub fn frame(&self) -> FrameConfig {
        FrameConfig {
            frame_length_ms: self.frame_length_ms,
            frame_shift_ms: self.frame_shift_ms,
            window: self.window,
            ..FrameConfig::analysis()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbankParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub preemph_coeff: f64,
    pub window: WindowKind,
    pub remove_dc: bool,
    pub num_bins: usize,
    pub low_freq_hz: f64,
    pub high_freq_hz: Option<f64>,
    pub log_floor: f64,
}

impl Default for FbankParams {
    fn default() -> Self {
        let f = FrameConfig::features();
        let m = MelFilterbankConfig::default();
        Self {
            frame_length_ms: f.frame_length_ms,
            frame_shift_ms: f.frame_shift_ms,
            preemph_coeff: f.preemph_coeff,
            window: f.window,
            remove_dc: f.remove_dc,
            num_bins: m.num_bins,
            low_freq_hz: m.low_freq_hz,
            high_freq_hz: m.high_freq_hz,
            log_floor: m.log_floor,
        }
    }
}

impl FbankParams {
    pub fn frame(&self) -> FrameConfig {
        FrameConfig {
            frame_length_ms: self.frame_length_ms,
            frame_shift_ms: self.frame_shift_ms,
            preemph_coeff: self.preemph_coeff,
            window: self.window,
            remove_dc: self.remove_dc,
        }
    }

    pub fn mel(&self) -> MelFilterbankConfig {
        MelFilterbankConfig {
            num_bins: self.num_bins,
            low_freq_hz: self.low_freq_hz,
            high_freq_hz: self.high_freq_hz,
            log_floor: self.log_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub preemph_coeff: f64,
    pub window: WindowKind,
    pub remove_dc: bool,
    pub num_bins: usize,
    pub low_freq_hz: f64,
    pub high_freq_hz: Option<f64>,
    pub num_ceps: usize,
    pub lifter_coeff: f64,
}

impl Default for MfccParams {
    fn default() -> Self {
        let b = FbankParams::default();
        let m = MfccConfig::default();
        Self {
            frame_length_ms: b.frame_length_ms,
            frame_shift_ms: b.frame_shift_ms,
            preemph_coeff: b.preemph_coeff,
            window: b.window,
            remove_dc: b.remove_dc,
            num_bins: m.mel.num_bins,
            low_freq_hz: m.mel.low_freq_hz,
            high_freq_hz: m.mel.high_freq_hz,
            num_ceps: m.num_ceps,
            lifter_coeff: m.lifter_coeff,
        }
    }
}

impl MfccParams {
    pub fn frame(&self) -> FrameConfig {
        FrameConfig {
            frame_length_ms: self.frame_length_ms,
            frame_shift_ms: self.frame_shift_ms,
            preemph_coeff: self.preemph_coeff,
            window: self.window,
            remove_dc: self.remove_dc,
        }
    }

    pub fn mel(&self) -> MelFilterbankConfig {
        MelFilterbankConfig {
            num_bins: self.num_bins,
            low_freq_hz: self.low_freq_hz,
            high_freq_hz: self.high_freq_hz,
            ..MelFilterbankConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlpParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub preemph_coeff: f64,
    pub window: WindowKind,
    pub remove_dc: bool,
    pub lpc_order: usize,
    pub num_ceps: usize,
    pub num_bark_bins: usize,
    pub compression_exponent: f64,
}

impl Default for PlpParams {
    fn default() -> Self {
        let f = FrameConfig::features();
        let p = PlpConfig::default();
        Self {
            frame_length_ms: f.frame_length_ms,
            frame_shift_ms: f.frame_shift_ms,
            preemph_coeff: f.preemph_coeff,
            window: f.window,
            remove_dc: f.remove_dc,
            lpc_order: p.lpc_order,
            num_ceps: p.num_ceps,
            num_bark_bins: p.num_bark_bins,
            compression_exponent: p.compression_exponent,
        }
    }
}

impl PlpParams {
    pub fn frame(&self) -> FrameConfig {
        FrameConfig {
            frame_length_ms: self.frame_length_ms,
            frame_shift_ms: self.frame_shift_ms,
            preemph_coeff: self.preemph_coeff,
            window: self.window,
            remove_dc: self.remove_dc,
        }
    }

    pub fn plp(&self) -> PlpConfig {
        PlpConfig {
            lpc_order: self.lpc_order,
            num_ceps: self.num_ceps,
            num_bark_bins: self.num_bark_bins,
            compression_exponent: self.compression_exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub min_f0_hz: f64,
    pub max_f0_hz: f64,
    pub voicing_threshold: f64,
    pub octave_tolerance: f64,
}

/// Default pitch frame length, longer than the 25 ms spectral frame.
pub const PITCH_FRAME_LENGTH_MS: f64 = 40.0;

impl Default for PitchParams {
    fn default() -> Self {
        let f = FrameConfig::raw();
        let p = PitchConfig::default();
        Self {
            frame_length_ms: PITCH_FRAME_LENGTH_MS,
            frame_shift_ms: f.frame_shift_ms,
            min_f0_hz: p.min_f0_hz,
            max_f0_hz: p.max_f0_hz,
            voicing_threshold: p.voicing_threshold,
            octave_tolerance: p.octave_tolerance,
        }
    }
}

impl PitchParams {
    pub fn frame(&self) -> FrameConfig {
        raw_frame(self.frame_length_ms, self.frame_shift_ms)
    }

    pub fn pitch(&self) -> PitchConfig {
        PitchConfig {
            min_f0_hz: self.min_f0_hz,
            max_f0_hz: self.max_f0_hz,
            voicing_threshold: self.voicing_threshold,
            octave_tolerance: self.octave_tolerance,
        }
    }
}

/// Frame geometry for ops that read raw, un-windowed frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawFrameParams {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
}

impl Default for RawFrameParams {
    fn default() -> Self {
        let f = FrameConfig::raw();
        Self {
            frame_length_ms: f.frame_length_ms,
            frame_shift_ms: f.frame_shift_ms,
        }
    }
}

impl RawFrameParams {
    pub fn frame(&self) -> FrameConfig {
        raw_frame(self.frame_length_ms, self.frame_shift_ms)
    }
}

fn raw_frame(frame_length_ms: f64, frame_shift_ms: f64) -> FrameConfig {
    FrameConfig {
        frame_length_ms,
        frame_shift_ms,
        ..FrameConfig::raw()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaParams {
    pub window: usize,
    pub order: usize,
}

impl Default for DeltaParams {
    fn default() -> Self {
        let d = DeltaConfig::default();
        Self {
            window: d.window,
            order: d.order,
        }
    }
}

impl DeltaParams {
    pub fn config(&self) -> DeltaConfig {
        DeltaConfig {
            window: self.window,
            order: self.order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmvnApplyParams {
    /// Path of the statistics JSON file.
    pub stats: String,
    pub norm_vars: bool,
}

impl Default for CmvnApplyParams {
    fn default() -> Self {
        Self {
            stats: String::new(),
            norm_vars: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmptyParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizeParams {
    pub lowercase: bool,
    pub split_punct: bool,
}

impl Default for TokenizeParams {
    fn default() -> Self {
        Self {
            lowercase: true,
            split_punct: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentParams {
    /// Dictionary file, one entry per line.
    pub dict: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentenceToIdsParams {
    pub vocab: String,
    pub max_len: usize,
    pub add_bos_eos: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelToIdParams {
    pub labels: String,
}

/// Fully defaulted parameters of one stage.
#[derive(Debug, Clone, PartialEq)]
pub enum OpParams {
    AnalysisFilterbank(AnalysisParams),
    Fbank(FbankParams),
    Mfcc(MfccParams),
    Plp(PlpParams),
    Pitch(PitchParams),
    Zcr(RawFrameParams),
    FramePower(RawFrameParams),
    AddDeltas(DeltaParams),
    CmvnApply(CmvnApplyParams),
    CmvnAccumulate(EmptyParams),
    Tokenize(TokenizeParams),
    Segment(SegmentParams),
    SentenceToIds(SentenceToIdsParams),
    LabelToId(LabelToIdParams),
    IdsToFeatures(EmptyParams),
    Concat(EmptyParams),
}

fn typed<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, String> {
    let value = if value.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        value
    };
    serde_json::from_value(value).map_err(|e| format!("bad params: {e}"))
}

impl OpParams {
    pub fn parse(kind: OpKind, value: serde_json::Value) -> Result<Self, String> {
        Ok(match kind {
            OpKind::AnalysisFilterbank => OpParams::AnalysisFilterbank(typed(value)?),
            OpKind::Fbank => OpParams::Fbank(typed(value)?),
            OpKind::Mfcc => OpParams::Mfcc(typed(value)?),
            OpKind::Plp => OpParams::Plp(typed(value)?),
            OpKind::Pitch => OpParams::Pitch(typed(value)?),
            OpKind::Zcr => OpParams::Zcr(typed(value)?),
            OpKind::FramePower => OpParams::FramePower(typed(value)?),
            OpKind::AddDeltas => OpParams::AddDeltas(typed(value)?),
            OpKind::CmvnApply => OpParams::CmvnApply(typed(value)?),
            OpKind::CmvnAccumulate => OpParams::CmvnAccumulate(typed(value)?),
            OpKind::Tokenize => OpParams::Tokenize(typed(value)?),
            OpKind::Segment => OpParams::Segment(typed(value)?),
            OpKind::SentenceToIds => OpParams::SentenceToIds(typed(value)?),
            OpKind::LabelToId => OpParams::LabelToId(typed(value)?),
            OpKind::IdsToFeatures => OpParams::IdsToFeatures(typed(value)?),
            OpKind::Concat => OpParams::Concat(typed(value)?),
        })
    }

    /// Canonical JSON form with every default spelled out.
    pub fn to_json(&self) -> serde_json::Value {
        let v = match self {
            OpParams::AnalysisFilterbank(p) => serde_json::to_value(p),
            OpParams::Fbank(p) => serde_json::to_value(p),
            OpParams::Mfcc(p) => serde_json::to_value(p),
            OpParams::Plp(p) => serde_json::to_value(p),
            OpParams::Pitch(p) => serde_json::to_value(p),
            OpParams::Zcr(p) | OpParams::FramePower(p) => serde_json::to_value(p),
            OpParams::AddDeltas(p) => serde_json::to_value(p),
            OpParams::CmvnApply(p) => serde_json::to_value(p),
            OpParams::CmvnAccumulate(p) | OpParams::IdsToFeatures(p) | OpParams::Concat(p) => {
                serde_json::to_value(p)
            }
            OpParams::Tokenize(p) => serde_json::to_value(p),
            OpParams::Segment(p) => serde_json::to_value(p),
            OpParams::SentenceToIds(p) => serde_json::to_value(p),
            OpParams::LabelToId(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize to JSON")
    }
}
