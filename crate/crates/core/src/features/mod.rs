//! Speech features: log mel filterbank, MFCC, PLP, pitch, zero-crossing
//! rate, frame power and delta appending.

pub mod delta;
pub mod energy;
pub mod mel;
pub mod mfcc;
pub mod pitch;
pub mod plp;

use thiserror::Error;

use crate::dsp::{DspError, Fft, FrameConditioner, FrameConfig, Framer};
use crate::io::Waveform;
use crate::matrix::{FeatureMatrix, FrameTiming};

pub use delta::{add_deltas, DeltaConfig, DeltaState};
pub use energy::{frame_power, zero_crossing_rate};
pub use mel::{fbank, mel_scale, MelFilterbank, MelFilterbankConfig};
pub use mfcc::{mfcc, CepstralTransform, MfccConfig};
pub use pitch::{pitch, PitchConfig, PitchTracker};
pub use plp::{levinson_durbin, lpc_to_cepstrum, plp, Lpc, LpcError, PlpAnalyzer, PlpConfig};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl FeatureError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::InvalidConfig(msg.into())
    }
}

/// Conditioned frame -> power spectrum `|X[k]|^2` for `k = 0..=nfft/2`.
#[derive(Debug, Clone)]
pub struct PowerFrontEnd {
    conditioner: FrameConditioner,
    fft: Fft,
    timing: FrameTiming,
}

impl PowerFrontEnd {
    /// FFT size is the next power of two at or above the frame length.
    pub fn new(cfg: &FrameConfig, sample_rate_hz: u32) -> Result<Self, FeatureError> {
        cfg.validate(sample_rate_hz)?;
        let len = cfg.frame_length(sample_rate_hz);
        Ok(Self {
            conditioner: FrameConditioner::new(cfg, len),
            fft: Fft::new(crate::dsp::next_pow2(len))?,
            timing: FrameTiming {
                sample_rate_hz,
                frame_length: len,
                frame_shift: cfg.frame_shift(sample_rate_hz),
            },
        })
    }

    pub fn nfft(&self) -> usize {
        self.fft.len()
    }

    pub fn bins(&self) -> usize {
        self.fft.len() / 2 + 1
    }

    pub fn timing(&self) -> FrameTiming {
        self.timing
    }

    pub fn framer(&self) -> Framer {
        Framer::new(self.timing.frame_length, self.timing.frame_shift)
    }

    /// Conditions `frame` in place and returns its power spectrum.
    pub fn power(&self, frame: &mut [f64]) -> Vec<f64> {
        self.conditioner.apply(frame);
        self.fft
            .real_forward(frame)
            .expect("frame fits the FFT")
            .into_iter()
            .map(|c| c.norm_sqr())
            .collect()
    }
}

/// Power spectrum of every conditioned frame of `wave`.
pub fn power_spectrum(wave: &Waveform, cfg: &FrameConfig) -> Result<FeatureMatrix, FeatureError> {
    let front = PowerFrontEnd::new(cfg, wave.sample_rate_hz())?;
    let frames = front.framer().push(wave.samples());
    let mut data = Vec::with_capacity(frames.len() * front.bins());
    for mut f in frames {
        data.extend(front.power(&mut f));
    }
    Ok(FeatureMatrix::new(data.len() / front.bins(), front.bins(), data)
        .expect("bins per frame")
        .with_timing(Some(front.timing())))
}
