//! STFT analysis into magnitude and phase, and weighted overlap-add synthesis.

use num_complex::Complex64;

use super::fft::Fft;
use super::frame::{FrameConfig, Framer, WindowKind};
use super::DspError;
use crate::io::Waveform;
use crate::matrix::{FeatureMatrix, FrameTiming};

/// Overlap-add normalizer floor.
pub const OLA_FLOOR: f64 = 1e-8;

/// Per-frame magnitude and phase, `frames x (nfft/2 + 1)` each.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitude: FeatureMatrix,
    pub phase: FeatureMatrix,
    pub nfft: usize,
    pub timing: FrameTiming,
}

impl Spectrum {
    pub fn num_frames(&self) -> usize {
        self.magnitude.rows()
    }
}

/// Windowed-frame analyzer shared by the batch function and pipeline stages.
#[derive(Debug, Clone)]
pub struct Analyzer {
    fft: Fft,
    window: Vec<f64>,
    timing: FrameTiming,
}

impl Analyzer {
    /// Pre-emphasis and DC removal in `cfg` are ignored on this path.
    pub fn new(cfg: &FrameConfig, sample_rate_hz: u32, nfft: usize) -> Result<Self, DspError> {
        cfg.validate(sample_rate_hz)?;
        let len = cfg.frame_length(sample_rate_hz);
        let fft = Fft::new(nfft)?;
        if len > nfft {
            return Err(DspError::FrameTooLong { len, nfft });
        }
        Ok(Self {
            fft,
            window: cfg.window.coefficients(len),
            timing: FrameTiming {
                sample_rate_hz,
                frame_length: len,
                frame_shift: cfg.frame_shift(sample_rate_hz),
            },
        })
    }

    pub fn timing(&self) -> FrameTiming {
        self.timing
    }

    pub fn bins(&self) -> usize {
        self.fft.len() / 2 + 1
    }

    pub fn framer(&self) -> Framer {
        Framer::new(self.timing.frame_length, self.timing.frame_shift)
    }

    /// Appends this frame's magnitudes to `mag` and phases to `phase`.
    pub fn analyze_frame(&self, frame: &[f64], mag: &mut Vec<f64>, phase: &mut Vec<f64>) {
        let windowed: Vec<f64> = frame.iter().zip(&self.window).map(|(x, w)| x * w).collect();
        let bins = self
            .fft
            .real_forward(&windowed)
            .expect("frame length checked against nfft");
        for c in bins {
            mag.push(c.norm());
            let p = c.arg();
            phase.push(if p <= -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                p
            });
        }
    }
}

pub fn analysis_filterbank(wave: &Waveform, cfg: &FrameConfig, nfft: usize) -> Result<Spectrum, DspError> {
    let analyzer = Analyzer::new(cfg, wave.sample_rate_hz(), nfft)?;
    let frames = analyzer.framer().push(wave.samples());
    let (mut mag, mut phase) = (Vec::new(), Vec::new());
    for f in &frames {
        analyzer.analyze_frame(f, &mut mag, &mut phase);
    }
    let bins = analyzer.bins();
    let timing = Some(analyzer.timing());
    Ok(Spectrum {
        magnitude: FeatureMatrix::new(frames.len(), bins, mag)
            .expect("bins per frame")
            .with_timing(timing),
        phase: FeatureMatrix::new(frames.len(), bins, phase)
            .expect("bins per frame")
            .with_timing(timing),
        nfft,
        timing: analyzer.timing(),
    })
}

/// Inverse FFT per frame, window-weighted overlap-add, normalized by the
/// summed squared window (floored at [`OLA_FLOOR`]).
pub fn synthesis_filterbank(spec: &Spectrum, cfg: &FrameConfig) -> Result<Waveform, DspError> {
    let timing = spec.timing;
    let len = cfg.frame_length(timing.sample_rate_hz);
    let shift = cfg.frame_shift(timing.sample_rate_hz);
    if (len, shift) != (timing.frame_length, timing.frame_shift) {
        return Err(DspError::ShapeMismatch(format!(
            "spectrum framed at {}/{} samples, config asks for {len}/{shift}",
            timing.frame_length, timing.frame_shift
        )));
    }
    if spec.magnitude.shape() != spec.phase.shape() {
        return Err(DspError::ShapeMismatch(format!(
            "magnitude is {:?} but phase is {:?}",
            spec.magnitude.shape(),
            spec.phase.shape()
        )));
    }
    let fft = Fft::new(spec.nfft)?;
    if spec.magnitude.cols() != spec.nfft / 2 + 1 {
        return Err(DspError::ShapeMismatch(format!(
            "{} bins per frame, nfft {} needs {}",
            spec.magnitude.cols(),
            spec.nfft,
            spec.nfft / 2 + 1
        )));
    }
    if len > spec.nfft {
        return Err(DspError::FrameTooLong { len, nfft: spec.nfft });
    }

    let frames = spec.num_frames();
    if frames == 0 {
        return Waveform::new(Vec::new(), timing.sample_rate_hz)
            .map_err(|e| DspError::InvalidConfig(e.to_string()));
    }
    let window = cfg.window.coefficients(len);
    let out_len = (frames - 1) * shift + len;
    let mut num = vec![0.0; out_len];
    let mut den = vec![0.0; out_len];
    for m in 0..frames {
        let half: Vec<Complex64> = spec
            .magnitude
            .row(m)
            .iter()
            .zip(spec.phase.row(m))
            .map(|(&r, &theta)| Complex64::from_polar(r, theta))
            .collect();
        let time = fft.real_inverse(&half)?;
        let start = m * shift;
        for t in 0..len {
            num[start + t] += time[t] * window[t];
            den[start + t] += window[t] * window[t];
        }
    }
    let samples = num.iter().zip(&den).map(|(n, d)| n / d.max(OLA_FLOOR)).collect();
    Waveform::clamped(samples, timing.sample_rate_hz).map_err(|e| DspError::InvalidConfig(e.to_string()))
}

/// Accepts only hann windows with a shift of exactly half the frame.
pub fn check_cola(cfg: &FrameConfig, sample_rate_hz: u32) -> Result<(), DspError> {
    cfg.validate(sample_rate_hz)?;
    if cfg.window != WindowKind::Hann {
        return Err(DspError::NotCola(format!("window {:?} is not hann", cfg.window)));
    }
    let len = cfg.frame_length(sample_rate_hz);
    let shift = cfg.frame_shift(sample_rate_hz);
    if 2 * shift != len {
        return Err(DspError::NotCola(format!(
            "shift {shift} samples is not half of frame length {len}"
        )));
    }
    Ok(())
}

/// Largest absolute error over samples at least one frame from either edge
/// of the reconstruction. Returns 0 when no such sample exists.
pub fn max_interior_error(original: &[f64], reconstructed: &[f64], frame_length: usize) -> f64 {
    let n = original.len().min(reconstructed.len());
    if n <= 2 * frame_length {
        return 0.0;
    }
    (frame_length..n - frame_length)
        .map(|t| (original[t] - reconstructed[t]).abs())
        .fold(0.0, f64::max)
}
