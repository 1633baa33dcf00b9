//! Normalized-autocorrelation pitch tracker.

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub min_f0_hz: f64,
    pub max_f0_hz: f64,
    pub voicing_threshold: f64,
    /// A shorter-lag peak within this distance of the best correlation is
    /// preferred over the global maximum (suppresses sub-octave picks).
    pub octave_tolerance: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            min_f0_hz: 50.0,
            max_f0_hz: 400.0,
            voicing_threshold: 0.3,
            octave_tolerance: 0.02,
        }
    }
}

impl PitchConfig {
    pub fn validate(&self, sample_rate_hz: u32) -> Result<(), FeatureError> {
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        if !(self.min_f0_hz > 0.0 && self.min_f0_hz < self.max_f0_hz && self.max_f0_hz < nyquist) {
            return Err(FeatureError::config(format!(
                "need 0 < min_f0_hz < max_f0_hz < nyquist, got {} / {} / {nyquist}",
                self.min_f0_hz, self.max_f0_hz
            )));
        }
        if !(self.voicing_threshold > 0.0 && self.voicing_threshold < 1.0) {
            return Err(FeatureError::config(format!(
                "voicing_threshold must lie in (0, 1), got {}",
                self.voicing_threshold
            )));
        }
        if !(self.octave_tolerance >= 0.0) {
            return Err(FeatureError::config("octave_tolerance must be >= 0"));
        }
        Ok(())
    }

    /// Inclusive lag range `[ceil(fs/max_f0), min(floor(fs/min_f0), len-1)]`.
    pub fn lag_range(
        &self,
        sample_rate_hz: u32,
        frame_length: usize,
    ) -> Result<(usize, usize), FeatureError> {
        self.validate(sample_rate_hz)?;
        let fs = f64::from(sample_rate_hz);
        let min_lag = (fs / self.max_f0_hz).ceil() as usize;
        let max_lag = ((fs / self.min_f0_hz).floor() as usize).min(frame_length.saturating_sub(1));
        if min_lag == 0 || min_lag > max_lag {
            return Err(FeatureError::config(format!(
                "empty lag range [{min_lag}, {max_lag}] for {frame_length}-sample frames"
            )));
        }
        Ok((min_lag, max_lag))
    }
}

/// Per-frame pitch estimator for a fixed frame length.
#[derive(Debug, Clone)]
pub struct PitchTracker {
    cfg: PitchConfig,
    fs: f64,
    min_lag: usize,
    max_lag: usize,
}

impl PitchTracker {
    pub fn new(cfg: &PitchConfig, sample_rate_hz: u32, frame_length: usize) -> Result<Self, FeatureError> {
        let (min_lag, max_lag) = cfg.lag_range(sample_rate_hz, frame_length)?;
        Ok(Self {
            cfg: *cfg,
            fs: f64::from(sample_rate_hz),
            min_lag,
            max_lag,
        })
    }

    /// `rho(tau)` for every lag in range, 0 where either segment has no energy.
    pub fn correlations(&self, frame: &[f64]) -> Vec<f64> {
        (self.min_lag..=self.max_lag)
            .map(|lag| {
                let head = &frame[..frame.len() - lag];
                let tail = &frame[lag..];
                let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
                for (a, b) in head.iter().zip(tail) {
                    xy += a * b;
                    xx += a * a;
                    yy += b * b;
                }
                let denom = (xx * yy).sqrt();
                if denom > 0.0 {
                    xy / denom
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `[f0_hz, voicing]`; `f0_hz` is 0 for unvoiced frames.
    pub fn frame(&self, frame: &[f64]) -> [f64; 2] {
        let rho = self.correlations(frame);
        let best = rho.iter().copied().fold(0.0f64, f64::max);
        if best < self.cfg.voicing_threshold {
            return [0.0, best];
        }
        let is_peak = |i: usize| {
            let left = if i == 0 { f64::NEG_INFINITY } else { rho[i - 1] };
            let right = rho.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            rho[i] >= left && rho[i] >= right
        };
        let pick = (0..rho.len())
            .find(|&i| rho[i] >= best - self.cfg.octave_tolerance && is_peak(i))
            .expect("the global maximum is always a peak");
        [self.fs / (self.min_lag + pick) as f64, best]
    }
}

/// Pitch of un-windowed frames; returns `frames x 2` of `[f0_hz, voicing]`.
pub fn pitch(
    frames: &[Vec<f64>],
    cfg: &PitchConfig,
    sample_rate_hz: u32,
) -> Result<FeatureMatrix, FeatureError> {
    let Some(len) = frames.first().map(Vec::len) else {
        cfg.validate(sample_rate_hz)?;
        return Ok(FeatureMatrix::empty(2));
    };
    let tracker = PitchTracker::new(cfg, sample_rate_hz, len)?;
    let mut data = Vec::with_capacity(frames.len() * 2);
    for f in frames {
        if f.len() != len {
            return Err(FeatureError::Shape(format!(
                "frames of length {} and {len}",
                f.len()
            )));
        }
        data.extend(tracker.frame(f));
    }
    Ok(FeatureMatrix::new(frames.len(), 2, data).expect("two values per frame"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{frame_signal, FrameConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frames_40ms(x: &[f64]) -> Vec<Vec<f64>> {
        let cfg = FrameConfig {
            frame_length_ms: 40.0,
            ..FrameConfig::raw()
        };
        frame_signal(x, 16000, &cfg).unwrap()
    }

    fn sine(f0: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|t| amp * (2.0 * std::f64::consts::PI * f0 * t as f64 / 16000.0).sin())
            .collect()
    }

    #[test]
    fn hundred_hz_sine() {
        let out = pitch(
            &frames_40ms(&sine(100.0, 16000, 0.5)),
            &PitchConfig::default(),
            16000,
        )
        .unwrap();
        for row in out.iter_rows() {
            // lag 160; one quantization step is fs/159 - fs/160
            assert!(
                (row[0] - 100.0).abs() <= 16000.0 / 159.0 - 100.0 + 1e-9,
                "{}",
                row[0]
            );
            assert!(row[1] > 0.9);
        }
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..16000).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let out = pitch(&frames_40ms(&x), &PitchConfig::default(), 16000).unwrap();
        let unvoiced = out.iter_rows().filter(|r| r[0] == 0.0).count();
        assert!(unvoiced * 100 >= out.rows() * 95, "{unvoiced}/{}", out.rows());
    }

    #[test]
    fn zero_frame() {
        let out = pitch(&[vec![0.0; 640]], &PitchConfig::default(), 16000).unwrap();
        assert_eq!(out.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn scale_invariant() {
        let x = sine(187.0, 8000, 0.2);
        let base = pitch(&frames_40ms(&x), &PitchConfig::default(), 16000).unwrap();
        for scale in [0.5, 2.0, 3.7] {
            let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let scaled = pitch(&frames_40ms(&y), &PitchConfig::default(), 16000).unwrap();
            for (a, b) in base.iter_rows().zip(scaled.iter_rows()) {
                assert_eq!(a[0], b[0]);
            }
        }
    }

    #[test]
    fn empty_lag_range() {
        // 80-sample frames cannot hold lags of 267 samples or more
        let cfg = PitchConfig {
            min_f0_hz: 50.0,
            max_f0_hz: 60.0,
            ..Default::default()
        };
        assert!(pitch(&[vec![0.1; 80]], &cfg, 16000).is_err());
        let bad = PitchConfig {
            min_f0_hz: 500.0,
            max_f0_hz: 400.0,
            ..Default::default()
        };
        assert!(bad.validate(16000).is_err());
    }
}
