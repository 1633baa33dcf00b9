//! Framing with snip-edges semantics, plus per-frame conditioning.

use serde::{Deserialize, Serialize};

use super::DspError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Hamming,
    Rectangular,
}

impl WindowKind {
    /// Symmetric window of length `len` (denominator `len - 1`).
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        if len == 1 {
            return vec![1.0];
        }
        let denom = (len - 1) as f64;
        (0..len)
            .map(|t| {
                let c = (2.0 * std::f64::consts::PI * t as f64 / denom).cos();
                match self {
                    WindowKind::Hann => 0.5 - 0.5 * c,
                    WindowKind::Hamming => 0.54 - 0.46 * c,
                    WindowKind::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

/// Frame geometry and conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub preemph_coeff: f64,
    pub window: WindowKind,
    pub remove_dc: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self::features()
    }
}

impl FrameConfig {
    /// 25 ms / 10 ms, hamming, pre-emphasis 0.97, DC removal.
    pub fn features() -> Self {
        Self {
            frame_length_ms: 25.0,
            frame_shift_ms: 10.0,
            preemph_coeff: 0.97,
            window: WindowKind::Hamming,
            remove_dc: true,
        }
    }

    /// Hann at 50% overlap with no pre-emphasis or DC removal.
    pub fn analysis() -> Self {
        Self {
            frame_length_ms: 25.0,
            frame_shift_ms: 12.5,
            preemph_coeff: 0.0,
            window: WindowKind::Hann,
            remove_dc: false,
        }
    }

    /// Un-conditioned frames (rectangular window, no pre-emphasis, no DC removal).
    pub fn raw() -> Self {
        Self {
            frame_length_ms: 25.0,
            frame_shift_ms: 10.0,
            preemph_coeff: 0.0,
            window: WindowKind::Rectangular,
            remove_dc: false,
        }
    }

    pub fn frame_length(&self, sample_rate_hz: u32) -> usize {
        ms_to_samples(self.frame_length_ms, sample_rate_hz)
    }

    pub fn frame_shift(&self, sample_rate_hz: u32) -> usize {
        ms_to_samples(self.frame_shift_ms, sample_rate_hz)
    }

    pub fn validate(&self, sample_rate_hz: u32) -> Result<(), DspError> {
        let bad = |msg: String| Err(DspError::InvalidConfig(msg));
        if !(self.frame_length_ms > 0.0 && self.frame_length_ms.is_finite()) {
            return bad(format!(
                "frame_length_ms must be positive, got {}",
                self.frame_length_ms
            ));
        }
        if !(self.frame_shift_ms > 0.0 && self.frame_shift_ms.is_finite()) {
            return bad(format!(
                "frame_shift_ms must be positive, got {}",
                self.frame_shift_ms
            ));
        }
        if self.frame_shift_ms > self.frame_length_ms {
            return bad(format!(
                "frame_shift_ms {} exceeds frame_length_ms {}",
                self.frame_shift_ms, self.frame_length_ms
            ));
        }
        if !(0.0..1.0).contains(&self.preemph_coeff) {
            return bad(format!(
                "preemph_coeff must lie in [0, 1), got {}",
                self.preemph_coeff
            ));
        }
        if sample_rate_hz == 0 {
            return bad("sample rate must be positive".into());
        }
        if self.frame_length(sample_rate_hz) == 0 || self.frame_shift(sample_rate_hz) == 0 {
            return bad(format!(
                "frame of {} ms / shift {} ms is shorter than one sample at {} Hz",
                self.frame_length_ms, self.frame_shift_ms, sample_rate_hz
            ));
        }
        Ok(())
    }
}

fn ms_to_samples(ms: f64, sample_rate_hz: u32) -> usize {
    (ms * f64::from(sample_rate_hz) / 1000.0).round() as usize
}

/// Number of snip-edges frames: 0 if `n < len`, else `(n - len) / shift + 1`.
pub fn num_frames(n: usize, len: usize, shift: usize) -> usize {
    if n < len {
        0
    } else {
        (n - len) / shift + 1
    }
}

/// Incremental framer. Frame `m` covers samples `[m*shift, m*shift + len)`
/// of the concatenated input; chunk boundaries do not affect the frames.
#[derive(Debug, Clone)]
pub struct Framer {
    len: usize,
    shift: usize,
    buf: Vec<f64>,
    /// Absolute index of `buf[0]`.
    buf_start: usize,
    next_frame: usize,
}

impl Framer {
    pub fn new(len: usize, shift: usize) -> Self {
        assert!(len > 0 && shift > 0, "frame length and shift must be positive");
        Self {
            len,
            shift,
            buf: Vec::new(),
            buf_start: 0,
            next_frame: 0,
        }
    }

    pub fn frame_length(&self) -> usize {
        self.len
    }

    /// Feeds samples and returns every frame that is now complete.
    pub fn push(&mut self, samples: &[f64]) -> Vec<Vec<f64>> {
        self.buf.extend_from_slice(samples);
        let available = self.buf_start + self.buf.len();
        let mut frames = Vec::new();
        loop {
            let start = self.next_frame * self.shift;
            if start + self.len > available {
                break;
            }
            let rel = start - self.buf_start;
            frames.push(self.buf[rel..rel + self.len].to_vec());
            self.next_frame += 1;
        }
        // drop samples no later frame can reach
        let keep_from = (self.next_frame * self.shift).min(available);
        if keep_from > self.buf_start {
            self.buf.drain(..keep_from - self.buf_start);
            self.buf_start = keep_from;
        }
        frames
    }

    /// Samples currently held back waiting for more input.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    /// Test hook: adds `delta` to the newest buffered sample. Returns `false`
    /// when nothing is buffered.
    #[doc(hidden)]
    pub fn perturb_pending(&mut self, delta: f64) -> bool {
        match self.buf.last_mut() {
            Some(s) => {
                *s += delta;
                true
            }
            None => false,
        }
    }
}

/// DC removal, pre-emphasis and windowing applied to one frame.
#[derive(Debug, Clone)]
pub struct FrameConditioner {
    preemph: f64,
    remove_dc: bool,
    window: Vec<f64>,
}

impl FrameConditioner {
    pub fn new(cfg: &FrameConfig, len: usize) -> Self {
        Self {
            preemph: cfg.preemph_coeff,
            remove_dc: cfg.remove_dc,
            window: cfg.window.coefficients(len),
        }
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn apply(&self, frame: &mut [f64]) {
        if self.remove_dc && !frame.is_empty() {
            let mean = frame.iter().sum::<f64>() / frame.len() as f64;
            for x in frame.iter_mut() {
                *x -= mean;
            }
        }
        if self.preemph != 0.0 {
            preemphasize(frame, self.preemph);
        }
        for (x, w) in frame.iter_mut().zip(&self.window) {
            *x *= w;
        }
    }
}

/// `y[t] = x[t] - k x[t-1]`, with `y[0] = x[0] - k x[0]`.
pub fn preemphasize(frame: &mut [f64], k: f64) {
    for t in (1..frame.len()).rev() {
        frame[t] -= k * frame[t - 1];
    }
    if let Some(first) = frame.first_mut() {
        *first -= k * *first;
    }
}

/// Frames `samples` and conditions each frame according to `cfg`.
pub fn frame_signal(
    samples: &[f64],
    sample_rate_hz: u32,
    cfg: &FrameConfig,
) -> Result<Vec<Vec<f64>>, DspError> {
    cfg.validate(sample_rate_hz)?;
    let len = cfg.frame_length(sample_rate_hz);
    let mut framer = Framer::new(len, cfg.frame_shift(sample_rate_hz));
    let conditioner = FrameConditioner::new(cfg, len);
    let mut frames = framer.push(samples);
    for f in &mut frames {
        conditioner.apply(f);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw_ms(len_ms: f64, shift_ms: f64) -> FrameConfig {
        FrameConfig {
            frame_length_ms: len_ms,
            frame_shift_ms: shift_ms,
            ..FrameConfig::raw()
        }
    }

    #[test]
    fn frame_counts() {
        let cfg = raw_ms(25.0, 10.0);
        assert_eq!(frame_signal(&vec![0.0; 400], 16000, &cfg).unwrap().len(), 1);
        assert_eq!(frame_signal(&vec![0.0; 720], 16000, &cfg).unwrap().len(), 3);
        assert_eq!(frame_signal(&vec![0.0; 399], 16000, &cfg).unwrap().len(), 0);
        assert_eq!(frame_signal(&[], 16000, &cfg).unwrap().len(), 0);
    }

    #[test]
    fn frames_start_at_multiples_of_shift() {
        let x: Vec<f64> = (0..720).map(|i| i as f64 / 1000.0).collect();
        let frames = frame_signal(&x, 16000, &raw_ms(25.0, 10.0)).unwrap();
        for (m, f) in frames.iter().enumerate() {
            assert_eq!(f[0], x[m * 160]);
            assert_eq!(f.len(), 400);
        }
    }

    #[test]
    fn preemphasis_of_ones() {
        let mut f = vec![1.0, 1.0, 1.0];
        preemphasize(&mut f, 0.97);
        for v in f {
            assert!((v - 0.03).abs() < 1e-15);
        }
    }

    #[test]
    fn windows() {
        let hann = WindowKind::Hann.coefficients(5);
        assert_eq!(hann[0], 0.0);
        assert!((hann[2] - 1.0).abs() < 1e-15);
        assert!((hann[4]).abs() < 1e-15);
        let hamming = WindowKind::Hamming.coefficients(5);
        assert!((hamming[0] - 0.08).abs() < 1e-15);
        assert_eq!(WindowKind::Rectangular.coefficients(3), vec![1.0; 3]);
    }

    #[test]
    fn config_validation() {
        assert!(FrameConfig::features().validate(16000).is_ok());
        assert!(raw_ms(10.0, 25.0).validate(16000).is_err());
        assert!(raw_ms(0.0, 0.0).validate(16000).is_err());
        assert!(raw_ms(0.01, 0.01).validate(16000).is_err());
        let mut c = FrameConfig::features();
        c.preemph_coeff = 1.0;
        assert!(c.validate(16000).is_err());
    }

    proptest! {
        #[test]
        fn count_formula_holds(n in 0usize..3000, len in 1usize..500, shift_frac in 0.01f64..1.0) {
            let shift = ((len as f64 * shift_frac) as usize).max(1);
            let mut framer = Framer::new(len, shift);
            let frames = framer.push(&vec![0.5; n]);
            let expected = if n < len { 0 } else { (n - len) / shift + 1 };
            prop_assert_eq!(frames.len(), expected);
            prop_assert_eq!(num_frames(n, len, shift), expected);
        }

        #[test]
        fn chunking_does_not_change_frames(
            n in 0usize..2000,
            chunk in 1usize..300,
        ) {
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let whole = Framer::new(400, 160).push(&x);
            let mut framer = Framer::new(400, 160);
            let mut pieces = Vec::new();
            for c in x.chunks(chunk) {
                pieces.extend(framer.push(c));
                prop_assert!(framer.pending() < 400 + chunk);
            }
            prop_assert_eq!(whole, pieces);
        }
    }
}
