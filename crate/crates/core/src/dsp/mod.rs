//! Framing, windowing, FFT and the analysis/synthesis filterbank pair.

pub mod fft;
pub mod filterbank;
pub mod frame;

use thiserror::Error;

pub use fft::{fft_real, next_pow2, Fft};
pub use filterbank::{analysis_filterbank, check_cola, synthesis_filterbank, Spectrum};
pub use frame::{frame_signal, num_frames, FrameConditioner, FrameConfig, Framer, WindowKind};

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("FFT size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("frame of {len} samples does not fit FFT size {nfft}")]
    FrameTooLong { len: usize, nfft: usize },
    #[error("invalid frame configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not constant-overlap-add: {0}")]
    NotCola(String),
}
