use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use thiserror::Error;

/// Largest f64 below 1.0, the upper end of the sample domain.
pub const MAX_SAMPLE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("unsupported channel count {0}: only mono input is accepted")]
    UnsupportedChannels(u16),
    #[error("unsupported bit depth {0}: only 16-bit PCM is accepted")]
    UnsupportedBitDepth(u16),
    #[error("unsupported encoding: only integer PCM is accepted")]
    UnsupportedEncoding,
    #[error("wav parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("sample {index} = {value} lies outside [-1, 1)")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
}

/// Mono audio at unit scale: every sample lies in `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, WavError> {
        if sample_rate_hz == 0 {
            return Err(WavError::ZeroSampleRate);
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(-1.0..1.0).contains(*s))
        {
            return Err(WavError::SampleOutOfRange { index, value });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Builds a waveform after clamping every sample into `[-1, 1)`.
    /// NaN samples become 0.
    pub fn clamped(mut samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, WavError> {
        for s in &mut samples {
            *s = if s.is_nan() {
                0.0
            } else {
                s.clamp(-1.0, MAX_SAMPLE)
            };
        }
        Self::new(samples, sample_rate_hz)
    }

    pub fn from_i16(samples: &[i16], sample_rate_hz: u32) -> Result<Self, WavError> {
        Self::new(
            samples.iter().map(|&s| f64::from(s) / 32768.0).collect(),
            sample_rate_hz,
        )
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    /// Quantizes to 16-bit PCM by rounding `s * 32768`.
    pub fn to_i16(&self) -> Vec<i16> {
        self.samples
            .iter()
            .map(|&s| (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16)
            .collect()
    }
}

fn map_hound(err: hound::Error) -> WavError {
    match err {
        // the file is already open, so read failures mean short or damaged data
        hound::Error::IoError(e) => WavError::Parse(format!("truncated file: {e}")),
        hound::Error::FormatError(msg) => WavError::Parse(msg.into()),
        hound::Error::Unsupported => WavError::UnsupportedEncoding,
        other => WavError::Parse(other.to_string()),
    }
}

/// Reads 16-bit PCM mono RIFF/WAVE; samples are scaled by 1/32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform, WavError> {
    let file = File::open(path)?;
    read_wav_from(BufReader::new(file))
}

pub fn read_wav_from<R: Read>(reader: R) -> Result<Waveform, WavError> {
    let mut reader = hound::WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(WavError::UnsupportedEncoding);
    }
    if spec.channels != 1 {
        return Err(WavError::UnsupportedChannels(spec.channels));
    }
    if spec.bits_per_sample != 16 {
        return Err(WavError::UnsupportedBitDepth(spec.bits_per_sample));
    }
    let ints = reader
        .samples::<i16>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(map_hound)?;
    Waveform::from_i16(&ints, spec.sample_rate)
}

pub fn write_wav(path: impl AsRef<Path>, wave: &Waveform) -> Result<(), WavError> {
    let file = BufWriter::new(File::create(path)?);
    write_wav_to(file, wave)
}

pub fn write_wav_to<W: Write + Seek>(writer: W, wave: &Waveform) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut out = hound::WavWriter::new(writer, spec).map_err(map_hound)?;
    for s in wave.to_i16() {
        out.write_sample(s).map_err(map_hound)?;
    }
    out.finalize().map_err(map_hound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn wav_bytes(channels: u16, bits: u16, samples: &[i32]) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels,
            sample_rate: 16000,
            bits_per_sample: bits,
            sample_format: hound::SampleFormat::Int,
        };
        let mut buf = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        buf.into_inner()
    }

    #[test]
    fn scales_by_32768() {
        let bytes = wav_bytes(1, 16, &[0, 16384, -32768]);
        let w = read_wav_from(Cursor::new(bytes)).unwrap();
        assert_eq!(w.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(w.sample_rate_hz(), 16000);
    }

    #[test]
    fn empty_data_chunk() {
        let w = read_wav_from(Cursor::new(wav_bytes(1, 16, &[]))).unwrap();
        assert!(w.is_empty());
        assert_eq!(w.sample_rate_hz(), 16000);
    }

    #[test]
    fn rejects_stereo() {
        let err = read_wav_from(Cursor::new(wav_bytes(2, 16, &[1, 2]))).unwrap_err();
        assert!(err.to_string().contains("unsupported channel count"), "{err}");
    }

    #[test]
    fn rejects_other_depths_and_float() {
        let err = read_wav_from(Cursor::new(wav_bytes(1, 8, &[1, 2]))).unwrap_err();
        assert!(matches!(err, WavError::UnsupportedBitDepth(8)));

        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut buf = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        w.write_sample(0.25f32).unwrap();
        w.finalize().unwrap();
        let err = read_wav_from(Cursor::new(buf.into_inner())).unwrap_err();
        assert!(matches!(err, WavError::UnsupportedEncoding));
    }

    #[test]
    fn truncated_is_parse_error() {
        let mut bytes = wav_bytes(1, 16, &[1, 2, 3, 4, 5]);
        bytes.truncate(bytes.len() - 3);
        let err = read_wav_from(Cursor::new(bytes)).unwrap_err();
        assert!(matches!(err, WavError::Parse(_)), "{err}");

        let err = read_wav_from(Cursor::new(b"RIFF\x10\x00".to_vec())).unwrap_err();
        assert!(matches!(err, WavError::Parse(_)), "{err}");
    }

    #[test]
    fn write_then_read_is_lossless_for_pcm_values() {
        let ints: Vec<i16> = vec![-32768, -1, 0, 1, 12345, 32767];
        let w = Waveform::from_i16(&ints, 22050).unwrap();
        let mut buf = Cursor::new(Vec::new());
        write_wav_to(&mut buf, &w).unwrap();
        let back = read_wav_from(Cursor::new(buf.into_inner())).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.to_i16(), ints);
    }

    #[test]
    fn waveform_invariants() {
        assert!(Waveform::new(vec![1.0], 16000).is_err());
        assert!(Waveform::new(vec![0.0], 0).is_err());
        let c = Waveform::clamped(vec![2.0, -3.0, f64::NAN], 8000).unwrap();
        assert_eq!(c.samples(), &[MAX_SAMPLE, -1.0, 0.0]);
        assert!(MAX_SAMPLE < 1.0 && MAX_SAMPLE.next_up() == 1.0);
        assert_eq!(c.to_i16(), [32767, -32768, 0]);
    }
}
