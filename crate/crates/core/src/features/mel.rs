use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::matrix::FeatureMatrix;

/// `1127 ln(1 + f/700)`.
pub fn mel_scale(f_hz: f64) -> Result<f64, FeatureError> {
    if !(f_hz >= 0.0) {
        return Err(FeatureError::NegativeFrequency(f_hz));
    }
    Ok(mel(f_hz))
}

pub(crate) fn mel(f_hz: f64) -> f64 {
    1127.0 * (1.0 + f_hz / 700.0).ln()
}

pub fn inverse_mel(m: f64) -> f64 {
    700.0 * ((m / 1127.0).exp() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelFilterbankConfig {
    pub num_bins: usize,
    pub low_freq_hz: f64,
    /// `None` means the Nyquist frequency.
    pub high_freq_hz: Option<f64>,
    pub log_floor: f64,
}

impl Default for MelFilterbankConfig {
    fn default() -> Self {
        Self {
            num_bins: 40,
            low_freq_hz: 20.0,
            high_freq_hz: None,
            log_floor: 1e-10,
        }
    }
}

impl MelFilterbankConfig {
    pub fn high_freq(&self, sample_rate_hz: u32) -> f64 {
        self.high_freq_hz.unwrap_or(f64::from(sample_rate_hz) / 2.0)
    }

    pub fn validate(&self, sample_rate_hz: u32) -> Result<(), FeatureError> {
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let high = self.high_freq(sample_rate_hz);
        if self.num_bins < 2 {
            return Err(FeatureError::config(format!(
                "num_bins must be >= 2, got {}",
                self.num_bins
            )));
        }
        if !(self.low_freq_hz >= 0.0) {
            return Err(FeatureError::config(format!(
                "low_freq_hz must be >= 0, got {}",
                self.low_freq_hz
            )));
        }
        if !(self.low_freq_hz < high && high <= nyquist) {
            return Err(FeatureError::config(format!(
                "need low_freq_hz < high_freq_hz <= nyquist, got {} / {high} / {nyquist}",
                self.low_freq_hz
            )));
        }
        if !(self.log_floor > 0.0) {
            return Err(FeatureError::config(format!(
                "log_floor must be positive, got {}",
                self.log_floor
            )));
        }
        Ok(())
    }
}

/// One triangular filter: weights for FFT bins `first..first + weights.len()`.
#[derive(Debug, Clone)]
struct Triangle {
    first: usize,
    weights: Vec<f64>,
}

/// Triangular filters on the mel axis, evaluated at FFT bin frequencies.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    filters: Vec<Triangle>,
    centers_hz: Vec<f64>,
    bins: usize,
    log_floor: f64,
}

impl MelFilterbank {
    pub fn new(cfg: &MelFilterbankConfig, sample_rate_hz: u32, nfft: usize) -> Result<Self, FeatureError> {
        cfg.validate(sample_rate_hz)?;
        let bins = nfft / 2 + 1;
        let mel_low = mel(cfg.low_freq_hz);
        let mel_high = mel(cfg.high_freq(sample_rate_hz));
        let step = (mel_high - mel_low) / (cfg.num_bins + 1) as f64;
        let points: Vec<f64> = (0..cfg.num_bins + 2).map(|i| mel_low + i as f64 * step).collect();
        let bin_mel: Vec<f64> = (0..bins)
            .map(|k| mel(k as f64 * f64::from(sample_rate_hz) / nfft as f64))
            .collect();

        let filters = (0..cfg.num_bins)
            .map(|j| {
                let (left, center, right) = (points[j], points[j + 1], points[j + 2]);
                let dense: Vec<f64> = bin_mel
                    .iter()
                    .map(|&m| {
                        if m > left && m <= center {
                            (m - left) / (center - left)
                        } else if m > center && m < right {
                            (right - m) / (right - center)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let first = dense.iter().position(|&w| w > 0.0).unwrap_or(0);
                let last = dense.iter().rposition(|&w| w > 0.0).map_or(first, |p| p + 1);
                Triangle {
                    first,
                    weights: dense[first..last].to_vec(),
                }
            })
            .collect();
        Ok(Self {
            filters,
            centers_hz: points[1..=cfg.num_bins].iter().map(|&m| inverse_mel(m)).collect(),
            bins,
            log_floor: cfg.log_floor,
        })
    }

    pub fn num_filters(&self) -> usize {
        self.filters.len()
    }

    pub fn num_fft_bins(&self) -> usize {
        self.bins
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Dense `num_filters x fft_bins` weight matrix.
    pub fn weights(&self) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(self.filters.len(), self.bins);
        for (j, f) in self.filters.iter().enumerate() {
            m.row_mut(j)[f.first..f.first + f.weights.len()].copy_from_slice(&f.weights);
        }
        m
    }

    /// Appends `ln(max(energy_j, floor))` for every filter.
    pub fn log_energies(&self, power: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(power.len(), self.bins);
        for f in &self.filters {
            let energy: f64 = f.weights.iter().zip(&power[f.first..]).map(|(w, p)| w * p).sum();
            out.push(energy.max(self.log_floor).ln());
        }
    }
}

/// Log mel filterbank energies of a `frames x (nfft/2 + 1)` power spectrum.
pub fn fbank(
    spectrum_power: &FeatureMatrix,
    cfg: &MelFilterbankConfig,
    sample_rate_hz: u32,
    nfft: usize,
) -> Result<FeatureMatrix, FeatureError> {
    let bank = MelFilterbank::new(cfg, sample_rate_hz, nfft)?;
    if spectrum_power.cols() != bank.num_fft_bins() {
        return Err(FeatureError::Shape(format!(
            "power spectrum has {} bins, nfft {nfft} needs {}",
            spectrum_power.cols(),
            bank.num_fft_bins()
        )));
    }
    let mut data = Vec::with_capacity(spectrum_power.rows() * cfg.num_bins);
    for row in spectrum_power.iter_rows() {
        bank.log_energies(row, &mut data);
    }
    Ok(FeatureMatrix::new(spectrum_power.rows(), cfg.num_bins, data)
        .expect("one value per filter")
        .with_timing(spectrum_power.timing()))
}
