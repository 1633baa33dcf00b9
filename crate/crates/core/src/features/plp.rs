//! Perceptual linear prediction cepstra.
//!
//! Per frame: Bark-band integration, equal-loudness weighting, cube-root-like
//! compression, autocorrelation from the auditory spectrum, Levinson-Durbin,
//! then the LPC-to-cepstrum recursion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::FeatureError;
use crate::matrix::FeatureMatrix;

/// Floor used for the log of the residual energy.
pub const PLP_LOG_FLOOR: f64 = 1e-10;

/// `6 asinh(f / 600)`.
pub fn bark_scale(f_hz: f64) -> f64 {
    6.0 * (f_hz / 600.0).asinh()
}

pub fn inverse_bark(z: f64) -> f64 {
    600.0 * (z / 6.0).sinh()
}

/// `((f^2 + 56.8e6) f^4) / ((f^2 + 6.3e6)^2 (f^2 + 0.38e9))`.
pub fn equal_loudness(f_hz: f64) -> f64 {
    let f2 = f_hz * f_hz;
    ((f2 + 56.8e6) * f2 * f2) / ((f2 + 6.3e6).powi(2) * (f2 + 0.38e9))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlpConfig {
    pub lpc_order: usize,
    pub num_ceps: usize,
    pub num_bark_bins: usize,
    pub compression_exponent: f64,
}

impl Default for PlpConfig {
    fn default() -> Self {
        Self {
            lpc_order: 12,
            num_ceps: 13,
            num_bark_bins: 21,
            compression_exponent: 0.33,
        }
    }
}

impl PlpConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.lpc_order == 0 {
            return Err(FeatureError::config("lpc_order must be positive"));
        }
        if self.num_ceps == 0 || self.num_ceps > self.lpc_order + 1 {
            return Err(FeatureError::config(format!(
                "num_ceps {} must be in 1..={}",
                self.num_ceps,
                self.lpc_order + 1
            )));
        }
        if self.num_bark_bins < 2 {
            return Err(FeatureError::config("num_bark_bins must be >= 2"));
        }
        if !(self.compression_exponent > 0.0) {
            return Err(FeatureError::config("compression_exponent must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpcError {
    #[error("autocorrelation is empty")]
    Empty,
    #[error("autocorrelation is singular at order {0}")]
    Singular(usize),
}

/// Predictor `x[n] ~ sum_k coeffs[k-1] x[n-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpc {
    pub coeffs: Vec<f64>,
    pub reflection: Vec<f64>,
    /// Residual prediction error energy.
    pub error: f64,
}

/// Solves the Toeplitz normal equations for `order` predictor coefficients.
pub fn levinson_durbin(autocorr: &[f64], order: usize) -> Result<Lpc, LpcError> {
    if autocorr.is_empty() || autocorr.len() <= order {
        return Err(LpcError::Empty);
    }
    let mut error = autocorr[0];
    if !(error > 0.0) {
        return Err(LpcError::Singular(0));
    }
    let mut a = vec![0.0; order];
    let mut reflection = Vec::with_capacity(order);
    let mut prev = vec![0.0; order];
    for i in 1..=order {
        let mut acc = autocorr[i];
        for j in 1..i {
            acc -= a[j - 1] * autocorr[i - j];
        }
        let k = acc / error;
        prev[..i - 1].copy_from_slice(&a[..i - 1]);
        a[i - 1] = k;
        for j in 1..i {
            a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
        }
        error *= 1.0 - k * k;
        reflection.push(k);
        if !(error > 0.0) || k.abs() >= 1.0 {
            return Err(LpcError::Singular(i));
        }
    }
    Ok(Lpc {
        coeffs: a,
        reflection,
        error,
    })
}

/// `c0 = ln(error)`, `c_n = a_n + sum_{k=1}^{n-1} (k/n) c_k a_{n-k}` with
/// `a_n = 0` beyond the predictor order.
pub fn lpc_to_cepstrum(lpc: &Lpc, num_ceps: usize) -> Vec<f64> {
    let p = lpc.coeffs.len();
    let a = |n: usize| if n >= 1 && n <= p { lpc.coeffs[n - 1] } else { 0.0 };
    let mut c = Vec::with_capacity(num_ceps);
    if num_ceps == 0 {
        return c;
    }
    c.push(lpc.error.max(PLP_LOG_FLOOR).ln());
    for n in 1..num_ceps {
        let mut v = a(n);
        for k in 1..n {
            v += (k as f64 / n as f64) * c[k] * a(n - k);
        }
        c.push(v);
    }
    c
}

/// Trapezoidal bands on the Bark axis: flat top of one band spacing,
/// falling to zero at the neighboring centers.
#[derive(Debug, Clone)]
pub struct PlpAnalyzer {
    cfg: PlpConfig,
    /// `bands x fft_bins` weights with equal-loudness gain folded in.
    bands: Vec<Vec<f64>>,
    bins: usize,
    /// `(lpc_order + 1) x bands` cosine table for the autocorrelation.
    idft: Vec<Vec<f64>>,
}

impl PlpAnalyzer {
    pub fn new(cfg: &PlpConfig, sample_rate_hz: u32, nfft: usize) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let bins = nfft / 2 + 1;
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let m = cfg.num_bark_bins;
        let z_high = bark_scale(nyquist);
        let spacing = z_high / (m + 1) as f64;
        let bin_bark: Vec<f64> = (0..bins)
            .map(|k| bark_scale(k as f64 * f64::from(sample_rate_hz) / nfft as f64))
            .collect();
        let bands = (1..=m)
            .map(|j| {
                let center = j as f64 * spacing;
                let gain = equal_loudness(inverse_bark(center));
                bin_bark
                    .iter()
                    .map(|&z| {
                        let w = ((spacing - (z - center).abs()) / (0.5 * spacing)).clamp(0.0, 1.0);
                        w * gain
                    })
                    .collect()
            })
            .collect();

        // Real inverse DFT of the auditory spectrum, treated as samples at
        // 0..pi and extended symmetrically to 2(m-1) points.
        let period = (m - 1) as f64;
        let idft = (0..=cfg.lpc_order)
            .map(|k| {
                (0..m)
                    .map(|j| {
                        let weight = if j == 0 || j == m - 1 { 1.0 } else { 2.0 };
                        weight * (std::f64::consts::PI * (j * k) as f64 / period).cos() / (2.0 * period)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            cfg: *cfg,
            bands,
            bins,
            idft,
        })
    }

    pub fn num_ceps(&self) -> usize {
        self.cfg.num_ceps
    }

    /// Compressed, loudness-weighted band energies.
    pub fn auditory_spectrum(&self, power: &[f64]) -> Vec<f64> {
        self.bands
            .iter()
            .map(|w| {
                let e: f64 = w.iter().zip(power).map(|(a, b)| a * b).sum();
                e.max(0.0).powf(self.cfg.compression_exponent)
            })
            .collect()
    }

    pub fn autocorrelation(&self, auditory: &[f64]) -> Vec<f64> {
        self.idft
            .iter()
            .map(|row| row.iter().zip(auditory).map(|(c, p)| c * p).sum())
            .collect()
    }

    /// Appends one frame's cepstra to `out`; returns `false` for a degenerate
    /// frame, which yields `ln(PLP_LOG_FLOOR)` followed by zeros.
    pub fn frame(&self, power: &[f64], out: &mut Vec<f64>) -> bool {
        debug_assert_eq!(power.len(), self.bins);
        let r = self.autocorrelation(&self.auditory_spectrum(power));
        match levinson_durbin(&r, self.cfg.lpc_order) {
            Ok(lpc) if r[0] > PLP_LOG_FLOOR => {
                out.extend(lpc_to_cepstrum(&lpc, self.cfg.num_ceps));
                true
            }
            _ => {
                out.push(PLP_LOG_FLOOR.ln());
                out.extend(std::iter::repeat_n(0.0, self.cfg.num_ceps - 1));
                false
            }
        }
    }
}

/// PLP cepstra plus a per-frame degenerate flag.
pub fn plp(
    spectrum_power: &FeatureMatrix,
    cfg: &PlpConfig,
    sample_rate_hz: u32,
    nfft: usize,
) -> Result<(FeatureMatrix, Vec<bool>), FeatureError> {
    let analyzer = PlpAnalyzer::new(cfg, sample_rate_hz, nfft)?;
    if spectrum_power.cols() != nfft / 2 + 1 {
        return Err(FeatureError::Shape(format!(
            "power spectrum has {} bins, nfft {nfft} needs {}",
            spectrum_power.cols(),
            nfft / 2 + 1
        )));
    }
    let mut data = Vec::with_capacity(spectrum_power.rows() * cfg.num_ceps);
    let degenerate = spectrum_power
        .iter_rows()
        .map(|row| !analyzer.frame(row, &mut data))
        .collect();
    let m = FeatureMatrix::new(spectrum_power.rows(), cfg.num_ceps, data)
        .expect("num_ceps values per frame")
        .with_timing(spectrum_power.timing());
    Ok((m, degenerate))
}
