use serde::{Deserialize, Serialize};

use super::mel::MelFilterbankConfig;
use super::FeatureError;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub num_ceps: usize,
    /// Cepstral lifter `L`; 0 disables liftering.
    pub lifter_coeff: f64,
    pub mel: MelFilterbankConfig,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            num_ceps: 13,
            lifter_coeff: 22.0,
            mel: MelFilterbankConfig::default(),
        }
    }
}

/// Truncated orthonormal DCT-II, optionally followed by sinusoidal liftering.
#[derive(Debug, Clone)]
pub struct CepstralTransform {
    inputs: usize,
    /// `outputs x inputs`, row-major.
    basis: Vec<f64>,
    lifter: Option<Vec<f64>>,
}

impl CepstralTransform {
    pub fn new(inputs: usize, num_ceps: usize, lifter_coeff: f64) -> Result<Self, FeatureError> {
        if num_ceps == 0 || num_ceps > inputs {
            return Err(FeatureError::config(format!(
                "num_ceps {num_ceps} must be in 1..={inputs} (number of filterbank bins)"
            )));
        }
        if !(lifter_coeff >= 0.0) {
            return Err(FeatureError::config(format!(
                "lifter_coeff must be >= 0, got {lifter_coeff}"
            )));
        }
        Ok(Self {
            inputs,
            basis: dct_basis(inputs, num_ceps),
            lifter: (lifter_coeff > 0.0).then(|| lifter_weights(num_ceps, lifter_coeff)),
        })
    }

    pub fn outputs(&self) -> usize {
        self.basis.len() / self.inputs
    }

    pub fn apply_row(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.inputs);
        for (k, basis) in self.basis.chunks_exact(self.inputs).enumerate() {
            let mut c: f64 = basis.iter().zip(input).map(|(b, x)| b * x).sum();
            if let Some(l) = &self.lifter {
                c *= l[k];
            }
            out.push(c);
        }
    }
}

/// Rows `0..outputs` of the orthonormal DCT-II matrix of size `n`.
pub fn dct_basis(n: usize, outputs: usize) -> Vec<f64> {
    let mut basis = Vec::with_capacity(n * outputs);
    for k in 0..outputs {
        let scale = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            let angle = std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64;
            basis.push(scale * angle.cos());
        }
    }
    basis
}

/// `1 + (L/2) sin(pi n / L)` for `n = 0..num_ceps`.
pub fn lifter_weights(num_ceps: usize, lifter_coeff: f64) -> Vec<f64> {
    (0..num_ceps)
        .map(|n| 1.0 + 0.5 * lifter_coeff * (std::f64::consts::PI * n as f64 / lifter_coeff).sin())
        .collect()
}

/// Cepstra of log-mel energies.
pub fn mfcc(fbank_out: &FeatureMatrix, cfg: &MfccConfig) -> Result<FeatureMatrix, FeatureError> {
    if cfg.num_ceps > cfg.mel.num_bins {
        return Err(FeatureError::config(format!(
            "num_ceps {} exceeds num_bins {}",
            cfg.num_ceps, cfg.mel.num_bins
        )));
    }
    let transform = CepstralTransform::new(fbank_out.cols(), cfg.num_ceps, cfg.lifter_coeff)?;
    let mut data = Vec::with_capacity(fbank_out.rows() * cfg.num_ceps);
    for row in fbank_out.iter_rows() {
        transform.apply_row(row, &mut data);
    }
    Ok(FeatureMatrix::new(fbank_out.rows(), cfg.num_ceps, data)
        .expect("num_ceps values per row")
        .with_timing(fbank_out.timing()))
}
