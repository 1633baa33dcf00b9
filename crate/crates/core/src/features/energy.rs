use super::FeatureError;
use crate::matrix::FeatureMatrix;

pub const POWER_FLOOR: f64 = 1e-10;

/// Sign changes divided by `len - 1`; zero counts as positive.
pub fn zcr_frame(frame: &[f64]) -> f64 {
    let crossings = frame
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    crossings as f64 / (frame.len() - 1) as f64
}

/// `ln(max(sum x^2, 1e-10))`.
pub fn power_frame(frame: &[f64]) -> f64 {
    frame.iter().map(|x| x * x).sum::<f64>().max(POWER_FLOOR).ln()
}

pub fn zero_crossing_rate(frames: &[Vec<f64>]) -> Result<FeatureMatrix, FeatureError> {
    if let Some(f) = frames.iter().find(|f| f.len() < 2) {
        return Err(FeatureError::config(format!(
            "zero crossing rate needs frames of at least 2 samples, got {}",
            f.len()
        )));
    }
    let data = frames.iter().map(|f| zcr_frame(f)).collect();
    Ok(FeatureMatrix::new(frames.len(), 1, data).expect("one value per frame"))
}

pub fn frame_power(frames: &[Vec<f64>]) -> FeatureMatrix {
    let data = frames.iter().map(|f| power_frame(f)).collect();
    FeatureMatrix::new(frames.len(), 1, data).expect("one value per frame")
}
