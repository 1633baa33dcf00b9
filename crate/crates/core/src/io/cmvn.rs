use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::normalization::{CmvnError, CmvnStats};

#[derive(Debug, Error)]
pub enum CmvnFileError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed statistics file {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("invalid statistics in {path}: {source}")]
    Invalid { path: String, source: CmvnError },
}

/// Reads statistics JSON (`dim`, `count`, `sum`, `sumsq`).
pub fn read_cmvn(path: impl AsRef<Path>) -> Result<CmvnStats, CmvnFileError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CmvnFileError::Io {
        path: name.clone(),
        source,
    })?;
    let stats: CmvnStats = serde_json::from_str(&text).map_err(|source| CmvnFileError::Json {
        path: name.clone(),
        source,
    })?;
    stats
        .validate()
        .map_err(|source| CmvnFileError::Invalid { path: name, source })?;
    Ok(stats)
}

/// Writes statistics as JSON. f64 values use shortest round-trip formatting,
/// so a read returns bit-identical numbers.
pub fn write_cmvn(stats: &CmvnStats, path: impl AsRef<Path>) -> Result<(), CmvnFileError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    stats.validate().map_err(|source| CmvnFileError::Invalid {
        path: name.clone(),
        source,
    })?;
    let mut text = serde_json::to_string_pretty(stats).expect("statistics serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CmvnFileError::Io { path: name, source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stats_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = CmvnStats::new(2).unwrap();
        write_cmvn(&s, &p).unwrap();
        assert_eq!(read_cmvn(&p).unwrap(), s);
    }

    #[test]
    fn values_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = CmvnStats {
            dim: 2,
            count: 7,
            sum: vec![1.5, -2.25],
            sumsq: vec![0.1 + 0.2, 1.0 / 3.0],
        };
        write_cmvn(&s, &p).unwrap();
        let back = read_cmvn(&p).unwrap();
        assert_eq!(back.count, 7);
        for (a, b) in back
            .sum
            .iter()
            .chain(&back.sumsq)
            .zip(s.sum.iter().chain(&s.sumsq))
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, r#"{"dim":2,"count":1,"sum":[1,2],"sumsq":[1]}"#).unwrap();
        let err = read_cmvn(&p).unwrap_err();
        assert!(matches!(err, CmvnFileError::Invalid { .. }), "{err}");

        let s = CmvnStats {
            dim: 3,
            count: 0,
            sum: vec![0.0; 3],
            sumsq: vec![0.0; 2],
        };
        assert!(write_cmvn(&s, &p).is_err());
    }
}
