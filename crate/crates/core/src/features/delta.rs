//! Regression deltas and accelerations with edge-clamped indexing.

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaConfig {
    pub window: usize,
    pub order: usize,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self { window: 2, order: 2 }
    }
}

impl DeltaConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.window == 0 {
            return Err(FeatureError::config("delta window must be >= 1"));
        }
        if !(1..=2).contains(&self.order) {
            return Err(FeatureError::config(format!(
                "delta order must be 1 or 2, got {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Frames of right context needed before a row can be emitted.
    pub fn lookahead(&self) -> usize {
        self.window * self.order
    }
}

/// Incremental delta computation.
///
/// Row `t` is emitted once frame `t + order*window` has arrived, so no right
/// clamping is involved; the remaining rows are emitted by [`DeltaState::finish`]
/// with indices clamped to the final frame. Either way each output value is
/// computed by the same arithmetic, so chunking never changes the result.
#[derive(Debug, Clone)]
pub struct DeltaState {
    cfg: DeltaConfig,
    dim: Option<usize>,
    /// Static frames starting at absolute index `base`.
    rows: Vec<f64>,
    base: usize,
    received: usize,
    emitted: usize,
    denom: f64,
}

impl DeltaState {
    pub fn new(cfg: DeltaConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let denom = 2.0 * (1..=cfg.window).map(|n| (n * n) as f64).sum::<f64>();
        Ok(Self {
            cfg,
            dim: None,
            rows: Vec::new(),
            base: 0,
            received: 0,
            emitted: 0,
            denom,
        })
    }

    pub fn output_dim(&self, dim: usize) -> usize {
        dim * (self.cfg.order + 1)
    }

    pub fn push(&mut self, feat: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        let dim = *self.dim.get_or_insert(feat.cols());
        if feat.cols() != dim {
            return Err(FeatureError::Shape(format!(
                "delta input changed from {dim} to {} columns",
                feat.cols()
            )));
        }
        self.rows.extend_from_slice(feat.data());
        self.received += feat.rows();
        let ready = self.received.saturating_sub(self.cfg.lookahead());
        let out = self.emit_until(ready, dim);
        Ok(out.with_timing(feat.timing()))
    }

    /// Emits every remaining row. `dim` is used when no input was ever seen.
    pub fn finish(&mut self, dim: usize) -> FeatureMatrix {
        let dim = *self.dim.get_or_insert(dim);
        self.emit_until(self.received, dim)
    }

    fn emit_until(&mut self, end: usize, dim: usize) -> FeatureMatrix {
        let out_dim = self.output_dim(dim);
        let mut out = FeatureMatrix::empty(out_dim);
        let mut row = vec![0.0; out_dim];
        while self.emitted < end {
            self.compute_row(self.emitted, dim, &mut row);
            out.push_row(&row).expect("row width is fixed");
            self.emitted += 1;
        }
        // keep the left context the next row needs
        let keep_from = self.emitted.saturating_sub(self.cfg.lookahead());
        if keep_from > self.base {
            self.rows.drain(..(keep_from - self.base) * dim);
            self.base = keep_from;
        }
        out
    }

    fn clamp(&self, t: isize) -> usize {
        t.clamp(0, self.received as isize - 1) as usize
    }

    fn value(&self, t: usize, d: usize, dim: usize) -> f64 {
        self.rows[(t - self.base) * dim + d]
    }

    fn delta(&self, t: usize, d: usize, dim: usize) -> f64 {
        let mut acc = 0.0;
        for n in 1..=self.cfg.window {
            let ahead = self.value(self.clamp(t as isize + n as isize), d, dim);
            let behind = self.value(self.clamp(t as isize - n as isize), d, dim);
            acc += n as f64 * (ahead - behind);
        }
        acc / self.denom
    }

    fn acceleration(&self, t: usize, d: usize, dim: usize) -> f64 {
        let mut acc = 0.0;
        for n in 1..=self.cfg.window {
            let ahead = self.delta(self.clamp(t as isize + n as isize), d, dim);
            let behind = self.delta(self.clamp(t as isize - n as isize), d, dim);
            acc += n as f64 * (ahead - behind);
        }
        acc / self.denom
    }

    fn compute_row(&self, t: usize, dim: usize, row: &mut [f64]) {
        for d in 0..dim {
            row[d] = self.value(t, d, dim);
            row[dim + d] = self.delta(t, d, dim);
            if self.cfg.order == 2 {
                row[2 * dim + d] = self.acceleration(t, d, dim);
            }
        }
    }
}

/// `[static | delta | delta-delta]` columns for every frame.
pub fn add_deltas(feat: &FeatureMatrix, cfg: &DeltaConfig) -> Result<FeatureMatrix, FeatureError> {
    let mut state = DeltaState::new(*cfg)?;
    let mut out = state.push(feat)?;
    out.append(&state.finish(feat.cols())).expect("same width");
    Ok(out.with_timing(feat.timing()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(values: impl IntoIterator<Item = f64>) -> FeatureMatrix {
        let v: Vec<f64> = values.into_iter().collect();
        FeatureMatrix::new(v.len(), 1, v).unwrap()
    }

    #[test]
    fn constant_gives_zero() {
        let out = add_deltas(&column([3.5; 9]), &DeltaConfig::default()).unwrap();
        assert_eq!(out.cols(), 3);
        for row in out.iter_rows() {
            assert_eq!(row, &[3.5, 0.0, 0.0]);
        }
    }

    #[test]
    fn ramp_interior_slope() {
        let out = add_deltas(
            &column((0..10).map(f64::from)),
            &DeltaConfig { window: 2, order: 1 },
        )
        .unwrap();
        for t in 2..8 {
            assert_eq!(out.get(t, 1), 1.0);
        }
        // left edge: (1*(1-0) + 2*(2-0)) / 10
        assert_eq!(out.get(0, 1), 0.5);
    }

    #[test]
    fn single_frame() {
        let out = add_deltas(
            &FeatureMatrix::from_rows(&[[1.0, -2.0]]).unwrap(),
            &DeltaConfig::default(),
        )
        .unwrap();
        assert_eq!(out.row(0), &[1.0, -2.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_input_keeps_width() {
        let out = add_deltas(&FeatureMatrix::empty(4), &DeltaConfig::default()).unwrap();
        assert_eq!(out.shape(), (0, 12));
    }

    #[test]
    fn acceleration_is_delta_of_delta() {
        let x = column([0.0, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0]);
        let first = add_deltas(&x, &DeltaConfig { window: 2, order: 1 }).unwrap();
        let d = column(first.iter_rows().map(|r| r[1]));
        let dd = add_deltas(&d, &DeltaConfig { window: 2, order: 1 }).unwrap();
        let both = add_deltas(&x, &DeltaConfig::default()).unwrap();
        for t in 0..7 {
            assert_eq!(both.get(t, 2), dd.get(t, 1));
        }
    }

    #[test]
    fn bad_config() {
        assert!(DeltaState::new(DeltaConfig { window: 0, order: 1 }).is_err());
        assert!(DeltaState::new(DeltaConfig { window: 1, order: 3 }).is_err());
    }

    proptest! {
        #[test]
        fn chunked_equals_whole(
            rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 0..30),
            chunk in 1usize..7,
            window in 1usize..4,
            order in 1usize..3,
        ) {
            let cfg = DeltaConfig { window, order };
            let feat = if rows.is_empty() { FeatureMatrix::empty(2) } else { FeatureMatrix::from_rows(&rows).unwrap() };
            let whole = add_deltas(&feat, &cfg).unwrap();
            let mut state = DeltaState::new(cfg).unwrap();
            let mut out = FeatureMatrix::empty(2 * (order + 1));
            for piece in rows.chunks(chunk) {
                out.append(&state.push(&FeatureMatrix::from_rows(piece).unwrap()).unwrap()).unwrap();
            }
            out.append(&state.finish(2)).unwrap();
            prop_assert!(whole.bit_eq(&out));
        }

        #[test]
        fn linear(
            a in prop::collection::vec(-10.0f64..10.0, 1..20),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            seed in 0u64..1000,
        ) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| (v * 1.7 + i as f64 + seed as f64).sin()).collect();
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
            let cfg = DeltaConfig::default();
            let da = add_deltas(&column(a.clone()), &cfg).unwrap();
            let db = add_deltas(&column(b), &cfg).unwrap();
            let dc = add_deltas(&column(combo), &cfg).unwrap();
            for i in 0..dc.data().len() {
                let expected = alpha * da.data()[i] + beta * db.data()[i];
                prop_assert!((dc.data()[i] - expected).abs() <= 1e-12 * (1.0 + expected.abs()) * 10.0);
            }
        }
    }
}
