//! Frame-wise concatenation of two feature streams.

use thiserror::Error;

use crate::matrix::FeatureMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConcatError {
    #[error(
        "cannot concatenate {a_rows}x{a_cols} with {b_rows}x{b_cols}: row counts must match or one side must have exactly 1 row"
    )]
    Shape {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error("input {0} finished without producing features")]
    MissingInput(char),
}

/// Incremental concatenation. Rows are emitted as soon as both sides have
/// them; a side that finishes with a single row is repeated across time.
#[derive(Debug, Clone, Default)]
pub struct ConcatState {
    a: Option<FeatureMatrix>,
    b: Option<FeatureMatrix>,
    emitted: usize,
}

fn absorb(slot: &mut Option<FeatureMatrix>, piece: Option<&FeatureMatrix>) -> Result<(), ConcatError> {
    if let Some(p) = piece {
        match slot {
            Some(m) => {
                if m.append(p).is_err() {
                    return Err(ConcatError::Shape {
                        a_rows: m.rows(),
                        a_cols: m.cols(),
                        b_rows: p.rows(),
                        b_cols: p.cols(),
                    });
                }
            }
            None => *slot = Some(p.clone()),
        }
    }
    Ok(())
}

impl ConcatState {
    pub fn push(
        &mut self,
        a: Option<&FeatureMatrix>,
        a_done: bool,
        b: Option<&FeatureMatrix>,
        b_done: bool,
    ) -> Result<Option<FeatureMatrix>, ConcatError> {
        absorb(&mut self.a, a)?;
        absorb(&mut self.b, b)?;
        let (Some(ma), Some(mb)) = (&self.a, &self.b) else {
            return match (a_done && self.a.is_none(), b_done && self.b.is_none()) {
                (true, _) => Err(ConcatError::MissingInput('a')),
                (_, true) => Err(ConcatError::MissingInput('b')),
                _ => Ok(None),
            };
        };
        let (ta, tb) = (ma.rows(), mb.rows());
        let shape_error = || ConcatError::Shape {
            a_rows: ta,
            a_cols: ma.cols(),
            b_rows: tb,
            b_cols: mb.cols(),
        };
        let target = if a_done && b_done {
            if ta == tb || tb == 1 {
                ta
            } else if ta == 1 {
                tb
            } else {
                return Err(shape_error());
            }
        } else if b_done && tb == 1 {
            ta
        } else if a_done && ta == 1 {
            tb
        } else {
            ta.min(tb)
        };

        let mut out = FeatureMatrix::empty(ma.cols() + mb.cols()).with_timing(ma.timing().or(mb.timing()));
        let mut row = Vec::with_capacity(out.cols());
        for i in self.emitted..target {
            row.clear();
            row.extend_from_slice(ma.row(if i < ta { i } else { 0 }));
            row.extend_from_slice(mb.row(if i < tb { i } else { 0 }));
            out.push_row(&row).expect("row width is fixed");
        }
        self.emitted = self.emitted.max(target);
        Ok(Some(out))
    }
}

/// `T x (D_a + D_b)`; a single-row side is broadcast across the other's rows.
pub fn concat_features(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix, ConcatError> {
    let mut state = ConcatState::default();
    Ok(state
        .push(Some(a), true, Some(b), true)?
        .expect("both sides present"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn filled(rows: usize, cols: usize, base: f64) -> FeatureMatrix {
        FeatureMatrix::new(rows, cols, (0..rows * cols).map(|i| base + i as f64).collect()).unwrap()
    }

    #[test]
    fn shapes() {
        let c = concat_features(&filled(3, 4, 0.0), &filled(3, 2, 100.0)).unwrap();
        assert_eq!(c.shape(), (3, 6));
        assert_eq!(c.row(1), &[4.0, 5.0, 6.0, 7.0, 102.0, 103.0]);

        let c = concat_features(&filled(3, 4, 0.0), &filled(1, 2, 100.0)).unwrap();
        assert_eq!(c.shape(), (3, 6));
        for r in 0..3 {
            assert_eq!(&c.row(r)[4..], &[100.0, 101.0]);
        }

        let c = concat_features(&filled(1, 1, 7.0), &filled(2, 2, 0.0)).unwrap();
        assert_eq!(c.row(1), &[7.0, 2.0, 3.0]);

        let err = concat_features(&filled(3, 4, 0.0), &filled(2, 2, 0.0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("3x4") && msg.contains("2x2"), "{msg}");
    }

    #[test]
    fn zero_rows_against_one_row() {
        let c = concat_features(&filled(0, 3, 0.0), &filled(1, 2, 0.0)).unwrap();
        assert_eq!(c.shape(), (0, 5));
    }

    proptest! {
        #[test]
        fn chunked_matches_whole(ta in 0usize..12, tb_one: bool, split in prop::collection::vec(1usize..5, 1..8)) {
            let a = filled(ta, 2, 0.0);
            let tb = if tb_one { 1 } else { ta };
            let b = filled(tb, 3, 50.0);
            let whole = concat_features(&a, &b).unwrap();

            // a arrives in pieces, b arrives whole with the first piece
            let mut bounds = vec![0];
            for &n in split.iter().cycle() {
                let last = *bounds.last().unwrap();
                if last >= ta {
                    break;
                }
                bounds.push((last + n).min(ta));
            }
            if bounds.len() == 1 {
                bounds.push(0);
            }
            let mut state = ConcatState::default();
            let mut got = FeatureMatrix::empty(5);
            for (k, w) in bounds.windows(2).enumerate() {
                let piece = FeatureMatrix::new(w[1] - w[0], 2, a.data()[w[0] * 2..w[1] * 2].to_vec()).unwrap();
                let done = k + 2 == bounds.len();
                let bpiece = (k == 0).then_some(&b);
                if let Some(o) = state.push(Some(&piece), done, bpiece, true).unwrap() {
                    got.append(&o).unwrap();
                }
            }
            prop_assert!(got.bit_eq(&whole));
        }
    }
}
