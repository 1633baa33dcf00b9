//! Frame-major feature matrices.

use thiserror::Error;

/// Frame timing carried alongside extracted features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameTiming {
    pub sample_rate_hz: u32,
    pub frame_length: usize,
    pub frame_shift: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("row {index} has {got} columns, expected {expected}")]
    RaggedRow {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("cannot append {got}-column rows to a {expected}-column matrix")]
    ColumnMismatch { expected: usize, got: usize },
}

/// A `rows x cols` real matrix stored row-major. One row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    timing: Option<FrameTiming>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ShapeError> {
        if data.len() != rows * cols {
            return Err(ShapeError::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            timing: None,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            timing: None,
        }
    }

    /// An empty matrix with a fixed column count.
    pub fn empty(cols: usize) -> Self {
        Self::zeros(0, cols)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, ShapeError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (index, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(ShapeError::RaggedRow {
                    index,
                    got: row.len(),
                    expected: cols,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
            timing: None,
        })
    }

    pub fn with_timing(mut self, timing: Option<FrameTiming>) -> Self {
        self.timing = timing;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn timing(&self) -> Option<FrameTiming> {
        self.timing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.cols..(index + 1) * self.cols]
    }

    pub fn row_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.data[index * self.cols..(index + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), ShapeError> {
        if row.len() != self.cols {
            return Err(ShapeError::ColumnMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Appends all rows of `other`. Timing is taken from `other` if missing here.
    pub fn append(&mut self, other: &FeatureMatrix) -> Result<(), ShapeError> {
        if other.cols != self.cols {
            return Err(ShapeError::ColumnMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        self.data.extend_from_slice(&other.data);
        self.rows += other.rows;
        if self.timing.is_none() {
            self.timing = other.timing;
        }
        Ok(())
    }

    /// Element-wise bit equality (`-0.0 != 0.0`, NaN equals an identical NaN).
    pub fn bit_eq(&self, other: &FeatureMatrix) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// First `(row, col)` at which the two matrices differ bitwise, or the
    /// first row beyond the shorter one when shapes differ.
    pub fn first_difference(&self, other: &FeatureMatrix) -> Option<(usize, usize)> {
        if self.cols != other.cols {
            return Some((0, self.cols.min(other.cols)));
        }
        let rows = self.rows.min(other.rows);
        for r in 0..rows {
            for (c, (a, b)) in self.row(r).iter().zip(other.row(r)).enumerate() {
                if a.to_bits() != b.to_bits() {
                    return Some((r, c));
                }
            }
        }
        (self.rows != other.rows).then_some((rows, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged() {
        let err = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, ShapeError::RaggedRow { index: 1, .. }));
    }

    #[test]
    fn append_and_difference() {
        let mut a = FeatureMatrix::empty(2);
        a.push_row(&[1.0, 2.0]).unwrap();
        let b = FeatureMatrix::from_rows(&[[3.0, 4.0]]).unwrap();
        a.append(&b).unwrap();
        assert_eq!(a.shape(), (2, 2));
        assert_eq!(a.row(1), &[3.0, 4.0]);

        let mut c = a.clone();
        c.row_mut(1)[1] = 4.5;
        assert_eq!(a.first_difference(&c), Some((1, 1)));
        assert!(a.bit_eq(&a.clone()));
        assert!(a.append(&FeatureMatrix::empty(3)).is_err());
    }
}
