use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    /// Coordinates are 1-based.
    #[error("entry {value} at (row {row}, col {col}) is outside [-1, +1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
}

/// Response matrix `A` with `A[i][j] = -y_i h_j(x_i)`: rows are examples,
/// columns are hypotheses. Entries live in `[-1, +1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    binary: bool,
}

impl BoostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut data = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::Ragged {
                    row: i + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Self::from_row_major(m, n, data)
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        assert_eq!(data.len(), rows * cols, "row-major buffer has wrong length");
        for (k, &v) in data.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(MatrixError::OutOfRange {
                    row: k / cols + 1,
                    col: k % cols + 1,
                    value: v,
                });
            }
        }
        let binary = data.iter().all(|&v| v == 1.0 || v == -1.0);
        Ok(BoostMatrix {
            rows,
            cols,
            data,
            binary,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// All entries are exactly `-1` or `+1`.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// `A lambda`.
    pub fn matvec(&self, lambda: &[f64]) -> Vec<f64> {
        assert_eq!(lambda.len(), self.cols, "weight vector length != column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(lambda).map(|(a, l)| a * l).sum())
            .collect()
    }

    /// `A^T g`.
    pub fn col_correlation(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.rows, "gradient length != row count");
        let mut out = vec![0.0; self.cols];
        for (i, &gi) in g.iter().enumerate() {
            if gi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * gi;
            }
        }
        out
    }

    /// Submatrix with the given rows, in the given order. `None` when empty.
    pub fn select_rows(&self, rows: &[usize]) -> Option<BoostMatrix> {
        if rows.is_empty() {
            return None;
        }
        let data = rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Some(BoostMatrix::from_row_major(rows.len(), self.cols, data).expect("entries already validated"))
    }
}
