//! Column-oriented sparse storage.
//!
//! Coordinate descent touches one column per iteration, so the matrix is
//! stored column by column (CSC) together with the squared norm of every
//! column.

mod libsvm;
mod synthetic;

pub use libsvm::{parse_libsvm, read_libsvm_file, write_libsvm};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::{invalid, Result};

/// Sparse `n_rows x n_cols` matrix in compressed sparse column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumnMatrix {
    n_rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    col_sq_norm: Vec<f64>,
}

impl SparseColumnMatrix {
    /// Builds a matrix from per-column `(row, value)` lists.
    ///
    /// Rows must be strictly increasing within a column and below `n_rows`.
    /// Explicit zeros are dropped.
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for (j, col) in columns.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (r, v) in col {
                if r >= n_rows {
                    return Err(invalid(format!(
                        "row index {r} out of range in column {j} (n_rows = {n_rows})"
                    )));
                }
                if prev.is_some_and(|p| p >= r) {
                    return Err(invalid(format!("row indices not increasing in column {j}")));
                }
                if !v.is_finite() {
                    return Err(invalid(format!("non-finite value in column {j}")));
                }
                prev = Some(r);
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self::from_raw(n_rows, col_ptr, row_idx, values))
    }

    /// Builds a matrix from unordered `(row, col, value)` triplets.
    /// Duplicate positions are rejected.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_cols];
        for &(r, c, v) in triplets {
            if c >= n_cols {
                return Err(invalid(format!(
                    "column index {c} out of range (n_cols = {n_cols})"
                )));
            }
            columns[c].push((r, v));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.sort_by_key(|&(r, _)| r);
            if col.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(invalid(format!("duplicate entry in column {j}")));
            }
        }
        Self::from_columns(n_rows, columns)
    }

    /// Dense row-major input, mostly for tests and small examples.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(invalid("ragged dense input"));
        }
        let columns = (0..n_cols)
            .map(|j| (0..n_rows).map(|i| (i, rows[i][j])).collect())
            .collect();
        Self::from_columns(n_rows, columns)
    }

    fn from_raw(n_rows: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<f64>) -> Self {
        let col_sq_norm = col_ptr
            .windows(2)
            .map(|w| values[w[0]..w[1]].iter().map(|v| v * v).sum())
            .collect();
        Self {
            n_rows,
            col_ptr,
            row_idx,
            values,
            col_sq_norm,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// `||a_j||^2`
    pub fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norm[j]
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norm
    }

    /// `a_j^T v`
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        let (rows, vals) = self.column(j);
        rows.iter().zip(vals).map(|(&r, &a)| a * v[r]).sum()
    }

    /// `y += alpha * a_j`
    pub fn col_axpy(&self, j: usize, alpha: f64, y: &mut [f64]) {
        let (rows, vals) = self.column(j);
        for (&r, &a) in rows.iter().zip(vals) {
            y[r] += alpha * a;
        }
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols() {
            return Err(invalid(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.n_cols()
            )));
        }
        let mut out = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.col_axpy(j, xj, &mut out);
            }
        }
        Ok(out)
    }

    /// `A^T v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_rows {
            return Err(invalid(format!(
                "vector length {} does not match {} rows",
                v.len(),
                self.n_rows
            )));
        }
        Ok((0..self.n_cols()).map(|j| self.col_dot(j, v)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n_rows];
        // Walking columns in order keeps the new row indices sorted.
        for j in 0..self.n_cols() {
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                columns[r].push((j, v));
            }
        }
        Self::from_columns(self.n_cols(), columns).expect("transpose of a valid matrix")
    }

    /// Row-major dense copy.
    #[allow(clippy::needless_range_loop)]
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols()]; self.n_rows];
        for j in 0..self.n_cols() {
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                dense[r][j] = v;
            }
        }
        dense
    }

    /// Row-wise lists `(col, value)`, sorted by column.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.n_rows];
        for j in 0..self.n_cols() {
            let (ri, vals) = self.column(j);
            for (&r, &v) in ri.iter().zip(vals) {
                rows[r].push((j, v));
            }
        }
        rows
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let columns = keep
            .iter()
            .map(|&j| {
                let (r, v) = self.column(j);
                r.iter().copied().zip(v.iter().copied()).collect()
            })
            .collect();
        Self::from_columns(self.n_rows, columns).expect("subset of a valid matrix")
    }

    /// Appends empty columns up to `n_cols`.
    pub fn with_n_cols(mut self, n_cols: usize) -> Result<Self> {
        if n_cols < self.n_cols() {
            return Err(invalid(format!(
                "requested {n_cols} columns but data has {}",
                self.n_cols()
            )));
        }
        while self.n_cols() < n_cols {
            self.col_ptr.push(self.row_idx.len());
            self.col_sq_norm.push(0.0);
        }
        Ok(self)
    }
}

/// Output of [`normalize_columns`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub matrix: SparseColumnMatrix,
    /// `scales[k]` is the original norm of retained column `kept[k]`.
    /// A primal solution `z` of the normalized problem maps back as `z[k] / scales[k]`.
    pub scales: Vec<f64>,
    /// Original index of each retained column.
    pub kept: Vec<usize>,
    /// Original indices of all-zero columns that were removed.
    pub dropped: Vec<usize>,
}

/// Rescales every column to unit Euclidean norm, dropping all-zero columns.
pub fn normalize_columns(m: &SparseColumnMatrix) -> Normalized {
    let mut columns = Vec::new();
    let mut scales = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..m.n_cols() {
        let norm = m.col_sq_norm(j).sqrt();
        if norm == 0.0 {
            dropped.push(j);
            continue;
        }
        let (rows, vals) = m.column(j);
        columns.push(
            rows.iter()
                .zip(vals)
                .map(|(&r, &v)| (r, v / norm))
                .collect::<Vec<_>>(),
        );
        scales.push(norm);
        kept.push(j);
    }
    let matrix =
        SparseColumnMatrix::from_columns(m.n_rows(), columns).expect("rescaled valid matrix");
    Normalized {
        matrix,
        scales,
        kept,
        dropped,
    }
}

/// Design matrix plus one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub matrix: SparseColumnMatrix,
    pub labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(matrix: SparseColumnMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != matrix.n_rows() {
            return Err(invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                matrix.n_rows()
            )));
        }
        Ok(Self { matrix, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn has_binary_labels(&self) -> bool {
        self.labels.iter().all(|&y| y == 1.0 || y == -1.0)
    }

    /// Same labels, columns normalized (see [`normalize_columns`]).
    pub fn normalized(&self) -> (Self, Normalized) {
        let norm = normalize_columns(&self.matrix);
        (
            Self {
                matrix: norm.matrix.clone(),
                labels: self.labels.clone(),
            },
            norm,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseColumnMatrix {
        SparseColumnMatrix::from_dense(&[vec![2.0, 0.0, 1.0], vec![0.0, 4.0, 0.0]]).unwrap()
    }

    #[test]
    fn csc_layout_and_norms() {
        let m = small();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.n_cols(), 3);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.column(1), (&[1usize][..], &[4.0][..]));
        assert_eq!(m.col_sq_norms(), &[4.0, 16.0, 1.0]);
    }

    #[test]
    fn explicit_zeros_are_dropped() {
        let m = SparseColumnMatrix::from_columns(3, vec![vec![(0, 0.0), (2, 1.5)]]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.column(0).0, &[2]);
    }

    #[test]
    fn rejects_unsorted_and_out_of_range_rows() {
        assert!(SparseColumnMatrix::from_columns(3, vec![vec![(2, 1.0), (1, 1.0)]]).is_err());
        assert!(SparseColumnMatrix::from_columns(3, vec![vec![(3, 1.0)]]).is_err());
        assert!(SparseColumnMatrix::from_triplets(2, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
    }

    #[test]
    fn products_and_transpose() {
        let m = small();
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(m.tr_mul_vec(&[1.0, 2.0]).unwrap(), vec![2.0, 8.0, 1.0]);
        let t = m.transpose();
        assert_eq!(
            t.to_dense(),
            vec![vec![2.0, 0.0], vec![0.0, 4.0], vec![1.0, 0.0]]
        );
        assert!(m.mul_vec(&[1.0]).is_err());
    }

    #[test]
    fn normalize_three_four_five() {
        let m = SparseColumnMatrix::from_dense(&[vec![3.0], vec![4.0]]).unwrap();
        let out = normalize_columns(&m);
        assert_eq!(out.scales, vec![5.0]);
        let (_, vals) = out.matrix.column(0);
        assert!((vals[0] - 0.6).abs() < 1e-15 && (vals[1] - 0.8).abs() < 1e-15);
        assert!((out.matrix.col_sq_norm(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_keeps_unit_columns_and_drops_empty_ones() {
        let m =
            SparseColumnMatrix::from_dense(&[vec![1.0, 0.0, 0.6], vec![0.0, 0.0, 0.8]]).unwrap();
        let out = normalize_columns(&m);
        assert_eq!(out.dropped, vec![1]);
        assert_eq!(out.kept, vec![0, 2]);
        assert_eq!(out.scales[0], 1.0);
        assert_eq!(out.matrix.column(0).1, &[1.0]);
        for j in 0..out.matrix.n_cols() {
            assert!((out.matrix.col_sq_norm(j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_label_count_must_match() {
        assert!(LabeledDataset::new(small(), vec![1.0]).is_err());
        assert!(LabeledDataset::new(small(), vec![1.0, -1.0])
            .unwrap()
            .has_binary_labels());
    }
}
