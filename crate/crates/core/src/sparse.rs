//! Small real-valued sparse containers.
//!
//! Ladder operators and every generator built from them have real matrix
//! elements, so the coefficient storage is `f64` even when the vectors they
//! act on are complex.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::par::{self, Execution};

/// Coordinate-format operator on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOperator {
    pub fn new(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            debug_assert!(r < dim && c < dim);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Self { dim, entries: merged }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: (0..dim).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.dim,
            self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        )
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &SparseOperator) -> Self {
        assert_eq!(self.dim, rhs.dim, "sparse compose: dimension mismatch");
        let by_col = self.by_column();
        let mut out = Vec::new();
        for &(j, k, b) in &rhs.entries {
            for &(i, a) in &by_col[j] {
                out.push((i, k, a * b));
            }
        }
        Self::new(self.dim, out)
    }

    /// Entries grouped by column: `result[col] = [(row, value), ...]`.
    pub fn by_column(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.dim];
        for &(r, c, v) in &self.entries {
            cols[c].push((r, v));
        }
        cols
    }

    /// Entries grouped by row: `result[row] = [(col, value), ...]`.
    pub fn by_row(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.dim];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
        }
        rows
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += Complex64::new(v, 0.0);
        }
        m
    }

    /// `Tr(rho * self)` for a dense `rho`.
    pub fn trace_against(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| rho[(c, r)] * v)
            .sum()
    }
}

/// Compressed-row matrix with real coefficients.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        // drop cancelled entries
        let mut k = 0;
        for i in 0..values.len() {
            if values[i] != 0.0 {
                values[k] = values[i];
                col_idx[k] = col_idx[i];
                rows_of[k] = rows_of[i];
                k += 1;
            }
        }
        values.truncate(k);
        col_idx.truncate(k);
        rows_of.truncate(k);
        for &r in &rows_of {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Execution) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        par::fill(y, exec, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[k]] * self.values[k];
            }
            acc
        });
    }

    pub fn mul_vec(&self, x: &[Complex64], exec: Execution) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        self.mul_vec_into(x, &mut y, exec);
        y
    }

    pub fn mul_vec_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `yᵀ A` for a real row vector `y`.
    pub fn left_mul_real(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (c, v) in self.row(i) {
                out[c] += yi * v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }
}
