//! Row-major sample tables and Fisher information matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense row-major `rows × cols` table; one row per Monte-Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "sample table of {rows}×{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Single-column table.
    pub fn column_vector(values: Vec<f64>) -> Self {
        Self { rows: values.len(), cols: 1, data: values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols.max(1)).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale_column(&mut self, j: usize, factor: f64) {
        for i in 0..self.rows {
            self.data[i * self.cols + j] *= factor;
        }
    }
}

/// Symmetric positive-semidefinite Fisher information matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct FisherMatrix {
    inner: DMatrix<f64>,
}

impl FisherMatrix {
    /// Builds the matrix from its upper triangle; the lower triangle is mirrored
    /// so the result is symmetric bit for bit.
    pub fn from_upper(dim: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in j..dim {
                let v = entry(j, k);
                inner[(j, k)] = v;
                inner[(k, j)] = v;
            }
        }
        Self { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_upper(diag.len(), |j, k| if j == k { diag[j] } else { 0.0 })
    }

    /// Block-diagonal assembly, blocks in order.
    pub fn block_diagonal(blocks: &[FisherMatrix]) -> Self {
        let dim = blocks.iter().map(FisherMatrix::dim).sum();
        let mut inner = DMatrix::zeros(dim, dim);
        let mut offset = 0;
        for block in blocks {
            let n = block.dim();
            inner.view_mut((offset, offset), (n, n)).copy_from(&block.inner);
            offset += n;
        }
        Self { inner }
    }

    /// Accepts an arbitrary square matrix, requiring symmetry to `1e-12` relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Contract("Fisher matrix must be square".into()));
        }
        let scale = rows.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        for (j, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate().take(j) {
                if (v - rows[k][j]).abs() > 1e-12 * scale {
                    return Err(Error::Contract(format!("Fisher matrix not symmetric at ({j},{k})")));
                }
            }
        }
        Ok(Self::from_upper(dim, |j, k| rows[j][k]))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.inner[(j, k)]
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    /// `Δbᵀ F Δb`.
    pub fn quadratic_form(&self, delta: &[f64]) -> Result<f64> {
        self.expect_dim(delta.len())?;
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                acc += delta[j] * self.inner[(j, k)] * delta[k];
            }
        }
        Ok(acc)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = SymmetricEigen::new(self.inner.clone()).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// PSD up to noise: every eigenvalue ≥ `-1e-8 · tr(F)`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-8 * self.trace().abs()
    }

    /// `self − other`; symmetric by construction.
    pub fn difference(&self, other: &FisherMatrix) -> Result<FisherMatrix> {
        self.expect_dim(other.dim())?;
        Ok(Self::from_upper(self.dim(), |j, k| self.get(j, k) - other.get(j, k)))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| (0..self.dim()).map(|k| self.get(j, k)).collect()).collect()
    }

    fn expect_dim(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "parameter dimension {n} does not match Fisher matrix dimension {}",
                self.dim()
            )))
        }
    }
}

impl From<FisherMatrix> for Vec<Vec<f64>> {
    fn from(f: FisherMatrix) -> Self {
        f.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FisherMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        FisherMatrix::from_rows(&rows)
    }
}
