//! Compressed sparse storage for the constraint matrix.
//!
//! The matrix is held in compressed column form with a compressed row mirror,
//! so both `A x` and `A^T y` are computed as row-wise dot products. Every
//! output entry is accumulated in a fixed order, which keeps the products
//! bit-reproducible from run to run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

pub const DEFAULT_POWER_REL_TOL: f64 = 1e-4;
pub const DEFAULT_POWER_MAX_ITER: usize = 5000;
pub const DEFAULT_LAMBDA_SAFETY: f64 = 1.05;
const POWER_SEED: u64 = 0x4850_524c_505f_4131;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_vals: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Repeated coordinates are summed and entries that sum to exactly zero
    /// are not stored. Non-finite values and out-of-range indices are errors.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows {
                return Err(Error::DimensionMismatch {
                    what: "triplet row index",
                    expected: nrows,
                    found: i,
                });
            }
            if j >= ncols {
                return Err(Error::DimensionMismatch {
                    what: "triplet column index",
                    expected: ncols,
                    found: j,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entry"));
            }
            entries.push((j, i, v));
        }
        // stable sort keeps the summation order of duplicates equal to input order
        entries.sort_by_key(|&(j, i, _)| (j, i));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut col_vals = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (j, i, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == j && entries[k].1 == i {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                row_idx.push(i);
                col_vals.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self::with_row_mirror(nrows, ncols, col_ptr, row_idx, col_vals))
    }

    pub fn from_dense(rows: &[Vec<f64>], ncols: usize) -> Result<Self> {
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len("dense row length", ncols, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).expect("identity is well formed")
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::with_row_mirror(nrows, ncols, vec![0; ncols + 1], Vec::new(), Vec::new())
    }

    fn with_row_mirror(
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        col_vals: Vec<f64>,
    ) -> Self {
        let mut row_ptr = vec![0usize; nrows + 1];
        for &i in &row_idx {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; row_idx.len()];
        let mut row_vals = vec![0.0; row_idx.len()];
        for j in 0..ncols {
            for p in col_ptr[j]..col_ptr[j + 1] {
                let i = row_idx[p];
                col_idx[next[i]] = j;
                row_vals[next[i]] = col_vals[p];
                next[i] += 1;
            }
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            col_vals,
            row_ptr,
            col_idx,
            row_vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_vals.len()
    }

    /// Stored entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                out.push((self.row_idx[p], j, self.col_vals[p]));
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.row_idx[range.clone()].binary_search(&i) {
            Ok(p) => self.col_vals[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            dense[i][j] = v;
        }
        dense
    }

    /// Entries `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.row_vals[range].iter().copied())
    }

    /// Entries `(row, value)` of column `j`.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.col_vals[range].iter().copied())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv input", self.ncols, x.len())?;
        let mut out = vec![0.0; self.nrows];
        self.mul_into(x, &mut out);
        Ok(out)
    }

    pub fn spmv_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv_t input", self.nrows, y.len())?;
        let mut out = vec![0.0; self.ncols];
        self.mul_t_into(y, &mut out);
        Ok(out)
    }

    /// `out = A x`. Lengths are the caller's responsibility.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.row_vals[p] * x[self.col_idx[p]];
            }
            *o = acc;
        }
    }

    /// `out = A^T y`. Lengths are the caller's responsibility.
    pub fn mul_t_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows);
        debug_assert_eq!(out.len(), self.ncols);
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.col_vals[p] * y[self.row_idx[p]];
            }
            *o = acc;
        }
    }

    /// Returns `diag(row_scale) * A * diag(col_scale)`.
    pub fn scaled(&self, row_scale: &[f64], col_scale: &[f64]) -> Self {
        debug_assert_eq!(row_scale.len(), self.nrows);
        debug_assert_eq!(col_scale.len(), self.ncols);
        let mut col_vals = self.col_vals.clone();
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                col_vals[p] *= row_scale[self.row_idx[p]] * col_scale[j];
            }
        }
        Self::with_row_mirror(
            self.nrows,
            self.ncols,
            self.col_ptr.clone(),
            self.row_idx.clone(),
            col_vals,
        )
    }

    pub fn row_max_abs(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).fold(0.0, |m: f64, (_, v)| m.max(v.abs())))
            .collect()
    }

    pub fn col_max_abs(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col(j).fold(0.0, |m: f64, (_, v)| m.max(v.abs())))
            .collect()
    }

    pub fn col_norms(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col(j).map(|(_, v)| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt())
            .collect()
    }
}

/// Estimates `lambda_A >= ||A||^2` by power iteration on `A A^T`.
///
/// The Rayleigh quotient approaches the top eigenvalue from below, so the
/// converged estimate is multiplied by `safety`. The start vector comes from
/// a fixed seed, which makes the result reproducible.
pub fn estimate_lambda_a(a: &SparseMatrix, rel_tol: f64, max_iter: usize, safety: f64) -> Result<f64> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("power iteration tolerance must be positive, got {rel_tol}")));
    }
    if !(safety >= 1.0) {
        return Err(Error::InvalidConfig(format!("lambda safety factor must be >= 1, got {safety}")));
    }
    if a.nnz() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let m = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);

    let mut atv = vec![0.0; a.ncols()];
    let mut next = vec![0.0; m];
    let mut estimate = 0.0;
    for _ in 0..max_iter.max(1) {
        a.mul_t_into(&v, &mut atv);
        let rayleigh = dot(&atv, &atv);
        a.mul_into(&atv, &mut next);
        let converged = (rayleigh - estimate).abs() <= rel_tol * rayleigh;
        estimate = rayleigh;
        if normalize(&mut next) == 0.0 {
            break;
        }
        std::mem::swap(&mut v, &mut next);
        if converged {
            break;
        }
    }
    if estimate == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(safety * estimate)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = norm(v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}
