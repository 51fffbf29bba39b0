//! Compressed sparse row storage.

use crate::error::{FsiError, Result};

/// Row-compressed sparse matrix. Column indices are sorted within each row
/// and there are no duplicate entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    /// Add `scale * m` with rows and columns relabelled through the maps.
    pub fn add_mapped(&mut self, m: &CsrMatrix, rows: &[usize], cols: &[usize], scale: f64) {
        for (i, j, v) in m.iter() {
            self.push(rows[i], cols[j], scale * v);
        }
    }

    pub fn into_csr(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

impl CsrMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Self {
        // stable sort keeps the summation order of duplicates deterministic
        entries.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < nrows && j < ncols, "entry ({i},{j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec: length mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y^T A x`
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        assert_eq!(y.len(), self.nrows);
        (0..self.nrows)
            .map(|i| y[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>())
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(i, j, v)| (j, i, v)).collect(),
        )
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha * self + beta * other`
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(FsiError::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let entries = self
            .iter()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.iter().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, entries))
    }

    /// Restriction to the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut entries = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if col_map[j] != usize::MAX {
                    entries.push((k, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), entries)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] += v;
        }
        d
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let diff = self.add_scaled(1.0, other, -1.0).expect("same shape");
        diff.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Homogeneous Dirichlet conditions by symmetric elimination: rows and columns
/// of `dofs` are zeroed, a unit diagonal is placed on them and the matching
/// right-hand side entries are set to zero.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], dofs: &[usize]) -> (CsrMatrix, Vec<f64>) {
    assert_eq!(a.nrows(), a.ncols(), "apply_dirichlet needs a square matrix");
    assert_eq!(b.len(), a.nrows());
    let mut fixed = vec![false; a.nrows()];
    for &d in dofs {
        fixed[d] = true;
    }
    let mut entries: Vec<(usize, usize, f64)> = a
        .iter()
        .filter(|&(i, j, _)| !fixed[i] && !fixed[j])
        .collect();
    entries.extend(dofs.iter().map(|&d| (d, d, 1.0)));
    let mut rhs = b.to_vec();
    for &d in dofs {
        rhs[d] = 0.0;
    }
    (CsrMatrix::from_triplets(a.nrows(), a.ncols(), entries), rhs)
}

/// Symmetric saddle point matrix `[[a, -b^T], [-b, 0]]`.
pub fn saddle(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    if a.nrows() != a.ncols() || b.ncols() != a.ncols() {
        return Err(FsiError::DimensionMismatch(format!(
            "saddle blocks {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let n = a.nrows();
    let mut t = Triplets::new(n + b.nrows(), n + b.nrows());
    for (i, j, v) in a.iter() {
        t.push(i, j, v);
    }
    for (q, j, v) in b.iter() {
        t.push(n + q, j, -v);
        t.push(j, n + q, -v);
    }
    Ok(t.into_csr())
}
