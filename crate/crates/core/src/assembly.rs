//! Structured-grid indexing, compressed sparse rows, and operator assembly
//! with eliminated homogeneous Dirichlet boundaries.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Stencil9, OFFSETS};
use crate::{Error, Result};

/// Uniform mesh of the unit square with `h = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("grid divisor n must be at least 2"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Interior nodes per side, `n − 1`.
    pub fn side(&self) -> usize {
        self.n - 1
    }

    /// Number of interior DOFs, `(n − 1)²`.
    pub fn interior_count(&self) -> usize {
        self.side() * self.side()
    }

    /// Lexicographic index of interior node `(i, j)`, both zero-based, x fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.side(), k / self.side())
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from unsorted triplets; duplicates are summed and explicit
    /// zeros are kept.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in trip {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidParameter("triplet index out of range"));
            }
            counts[r + 1] += 1;
        }
        for r in 0..nrows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; trip.len()];
        let mut vals = vec![0.0; trip.len()];
        for &(r, c, v) in trip {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values = Vec::with_capacity(trip.len());
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            row.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                indices.push(c);
                values.push(v);
            }
            indptr[r + 1] = indices.len();
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: y.len() });
        }
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *out = s;
        }
        Ok(())
    }

    /// `b − A x`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: b.len() });
        }
        let mut r = self.apply(x)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(r)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                indices[next[c]] = r;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, values }
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: other.nrows });
        }
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            cols.clear();
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.values[k]);
                for q in other.indptr[mid]..other.indptr[mid + 1] {
                    let c = other.indices[q];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * other.values[q];
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                indices.push(c);
                values.push(acc[c]);
            }
            indptr[r + 1] = indices.len();
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, indptr, indices, values })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[r * self.ncols + c] += v;
            }
        }
        d
    }

    /// Largest `|r − c|` over stored entries below and above the diagonal.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for r in 0..self.nrows {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    /// MatrixMarket coordinate format, one-based indices.
    pub fn write_matrix_market<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Sparse operator on the interior DOFs of a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub grid: GridSpec,
    pub matrix: CsrMatrix,
}

impl GridOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matrix.apply(x)
    }

    /// Coefficients of row `(i, j)` as a 9-point stencil (zero where a leg is
    /// eliminated or absent).
    pub fn row_stencil(&self, i: usize, j: usize) -> Stencil9 {
        let side = self.grid.side() as i64;
        let row = self.grid.index(i, j);
        let mut v = [0.0; 9];
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            let (p, q) = (i as i64 + dx as i64, j as i64 + dy as i64);
            if p >= 0 && q >= 0 && p < side && q < side {
                v[k] = self.matrix.get(row, self.grid.index(p as usize, q as usize));
            }
        }
        Stencil9::from_array(v)
    }
}

/// Assemble the stencil on the interior nodes; legs that land on the
/// boundary are dropped.
pub fn assemble(grid: GridSpec, stencil: &Stencil9) -> Result<GridOperator> {
    let side = grid.side();
    let s = stencil.to_array();
    let mut trip = Vec::with_capacity(9 * grid.interior_count());
    for j in 0..side {
        for i in 0..side {
            let row = grid.index(i, j);
            for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
                let (p, q) = (i as i64 + dx as i64, j as i64 + dy as i64);
                if p < 0 || q < 0 || p >= side as i64 || q >= side as i64 || s[k] == 0.0 {
                    continue;
                }
                trip.push((row, grid.index(p as usize, q as usize), s[k]));
            }
        }
    }
    let n = grid.interior_count();
    Ok(GridOperator { grid, matrix: CsrMatrix::from_triplets(n, n, &trip)? })
}

/// `y = A x` with a dimension check.
pub fn apply(a: &GridOperator, x: &[f64]) -> Result<Vec<f64>> {
    a.apply(x)
}
