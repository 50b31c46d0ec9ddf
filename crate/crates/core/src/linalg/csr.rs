use crate::error::{Error, Result};

/// Row-compressed sparse matrix. Column indices are sorted and unique
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator; duplicate entries are summed on `build`.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseMatrix {
        // Stable sort keeps the summation order of duplicates fixed, which
        // makes assembly bitwise reproducible.
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0; self.nrows + 1];
        let mut col_indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_offsets[r + 1] += 1;
                col_indices.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

impl SparseMatrix {
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                actual: row_offsets.len(),
            });
        }
        if col_indices.len() != values.len() || row_offsets[nrows] != values.len() {
            return Err(Error::DimensionMismatch {
                expected: row_offsets[nrows],
                actual: values.len(),
            });
        }
        for i in 0..nrows {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            let sorted = cols.windows(2).all(|w| w[0] < w[1]);
            if !sorted || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::InvalidMesh(format!(
                    "row {i} has unsorted, duplicate or out-of-range columns"
                )));
            }
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
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

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Sparse matrix-vector product.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                actual: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.mul_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x`; panics on dimension mismatch.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                x[i] * cols.iter().zip(vals).map(|(&c, &v)| v * y[c]).sum::<f64>()
            })
            .sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                b.add(c, i, v);
            }
        }
        b.build()
    }

    /// `Σ coefficient · matrix` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<SparseMatrix> {
        let (nrows, ncols) = terms
            .first()
            .map(|(_, m)| (m.nrows, m.ncols))
            .unwrap_or((0, 0));
        let capacity = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut b = TripletBuilder::with_capacity(nrows, ncols, capacity);
        for &(alpha, m) in terms {
            if m.nrows != nrows || m.ncols != ncols {
                return Err(Error::DimensionMismatch {
                    expected: nrows * ncols,
                    actual: m.nrows * m.ncols,
                });
            }
            for i in 0..m.nrows {
                let (cols, vals) = m.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    b.add(i, c, alpha * v);
                }
            }
        }
        Ok(b.build())
    }

    /// Symmetric elimination of the masked dofs: their rows and columns are
    /// cleared and a unit diagonal is inserted.
    pub fn eliminate_dofs(&self, mask: &[bool]) -> SparseMatrix {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(mask.len(), self.nrows);
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            if mask[i] {
                b.add(i, i, 1.0);
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if !mask[c] {
                    b.add(i, c, v);
                }
            }
        }
        b.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry of `|A - Aᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - t.get(i, c)).abs());
            }
            let (tcols, tvals) = t.row(i);
            for (&c, &v) in tcols.iter().zip(tvals) {
                worst = worst.max((v - self.get(i, c)).abs());
            }
        }
        worst
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spmv() {
        let x = vec![1.5, -2.0, 3.25];
        assert_eq!(SparseMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn small_spmv() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![5.0, 4.0]);
    }

    #[test]
    fn spmv_rejects_wrong_length() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            a.spmv(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 1
            })
        ));
    }

    #[test]
    fn builder_sums_duplicates_and_sorts() {
        let mut b = TripletBuilder::new(2, 3);
        b.add(1, 2, 1.0);
        b.add(0, 1, 2.0);
        b.add(1, 0, 3.0);
        b.add(1, 2, 4.0);
        let a = b.build();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 2), 5.0);
        assert_eq!(a.row(1).0, &[0, 2]);
    }

    #[test]
    fn from_csr_validates() {
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn elimination_keeps_symmetry() {
        let a = SparseMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        let e = a.eliminate_dofs(&[true, false, false]);
        assert_eq!(
            e.to_dense(),
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0]
            ]
        );
        assert_eq!(e.max_asymmetry(), 0.0);
    }

    #[test]
    fn linear_combination_matches_dense() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        let b = SparseMatrix::identity(2);
        let c = SparseMatrix::linear_combination(&[(2.0, &a), (-1.0, &b)]).unwrap();
        assert_eq!(c.to_dense(), vec![vec![1.0, 4.0], vec![0.0, 5.0]]);
    }
}
