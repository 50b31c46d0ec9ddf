//! Envelope (profile) Cholesky factorization under a reverse Cuthill-McKee
//! ordering.
//!
//! The velocity and Riesz systems are fixed for a whole run and solved
//! hundreds of times, so they are factored once and reused.

use std::collections::VecDeque;

use super::csr::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Start of each row inside `values`; row `i` holds columns `first[i]..=i`.
    start: Vec<usize>,
    values: Vec<f64>,
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let neighbours = |i: usize| a.row(i).0.iter().copied().filter(move |&j| j != i);
    let degree: Vec<usize> = (0..n).map(|i| neighbours(i).count()).collect();

    let bfs_levels = |root: usize, visited: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = visited.to_vec();
        seen[root] = true;
        let mut levels = vec![vec![root]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for w in neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return levels;
            }
            levels.push(next);
        }
    };

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral root: walk to a low-degree vertex of the last
        // level until the eccentricity stops growing.
        let mut root = seed;
        let mut levels = bfs_levels(root, &visited);
        loop {
            let candidate = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (degree[v], v))
                .unwrap();
            let trial = bfs_levels(candidate, &visited);
            if trial.len() > levels.len() {
                root = candidate;
                levels = trial;
            } else {
                break;
            }
        }

        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbours(v).filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

impl EnvelopeCholesky {
    /// Factors a symmetric positive definite matrix. Only the lower
    /// triangle (in the permuted numbering) is read.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.ncols(),
            });
        }
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &c in a.row(old).0 {
                let j = inverse[c];
                if j < first[new] {
                    first[new] = j;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inverse[c];
                if j <= new {
                    values[start[new] + j - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let li = &values[row_i + (k0 - fi)..row_i + (j - fi)];
                let lj = &values[start[j] + (k0 - fj)..start[j] + (j - fj)];
                let s: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
                let diag = values[start[j + 1] - 1];
                values[row_i + (j - fi)] = (values[row_i + (j - fi)] - s) / diag;
            }
            let row = &values[row_i..row_i + (i - fi)];
            let pivot = values[start[i + 1] - 1] - row.iter().map(|x| x * x).sum::<f64>();
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot,
                });
            }
            values[start[i + 1] - 1] = pivot.sqrt();
        }

        Ok(EnvelopeCholesky {
            n,
            perm,
            first,
            start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: b.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                y[k] -= l * yi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_2d(m: usize) -> SparseMatrix {
        let n = m * m;
        let mut rows = vec![vec![0.0; n]; n];
        for j in 0..m {
            for i in 0..m {
                let k = j * m + i;
                rows[k][k] = 4.0;
                if i > 0 {
                    rows[k][k - 1] = -1.0;
                }
                if i + 1 < m {
                    rows[k][k + 1] = -1.0;
                }
                if j > 0 {
                    rows[k][k - m] = -1.0;
                }
                if j + 1 < m {
                    rows[k][k + m] = -1.0;
                }
            }
        }
        SparseMatrix::from_dense(&rows)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_2d(5);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn solves_laplacian() {
        let a = laplacian_2d(7);
        let x_true: Vec<f64> = (0..49).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.spmv(&x_true).unwrap();
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let x = f.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn handles_disconnected_pattern() {
        let a = SparseMatrix::from_dense(&[
            vec![2.0, 0.0, 1.0, 0.0],
            vec![0.0, 3.0, 0.0, 0.0],
            vec![1.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 5.0],
        ]);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let x = f.solve(&[3.0, 3.0, 3.0, 5.0]).unwrap();
        for (u, v) in x.iter().zip([1.0, 1.0, 1.0, 1.0]) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
