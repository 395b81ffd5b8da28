//! Column-compressed sparse matrix.

use serde::{Deserialize, Serialize};

/// Sparse matrix in compressed sparse column layout with sorted row indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CscMatrix {
    #[serde(skip)]
    pub nrows: usize,
    #[serde(skip)]
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowind: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));

        let mut colptr = vec![0usize; ncols + 1];
        let mut rowind = Vec::with_capacity(sorted.len());
        let mut vals = Vec::with_capacity(sorted.len());
        let mut iter = sorted.into_iter().peekable();
        for col in 0..ncols {
            while let Some(&(r, c, v)) = iter.peek() {
                if c != col {
                    break;
                }
                assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
                iter.next();
                let mut acc = v;
                while let Some(&(r2, c2, v2)) = iter.peek() {
                    if r2 == r && c2 == c {
                        acc += v2;
                        iter.next();
                    } else {
                        break;
                    }
                }
                if acc != 0.0 {
                    rowind.push(r);
                    vals.push(acc);
                }
            }
            colptr[col + 1] = rowind.len();
        }
        Self {
            nrows,
            ncols,
            colptr,
            rowind,
            vals,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let trip: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .collect();
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(row, col, value)` over stored entries in column order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.colptr[j]..self.colptr[j + 1]).map(move |k| (self.rowind[k], j, self.vals[k]))
        })
    }

    /// `y += alpha * A x`
    pub fn gemv(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let axj = alpha * xj;
            for k in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowind[k]] += self.vals[k] * axj;
            }
        }
    }

    /// `y += alpha * Aᵀ x`
    pub fn gemv_t(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for (j, yj) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.colptr[j]..self.colptr[j + 1] {
                acc += self.vals[k] * x[self.rowind[k]];
            }
            *yj += alpha * acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.gemv(1.0, x, &mut y);
        y
    }

    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.gemv_t(1.0, x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] += v;
        }
        d
    }

    /// Checks the structural invariants of the column-compressed layout.
    pub(crate) fn check_structure(&self) -> Result<(), String> {
        if self.colptr.len() != self.ncols + 1 {
            return Err(format!(
                "colptr has length {}, expected {}",
                self.colptr.len(),
                self.ncols + 1
            ));
        }
        if self.colptr[0] != 0 {
            return Err("colptr[0] must be 0".into());
        }
        if self.rowind.len() != self.vals.len() {
            return Err("rowind and vals lengths differ".into());
        }
        if *self.colptr.last().unwrap() != self.rowind.len() {
            return Err("colptr end does not match number of entries".into());
        }
        for j in 0..self.ncols {
            let (lo, hi) = (self.colptr[j], self.colptr[j + 1]);
            if lo > hi {
                return Err(format!("colptr decreases at column {j}"));
            }
            for k in lo..hi {
                if self.rowind[k] >= self.nrows {
                    return Err(format!("row index {} out of range in column {j}", self.rowind[k]));
                }
                if k > lo && self.rowind[k] <= self.rowind[k - 1] {
                    return Err(format!("row indices not strictly increasing in column {j}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CscMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 0, 2.0), (1, 0, 3.0), (0, 1, 0.0)]);
        assert_eq!(a.colptr, vec![0, 2, 2]);
        assert_eq!(a.rowind, vec![0, 1]);
        assert_eq!(a.vals, vec![2.0, 4.0]);
        a.check_structure().unwrap();
    }

    #[test]
    fn matvec_matches_dense() {
        let rows = vec![vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 4.0]];
        let a = CscMatrix::from_dense(&rows);
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, 6.0]);
        assert_eq!(a.mul_t_vec(&[1.0, -1.0]), vec![1.0, 3.0, -2.0]);
        assert_eq!(a.to_dense(), rows);
    }
}
