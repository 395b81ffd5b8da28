//! Up-looking LDLᵀ factorization for quasi-definite matrices.
//!
//! Quasi-definite matrices factor stably with 1×1 pivots under any symmetric
//! permutation, so no numerical pivoting is performed.

use super::LinSysError;

/// Upper triangle (including the diagonal) of a symmetric matrix in CSC form.
#[derive(Debug, Clone)]
pub struct UpperCsc {
    pub n: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub vals: Vec<f64>,
}

impl UpperCsc {
    /// Builds from `(row, col, value)` with `row <= col`; duplicates summed.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut colptr = vec![0usize; n + 1];
        let mut rowind: Vec<usize> = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            debug_assert!(r <= c);
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            rowind.push(r);
            vals.push(v);
            colptr[c + 1] += 1;
            last = Some((r, c));
        }
        for j in 0..n {
            colptr[j + 1] += colptr[j];
        }
        Self {
            n,
            colptr,
            rowind,
            vals,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl LdlFactor {
    pub fn factor(a: &UpperCsc) -> Result<Self, LinSysError> {
        let n = a.n;
        // Elimination tree and column counts.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for p in a.colptr[j]..a.colptr[j + 1] {
                let mut i = a.rowind[p];
                if i > j {
                    return Err(LinSysError::FactorizationFailure(format!(
                        "entry ({i}, {j}) below the diagonal"
                    )));
                }
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![0.0; total];
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];

        let mut y_vals = vec![0.0; n];
        let mut y_used = vec![false; n];
        let mut y_idx: Vec<usize> = Vec::with_capacity(n);
        let mut elim: Vec<usize> = Vec::with_capacity(n);
        let mut next_space: Vec<usize> = lp[..n].to_vec();

        for k in 0..n {
            y_idx.clear();
            d[k] = 0.0;
            for p in a.colptr[k]..a.colptr[k + 1] {
                let bidx = a.rowind[p];
                if bidx == k {
                    d[k] += a.vals[p];
                    continue;
                }
                y_vals[bidx] += a.vals[p];
                if !y_used[bidx] {
                    y_used[bidx] = true;
                    elim.clear();
                    elim.push(bidx);
                    let mut next = etree[bidx];
                    while next != NONE && next < k {
                        if y_used[next] {
                            break;
                        }
                        y_used[next] = true;
                        elim.push(next);
                        next = etree[next];
                    }
                    while let Some(e) = elim.pop() {
                        y_idx.push(e);
                    }
                }
            }
            for &cidx in y_idx.iter().rev() {
                let yc = y_vals[cidx];
                let end = next_space[cidx];
                for j in lp[cidx]..end {
                    y_vals[li[j]] -= lx[j] * yc;
                }
                li[end] = k;
                let l = yc * dinv[cidx];
                lx[end] = l;
                d[k] -= yc * l;
                next_space[cidx] += 1;
                y_vals[cidx] = 0.0;
                y_used[cidx] = false;
            }
            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(LinSysError::FactorizationFailure(format!("zero or non-finite pivot at column {k}")));
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Self { n, lp, li, lx, d, dinv })
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Pivot signs: `(positive, negative)` counts of `D`.
    pub fn inertia(&self) -> (usize, usize) {
        let pos = self.d.iter().filter(|&&v| v > 0.0).count();
        (pos, self.n - pos)
    }

    /// Solves `L D Lᵀ x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let xi = x[i];
            if xi != 0.0 {
                for j in self.lp[i]..self.lp[i + 1] {
                    x[self.li[j]] -= self.lx[j] * xi;
                }
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.dinv) {
            *xi *= di;
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
    }
}
