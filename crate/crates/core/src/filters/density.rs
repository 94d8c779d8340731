use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::NeighborhoodTable;

/// Row-stochastic density-filter matrix `A` in compressed row form, so that
/// `rho~ = A rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl FilterMatrix {
    /// Builds a matrix from dense rows, dropping zeros. Rows need not be stochastic.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Ok(Self {
            n,
            offsets,
            cols,
            vals,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            offsets: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, e: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[e]..self.offsets[e + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, e: usize, i: usize) -> f64 {
        let (cols, vals) = self.row(e);
        cols.iter().position(|&c| c == i).map_or(0.0, |k| vals[k])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|e| self.row(e).1.iter().sum()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x.len())?;
        Ok((0..self.n)
            .map(|e| {
                let (cols, vals) = self.row(e);
                cols.iter().zip(vals).map(|(&i, &a)| a * x[i]).sum()
            })
            .collect())
    }

    pub fn mul_transpose_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y.len())?;
        let mut out = vec![0.0; self.n];
        for (e, &ye) in y.iter().enumerate() {
            let (cols, vals) = self.row(e);
            for (&i, &a) in cols.iter().zip(vals) {
                out[i] += a * ye;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in 0..self.n {
            let (cols, vals) = self.row(e);
            for (&i, &a) in cols.iter().zip(vals) {
                m[(e, i)] = a;
            }
        }
        m
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// `A_ei = w_e(x_i) v_i / sum_j w_e(x_j) v_j` for `i` in the neighborhood of `e`.
pub fn build_filter_matrix(table: &NeighborhoodTable) -> FilterMatrix {
    let n = table.len();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for e in 0..n {
        let total: f64 = table.neighbors(e).map(|(_, w, v)| w * v).sum();
        for (i, w, v) in table.neighbors(e) {
            let a = w * v / total;
            if a != 0.0 {
                cols.push(i);
                vals.push(a);
            }
        }
        offsets.push(cols.len());
    }
    FilterMatrix {
        n,
        offsets,
        cols,
        vals,
    }
}

/// `rho~ = A rho`.
pub fn apply_density_filter(a: &FilterMatrix, rho: &[f64]) -> Result<Vec<f64>> {
    a.mul_vec(rho)
}

/// `df/drho = A^T df/drho~`.
pub fn density_filter_chain_rule(a: &FilterMatrix, grad_filtered: &[f64]) -> Result<Vec<f64>> {
    a.mul_transpose_vec(grad_filtered)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertibilityReport {
    pub size: usize,
    pub rank: usize,
    pub min_singular_value: f64,
    pub max_singular_value: f64,
    pub invertible: bool,
    /// Rows that vanish entirely.
    pub zero_rows: Vec<usize>,
    /// Pairs of identical rows, `(lower, higher)` index.
    pub duplicate_rows: Vec<(usize, usize)>,
}

/// Numerical rank and singular-value bounds of `A` (densified), plus the two
/// structural singularity causes: zero rows and duplicated rows.
pub fn filter_matrix_invertibility_check(a: &FilterMatrix) -> InvertibilityReport {
    let n = a.size();
    let sv = a.to_dense().singular_values();
    let max_sv = sv.iter().cloned().fold(0.0, f64::max);
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = max_sv * n as f64 * f64::EPSILON;
    let rank = sv.iter().filter(|&&s| s > tol).count();

    let zero_rows = (0..n)
        .filter(|&e| a.row(e).1.iter().all(|&v| v == 0.0))
        .collect();

    // rows can only coincide when their column patterns do
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a.row(x).0.cmp(a.row(y).0).then(x.cmp(&y)));
    let mut duplicate_rows = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && a.row(order[end]).0 == a.row(order[start]).0 {
            end += 1;
        }
        for p in start..end {
            for q in p + 1..end {
                let (x, y) = (order[p], order[q]);
                let same = a
                    .row(x)
                    .1
                    .iter()
                    .zip(a.row(y).1)
                    .all(|(u, v)| (u - v).abs() <= 1e-14 * u.abs().max(v.abs()));
                if same && !a.row(x).0.is_empty() {
                    duplicate_rows.push((x.min(y), x.max(y)));
                }
            }
        }
        start = end;
    }
    duplicate_rows.sort_unstable();

    InvertibilityReport {
        size: n,
        rank,
        min_singular_value: if n == 0 { 0.0 } else { min_sv },
        max_singular_value: max_sv,
        invertible: rank == n,
        zero_rows,
        duplicate_rows,
    }
}
