//! Banded symmetric positive definite storage and Cholesky factorization.

use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal are treated as zero.
const PIVOT_RATIO: f64 = 1e-12;

/// Lower band of a symmetric matrix: row `i` holds columns `i - bw ..= i`.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + self.bw + j - i
    }

    /// Adds `value` at `(i, j)`; only the lower triangle is stored so callers pass `i >= j`.
    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    #[cfg(test)]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let off = self.bw + lo - i;
            let mut acc = 0.0;
            for (k, j) in (lo..i).enumerate() {
                let a = row[off + k];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc + row[self.bw] * x[i];
        }
        y
    }

    /// `|A| |x|`, the scale against which a residual is rounding noise.
    pub(crate) fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let off = self.bw + lo - i;
            let mut acc = 0.0;
            for (k, j) in (lo..i).enumerate() {
                let a = row[off + k].abs();
                acc += a * x[j].abs();
                y[j] += a * x[i].abs();
            }
            y[i] += acc + row[self.bw].abs() * x[i].abs();
        }
        y
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    factor: BandMatrix,
}

impl BandCholesky {
    pub(crate) fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bw;
        let mut l = a.clone();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = l.data[l.idx(i, j)];
                for k in klo..j {
                    s -= l.data[l.idx(i, k)] * l.data[l.idx(j, k)];
                }
                if i == j {
                    let diag = a.data[a.idx(i, i)];
                    if !(s > PIVOT_RATIO * diag.abs()) || !s.is_finite() {
                        return Err(Error::SingularSystem { equation: i });
                    }
                    let k = l.idx(i, i);
                    l.data[k] = s.sqrt();
                } else {
                    let k = l.idx(i, j);
                    l.data[k] = s / l.data[l.idx(j, j)];
                }
            }
        }
        Ok(Self { factor: l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let n = l.n;
        let bw = l.bw;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= l.data[l.idx(i, k)] * x[k];
            }
            x[i] = s / l.data[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= l.data[l.idx(k, i)] * x[k];
            }
            x[i] = s / l.data[l.idx(i, i)];
        }
        x
    }
}
