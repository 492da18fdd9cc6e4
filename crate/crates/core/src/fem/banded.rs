//! Banded matrices and LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gb` layout: column-major with `kl` extra rows
//! reserved for the fill produced by row interchanges, so a matrix can be
//! factored in place.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_dense(dense: &[Vec<f64>], kl: usize, ku: usize) -> Self {
        let n = dense.len();
        let mut m = Self::zeros(n, kl, ku);
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    assert!(m.in_band(i, j), "entry ({i},{j}) outside band");
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j));
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Column range `[lo, hi)` of the band in row `i`.
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.kl), (i + self.ku + 1).min(self.n))
    }

    /// Zeros row `i` and column `i` and puts 1 on the diagonal.
    pub fn eliminate(&mut self, i: usize) {
        let (lo, hi) = self.row_range(i);
        for j in lo..hi {
            self.set(i, j, 0.0);
            self.set(j, i, 0.0);
        }
        self.set(i, i, 1.0);
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.matvec_add(1.0, x, y);
    }

    /// `y += alpha A x`.
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for j in 0..self.n {
            let xj = alpha * x[j];
            if xj == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl + 1).min(self.n);
            let base = self.idx(lo, j);
            let col = &self.data[base..base + (hi - lo)];
            for (yi, a) in y[lo..hi].iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Sum of all stored entries.
    pub fn sum(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self.row_range(i);
                (lo..hi).map(|j| self.get(i, j)).sum::<f64>()
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, kl, ku, ld) = (self.n, self.kl, self.ku, self.ld);
        let mut pivots = vec![0usize; n];
        let diag = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let col_base = k * ld + diag - k;
            let mut p = k;
            let mut best = self.data[col_base + k].abs();
            for r in k + 1..=last_row {
                let v = self.data[col_base + r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { column: k });
            }
            pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let base = j * ld + diag - j;
                    self.data.swap(base + k, base + p);
                }
            }
            let pivot = self.data[col_base + k];
            for r in k + 1..=last_row {
                self.data[col_base + r] /= pivot;
            }
            if last_row == k {
                continue;
            }
            for j in k + 1..=last_col {
                let base = j * ld + diag - j;
                let akj = self.data[base + k];
                if akj == 0.0 {
                    continue;
                }
                for r in k + 1..=last_row {
                    let l = self.data[col_base + r];
                    self.data[base + r] -= l * akj;
                }
            }
        }
        Ok(BandedLu { lu: self, pivots })
    }

    /// Solves `A x = b` by a fresh factorization.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.clone().factor()?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x);
        Ok(x)
    }
}

/// Factored banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.lu.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.lu;
        let (n, kl, ku, ld) = (m.n, m.kl, m.ku, m.ld);
        let diag = kl + ku;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == 0.0 {
                continue;
            }
            let last_row = (k + kl).min(n - 1);
            let col_base = k * ld + diag - k;
            for r in k + 1..=last_row {
                b[r] -= m.data[col_base + r] * bk;
            }
        }
        for k in (0..n).rev() {
            let col_base = k * ld + diag - k;
            b[k] /= m.data[col_base + k];
            let bk = b[k];
            if bk == 0.0 {
                continue;
            }
            let first = k.saturating_sub(kl + ku);
            for i in first..k {
                b[i] -= m.data[col_base + i] * bk;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn identity_returns_rhs() {
        let m = BandedMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(m.solve(&b).unwrap(), b);
    }

    #[test]
    fn matches_dense_elimination_with_pivoting() {
        // Deterministic pseudo-random entries, including a zero diagonal that forces pivoting.
        let n = 50;
        let (kl, ku) = (3, 2);
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                dense[i][j] = rnd();
            }
            if i % 7 == 3 {
                dense[i][i] = 0.0;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let m = BandedMatrix::from_dense(&dense, kl, ku);
        let x = m.solve(&b).unwrap();
        let oracle = dense_gauss(dense, b);
        for (a, o) in x.iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let dense = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let m = BandedMatrix::from_dense(&dense, 1, 1);
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn transpose_and_matvec_agree() {
        let dense = vec![vec![1.0, 2.0, 0.0], vec![3.0, 4.0, 5.0], vec![0.0, 6.0, 7.0]];
        let m = BandedMatrix::from_dense(&dense, 1, 1);
        let x = [1.0, -1.0, 2.0];
        let y = [0.5, 2.0, -3.0];
        let mut ax = vec![0.0; 3];
        m.matvec(&x, &mut ax);
        let mut aty = vec![0.0; 3];
        m.transpose().matvec(&y, &mut aty);
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = aty.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, rhs);
    }
}
