//! Compressed sparse row storage and a banded LU factorization.
//!
//! The benchmark matrices are narrow-banded (tridiagonal), so the factorization
//! works on the band detected from the sparsity pattern. A matrix with full
//! bandwidth simply degenerates into a dense LU with partial pivoting.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result, RomError};

/// Real sparse matrix in CSR layout with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &sorted {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
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
        Self::from_diagonal(&vec![1.0; n])
    }

    /// True when the stored pattern and values are exactly those of `I`.
    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.nrows).all(|i| {
                let mut row = self.row(i).filter(|&(_, v)| v != 0.0);
                row.next() == Some((i, 1.0)) && row.next().is_none()
            })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a tridiagonal matrix from its sub-, main and super-diagonal.
    pub fn tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        assert!(lower.len() + 1 == n.max(1) && upper.len() + 1 == n.max(1));
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, lower[i - 1]));
            }
            t.push((i, i, diag[i]));
            if i + 1 < n {
                t.push((i, i + 1, upper[i]));
            }
        }
        Self::from_triplets(n, n, &t)
    }

    /// Drops explicit entries whose magnitude is at most `threshold`.
    pub fn from_dense(m: &DMatrix<f64>, threshold: f64) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.abs() > threshold {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t)
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

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Iterates over `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (o, ptr) in out.iter_mut().zip(self.row_ptr.windows(2)) {
            let (start, end) = (ptr[0], ptr[1]);
            *o = self.values[start..end]
                .iter()
                .zip(&self.col_idx[start..end])
                .map(|(v, &j)| v * x[j])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("sparse matvec", self.ncols, x.len())?;
        let mut out = DVector::zeros(self.nrows);
        self.mul_vec_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// Sparse times dense matrix, one sparse row at a time across all columns.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim("sparse matmul", self.ncols, m.nrows())?;
        let (n_out, n_in, k) = (self.nrows, self.ncols, m.ncols());
        let mut out = DMatrix::<f64>::zeros(n_out, k);
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for (i, ptr) in self.row_ptr.windows(2).enumerate() {
            for (&j, &v) in self.col_idx[ptr[0]..ptr[1]].iter().zip(&self.values[ptr[0]..ptr[1]]) {
                for c in 0..k {
                    dst[c * n_out + i] += v * src[c * n_in + j];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Returns `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            t.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Lower and upper bandwidth `(kl, ku)` of the stored pattern.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }
}

/// LU factorization with partial pivoting of a banded square matrix.
///
/// Row `i` of the working array stores columns `i - kl ..= i + kl + ku`, which
/// is enough room for the fill produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factorize(m: &CsrMatrix) -> Result<Self> {
        check_dim("LU factorization (square)", m.nrows(), m.ncols())?;
        let n = m.nrows();
        let (kl, ku) = m.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            band: vec![0.0; n * width],
            multipliers: vec![0.0; n * kl],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for (j, v) in m.row(i) {
                let idx = lu.idx(i, j);
                lu.band[idx] = v;
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);

            let mut p = k;
            let mut best = self.band[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.band[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(RomError::SingularMatrix { column: k });
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.band.swap(a, b);
                }
            }

            let pivot = self.band[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.band[ik] / pivot;
                self.band[ik] = 0.0;
                self.multipliers[k * self.kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.idx(k, j);
                        let ij = self.idx(i, j);
                        self.band[ij] -= m * self.band[kj];
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A z = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let (kl, width) = (self.kl, self.width);
        if kl > 0 {
            for (k, mults) in self.multipliers.chunks_exact(kl).enumerate() {
                let p = self.pivots[k];
                if p != k {
                    b.swap(k, p);
                }
                let bk = b[k];
                if bk != 0.0 {
                    let below = &mut b[k + 1..(k + 1 + kl).min(n)];
                    for (bi, m) in below.iter_mut().zip(mults) {
                        *bi -= m * bk;
                    }
                }
            }
        }
        // row k of the band starts at column k - kl, so the diagonal sits at offset kl
        for k in (0..n).rev() {
            let row = &self.band[k * width..(k + 1) * width];
            let upper = &row[kl + 1..];
            let tail = &b[k + 1..(k + 1 + upper.len()).min(n)];
            let acc = b[k] - upper.iter().zip(tail).map(|(u, x)| u * x).sum::<f64>();
            b[k] = acc / row[kl];
        }
    }

    /// Solves `A^T z = b` in place with the same factors.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let reach = self.kl + self.ku;
        // U^T y = b
        for k in 0..n {
            let yk = b[k] / self.band[self.idx(k, k)];
            b[k] = yk;
            if yk != 0.0 {
                let last_col = (k + reach).min(n - 1);
                for j in k + 1..=last_col {
                    b[j] -= self.band[self.idx(k, j)] * yk;
                }
            }
        }
        // apply (L_k^{-1} P_k)^T in reverse order
        for k in (0..n).rev() {
            let last_row = (k + self.kl).min(n - 1);
            let mut acc = b[k];
            for i in k + 1..=last_row {
                acc -= self.multipliers[k * self.kl + (i - k - 1)] * b[i];
            }
            b[k] = acc;
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j && rng.gen::<f64>() < density {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    row_sum += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, row_sum + 1.0));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_detection() {
        assert!(CsrMatrix::identity(4).is_identity());
        assert!(!CsrMatrix::from_diagonal(&[1.0, 2.0]).is_identity());
        assert!(!CsrMatrix::tridiagonal(&[0.5], &[1.0, 1.0], &[0.0]).is_identity());
        assert!(CsrMatrix::tridiagonal(&[0.0], &[1.0, 1.0], &[0.0]).is_identity());
    }

    #[test]
    fn triplets_are_sorted_and_summed() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (1, 0, 5.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(0, 0), 0.0);
        let cols: Vec<usize> = m.row(1).map(|(j, _)| j).collect();
        assert_eq!(cols, vec![0, 2]);
    }

    #[test]
    fn mul_matches_dense() {
        let m = random_sparse(20, 0.2, 1);
        let x = DVector::from_fn(20, |i, _| (i as f64).sin());
        let dense = m.to_dense() * &x;
        assert!((m.mul_vec(&x).unwrap() - dense).norm() < 1e-13);
        let t = m.transpose();
        assert!((t.to_dense() - m.to_dense().transpose()).norm() == 0.0);
    }

    #[test]
    fn banded_lu_tridiagonal() {
        let n = 50;
        let m = CsrMatrix::tridiagonal(&vec![-1.0; n - 1], &vec![2.5; n], &vec![-0.7; n - 1]);
        assert_eq!(m.bandwidth(), (1, 1));
        let lu = BandedLu::factorize(&m).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut z = b.clone();
        lu.solve_in_place(&mut z);
        let mut r = vec![0.0; n];
        m.mul_vec_into(&z, &mut r);
        let err: f64 = r.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-13);
    }

    #[test]
    fn pivoting_needed() {
        // zero leading entry forces a row interchange
        let m = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 1, 1.0), (1, 0, 2.0), (1, 1, 1.0), (1, 2, 1.0), (2, 1, 3.0), (2, 2, 4.0)],
        );
        let lu = BandedLu::factorize(&m).unwrap();
        let b = [1.0, 2.0, 3.0];
        let mut z = b;
        lu.solve_in_place(&mut z);
        let mut r = [0.0; 3];
        m.mul_vec_into(&z, &mut r);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-14);
        }
        let mut zt = b;
        lu.solve_transpose_in_place(&mut zt);
        m.transpose().mul_vec_into(&zt, &mut r);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]);
        assert!(matches!(
            BandedLu::factorize(&m),
            Err(RomError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn random_sparse_against_dense_lu() {
        for seed in 0..5 {
            let m = random_sparse(40, 0.1, seed);
            let lu = BandedLu::factorize(&m).unwrap();
            let b = DVector::from_fn(40, |i, _| 1.0 + i as f64);
            let oracle = m.to_dense().lu().solve(&b).unwrap();
            let mut z = b.as_slice().to_vec();
            lu.solve_in_place(&mut z);
            let z = DVector::from_vec(z);
            assert!((z - &oracle).norm() / oracle.norm() < 1e-12);

            let oracle_t = m.to_dense().transpose().lu().solve(&b).unwrap();
            let mut zt = b.as_slice().to_vec();
            lu.solve_transpose_in_place(&mut zt);
            assert!((DVector::from_vec(zt) - &oracle_t).norm() / oracle_t.norm() < 1e-12);
        }
    }
}
