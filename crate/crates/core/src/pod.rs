//! Proper orthogonal decomposition by the method of snapshots.
//!
//! For a tall snapshot matrix `S` (n × w, w ≪ n) the POD modes are obtained
//! from the small Gram matrix: `S^T S V = V Λ`, `Φ = S V Λ^{-1/2}`. The basis
//! is stored as `Φ = S K` with a w × r coefficient matrix `K`, so any image
//! `M Φ` can be formed as `(M S) K` when `M S` is already available.

use nalgebra::{DMatrix, DMatrixView, DVector, SymmetricEigen};

use crate::error::{check_dim, Result, RomError};

/// Eigenvalues below this fraction of the largest are never retained.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Default energy truncation used by the hybrid driver.
pub const DEFAULT_ENERGY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PodBasis {
    phi: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    coefficients: DMatrix<f64>,
}

impl PodBasis {
    /// `n × r` orthonormal basis.
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Retained Gram eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Coefficients `K` with `Φ = S K`.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn rank(&self) -> usize {
        self.phi.ncols()
    }

    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    /// Wraps an externally built orthonormal basis (no snapshot coefficients).
    pub fn from_orthonormal(phi: DMatrix<f64>) -> Self {
        let r = phi.ncols();
        Self {
            phi,
            eigenvalues: DVector::from_element(r, 1.0),
            coefficients: DMatrix::identity(r, r),
        }
    }

    /// `M Φ` given the snapshot image `M S` (same column order as `S`).
    pub fn image(&self, snapshot_image: DMatrixView<'_, f64>) -> DMatrix<f64> {
        snapshot_image * &self.coefficients
    }
}

/// `a^T b` through the blocked matrix product; `tr_mul` works column by
/// column with dot products and is several times slower at these sizes.
pub(crate) fn at_b(a: DMatrixView<'_, f64>, b: DMatrixView<'_, f64>) -> DMatrix<f64> {
    a.transpose() * b
}

struct GramModes {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn gram_modes(s: DMatrixView<'_, f64>) -> GramModes {
    modes_of_gram(at_b(s, s))
}

fn modes_of_gram(g: DMatrix<f64>) -> GramModes {
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    GramModes {
        eigenvalues,
        vectors,
    }
}

/// Number of modes kept by the energy criterion, the eigenvalue floor and `r_max`.
fn select_rank(eigenvalues: &[f64], energy_tol: f64, r_max: usize) -> usize {
    let lead = eigenvalues.first().copied().unwrap_or(0.0);
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mut r = 0;
    let mut captured = 0.0;
    for &l in eigenvalues {
        if l < EIGEN_FLOOR * lead || l <= 0.0 {
            break;
        }
        captured += l;
        r += 1;
        if 1.0 - captured / total <= energy_tol {
            break;
        }
    }
    r.min(r_max)
}

/// POD basis of the columns of `s`.
pub fn pod_mos(s: DMatrixView<'_, f64>, energy_tol: f64, r_max: usize) -> Result<PodBasis> {
    if s.ncols() == 0 || s.iter().all(|&v| v == 0.0) {
        return Err(RomError::EmptyWindow);
    }
    basis_from_gram(s, at_b(s, s), energy_tol, r_max)
}

/// [`pod_mos`] with the Gram matrix `S^T S` supplied by the caller.
pub fn pod_mos_with_gram(
    s: DMatrixView<'_, f64>,
    gram: DMatrixView<'_, f64>,
    energy_tol: f64,
    r_max: usize,
) -> Result<PodBasis> {
    check_dim("Gram rows", s.ncols(), gram.nrows())?;
    check_dim("Gram columns", s.ncols(), gram.ncols())?;
    if s.ncols() == 0 || gram.trace() <= 0.0 {
        return Err(RomError::EmptyWindow);
    }
    basis_from_gram(s, gram.into_owned(), energy_tol, r_max)
}

fn basis_from_gram(
    s: DMatrixView<'_, f64>,
    g: DMatrix<f64>,
    energy_tol: f64,
    r_max: usize,
) -> Result<PodBasis> {
    let modes = modes_of_gram(g);
    let r = select_rank(&modes.eigenvalues, energy_tol, r_max);
    if r == 0 {
        return Err(RomError::EmptyWindow);
    }
    let mut k = modes.vectors.columns(0, r).into_owned();
    for (j, mut col) in k.column_iter_mut().enumerate() {
        col /= modes.eigenvalues[j].sqrt();
    }
    // S V Λ^{-1/2} loses orthonormality in proportion to the conditioning of
    // the Gram matrix. One Cholesky-QR pass fixes it; R^{-1} is folded into K
    // so that Φ = S K still holds.
    let raw = s * &k;
    let (phi, r_inv) = match at_b(raw.as_view(), raw.as_view()).cholesky() {
        Some(chol) => {
            let l_inv_t = chol
                .l()
                .try_inverse()
                .ok_or(RomError::EmptyWindow)?
                .transpose();
            (&raw * &l_inv_t, l_inv_t)
        }
        None => {
            let qr = raw.qr();
            let r_inv = qr.r().try_inverse().ok_or(RomError::EmptyWindow)?;
            (qr.q(), r_inv)
        }
    };
    Ok(PodBasis {
        phi,
        eigenvalues: DVector::from_vec(modes.eigenvalues[..r].to_vec()),
        coefficients: k * r_inv,
    })
}

/// Compresses a wide snapshot matrix into `U Σ` (n × q) with
/// `U Σ (U Σ)^T ≈ S S^T`, merging column blocks of width `block`.
/// Left singular vectors of `(I - Φ Φ^T) S` can then be computed from the
/// compressed factor alone.
pub fn compress_snapshots(s: DMatrixView<'_, f64>, block: usize) -> DMatrix<f64> {
    let n = s.nrows();
    let block = block.max(1);
    let mut acc = DMatrix::<f64>::zeros(n, 0);
    let mut start = 0;
    while start < s.ncols() {
        let width = block.min(s.ncols() - start);
        let mut merged = DMatrix::zeros(n, acc.ncols() + width);
        merged.columns_mut(0, acc.ncols()).copy_from(&acc);
        merged
            .columns_mut(acc.ncols(), width)
            .copy_from(&s.columns(start, width));
        start += width;
        if merged.iter().all(|&v| v == 0.0) {
            acc = DMatrix::zeros(n, 0);
            continue;
        }
        let modes = gram_modes(merged.as_view());
        let r = select_rank(&modes.eigenvalues, 0.0, usize::MAX);
        acc = &merged * modes.vectors.columns(0, r);
    }
    acc
}

/// Leading left singular vectors of `(I - Φ Φ^T) S`, at most `count`, with
/// each returned vector orthogonal to `phi`.
pub fn deflated_modes(
    phi: &DMatrix<f64>,
    s: DMatrixView<'_, f64>,
    count: usize,
) -> Result<DMatrix<f64>> {
    let mut deflated = s.into_owned();
    if phi.ncols() > 0 {
        // two passes of classical Gram-Schmidt against Φ
        for _ in 0..2 {
            let coeff = at_b(phi.as_view(), deflated.as_view());
            deflated -= phi * coeff;
        }
    }
    let scale = s.norm().max(f64::MIN_POSITIVE);
    if deflated.norm() <= 1e-12 * scale {
        return Err(RomError::EmptyWindow);
    }
    let basis = pod_mos(deflated.as_view(), 0.0, count)?;
    Ok(basis.phi)
}

/// Appends columns to an orthonormal basis, re-orthonormalizing each new
/// column and dropping those that are numerically dependent.
pub fn orthonormal_extend(phi: &DMatrix<f64>, new: &DMatrix<f64>) -> DMatrix<f64> {
    let n = phi.nrows().max(new.nrows());
    let mut cols: Vec<DVector<f64>> = phi.column_iter().map(|c| c.into_owned()).collect();
    for c in new.column_iter() {
        let mut v = c.into_owned();
        let orig = v.norm();
        for _ in 0..2 {
            for q in &cols {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * orig.max(f64::MIN_POSITIVE) && nv > 0.0 {
            cols.push(v / nv);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Largest principal angle (radians) between the column spaces of two
/// orthonormal matrices of equal rank.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // sin(theta_max) = ||(I - A A^T) B||_2
    let proj = b - a * (a.transpose() * b);
    proj.svd(false, false).singular_values.max().min(1.0).asin()
}

pub fn orthonormality_defect(phi: &DMatrix<f64>) -> f64 {
    let g = phi.transpose() * phi - DMatrix::identity(phi.ncols(), phi.ncols());
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn repeated_column_gives_rank_one() {
        let c = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let w = 5;
        let s = DMatrix::from_fn(4, w, |i, _| c[i]);
        let b = pod_mos(s.as_view(), 1e-8, 10).unwrap();
        assert_eq!(b.rank(), 1);
        let unit = &c / c.norm();
        let col = b.phi().column(0).into_owned();
        assert!((col.dot(&unit).abs() - 1.0).abs() < 1e-14);
        assert!((b.eigenvalues()[0] - w as f64 * c.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = DMatrix::from_fn(20, 4, |_, _| rng.gen_range(-1.0..1.0));
        let q = g.qr().q();
        let b = pod_mos(q.as_view(), 1e-8, 10).unwrap();
        assert_eq!(b.rank(), 4);
        for l in b.eigenvalues().iter() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        assert!(max_principal_angle(b.phi(), &q) < 1e-10);
    }

    #[test]
    fn zero_matrix_is_an_error() {
        let s = DMatrix::<f64>::zeros(5, 3);
        assert_eq!(pod_mos(s.as_view(), 1e-8, 3).unwrap_err(), RomError::EmptyWindow);
        let s = DMatrix::<f64>::zeros(5, 0);
        assert_eq!(pod_mos(s.as_view(), 1e-8, 3).unwrap_err(), RomError::EmptyWindow);
    }

    #[test]
    fn matches_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = DMatrix::from_fn(60, 12, |_, _| rng.gen_range(-1.0..1.0));
        let b = pod_mos(s.as_view(), 0.0, 12).unwrap();
        assert_eq!(b.rank(), 12);
        let svd = s.clone().svd(true, false);
        let u = svd.u.unwrap();
        assert!(max_principal_angle(b.phi(), &u) <= 1e-10);
        for j in 0..12 {
            let dot = b.phi().column(j).dot(&u.column(j)).abs();
            assert!((dot - 1.0).abs() < 1e-9, "mode {j}: {dot}");
        }
        assert!(orthonormality_defect(b.phi()) < 1e-12);
        // Φ = S K
        assert!((&s * b.coefficients() - b.phi()).norm() < 1e-10);
    }

    #[test]
    fn energy_and_rmax_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = DMatrix::from_fn(30, 5, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let v = DMatrix::from_fn(8, 5, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let sig = DVector::from_vec(vec![1.0, 1e-1, 1e-2, 1e-5, 1e-9]);
        let s = &u * DMatrix::from_diagonal(&sig) * v.transpose();
        // squared singular values: 1, 1e-2, 1e-4, 1e-10, 1e-18
        assert_eq!(pod_mos(s.as_view(), 1e-3, 10).unwrap().rank(), 2);
        assert_eq!(pod_mos(s.as_view(), 1e-8, 10).unwrap().rank(), 3);
        assert_eq!(pod_mos(s.as_view(), 0.0, 10).unwrap().rank(), 4);
        assert_eq!(pod_mos(s.as_view(), 0.0, 2).unwrap().rank(), 2);
    }

    #[test]
    fn compression_preserves_leading_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = DMatrix::from_fn(40, 6, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let coeff = DMatrix::from_fn(6, 300, |i, _| rng.gen_range(-1.0..1.0) * 0.3f64.powi(i as i32));
        let s = &u * coeff;
        let c = compress_snapshots(s.as_view(), 32);
        assert!(c.ncols() <= 6);
        let g1 = &s * s.transpose();
        let g2 = &c * c.transpose();
        assert!((g1 - g2).norm() < 1e-9 * s.norm_squared());
    }

    #[test]
    fn deflation_and_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = DMatrix::from_fn(25, 7, |_, _| rng.gen_range(-1.0..1.0));
        let phi = pod_mos(s.columns(0, 3), 0.0, 3).unwrap().phi().clone();
        let u = deflated_modes(&phi, s.as_view(), 2).unwrap();
        assert!((&u - &phi * (phi.transpose() * &u)).norm() >= 0.99 * u.norm());
        assert!((phi.transpose() * &u).norm() < 1e-10);
        let ext = orthonormal_extend(&phi, &u);
        assert_eq!(ext.ncols(), 5);
        assert!(orthonormality_defect(&ext) < 1e-12);
        // dependent columns are dropped
        let again = orthonormal_extend(&ext, &u);
        assert_eq!(again.ncols(), 5);
    }
}
