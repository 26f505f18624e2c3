//! Discrete empirical interpolation.
//!
//! Given a basis `Φ_f` for nonlinear snapshots, DEIM picks row indices `P`
//! greedily and approximates `f ≈ Φ_f (P^T Φ_f)^{-1} P^T f`, so only `ℓ`
//! entries of `f` are ever evaluated.

use nalgebra::{DMatrix, DMatrixView, DVector, LU, Dyn};

use crate::error::{check_dim, Result, RomError};
use crate::pod::pod_mos;

#[derive(Debug, Clone)]
pub struct DeimOperator {
    basis: DMatrix<f64>,
    points: Vec<usize>,
    lu: LU<f64, Dyn, Dyn>,
}

/// Index of the entry of largest magnitude, smallest index on ties.
fn argmax_abs(v: &DVector<f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_val {
            best_val = x.abs();
            best = i;
        }
    }
    best
}

/// Greedy DEIM point selection on the columns of `basis`.
pub fn deim_points(basis: &DMatrix<f64>) -> Vec<usize> {
    let ell = basis.ncols();
    let mut points = Vec::with_capacity(ell);
    if ell == 0 {
        return points;
    }
    points.push(argmax_abs(&basis.column(0).into_owned()));
    for j in 1..ell {
        let u = basis.columns(0, j);
        let pu = DMatrix::from_fn(j, j, |a, b| u[(points[a], b)]);
        let rhs = DVector::from_fn(j, |a, _| basis[(points[a], j)]);
        let c = pu.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(j));
        let residual = basis.column(j) - u * c;
        points.push(argmax_abs(&residual));
    }
    points
}

impl DeimOperator {
    /// Builds the operator from an explicit basis.
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        let points = deim_points(&basis);
        Self::with_points(basis, points)
    }

    pub fn with_points(basis: DMatrix<f64>, points: Vec<usize>) -> Result<Self> {
        check_dim("DEIM points", basis.ncols(), points.len())?;
        let mut sorted = points.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != points.len() {
            return Err(RomError::RankDeficient {
                requested: points.len(),
                achievable: sorted.len(),
            });
        }
        let ell = points.len();
        let pt_phi = DMatrix::from_fn(ell, ell, |a, b| basis[(points[a], b)]);
        let lu = pt_phi.lu();
        if !lu.is_invertible() {
            return Err(RomError::SingularMatrix { column: 0 });
        }
        Ok(Self { basis, points, lu })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(P^T Φ_f)^{-1}` applied to the sampled entries.
    pub fn project(&self, f_at_points: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("DEIM samples", self.len(), f_at_points.len())?;
        self.lu
            .solve(f_at_points)
            .ok_or(RomError::SingularMatrix { column: 0 })
    }

    /// `𝕡 f = Φ_f (P^T Φ_f)^{-1} P^T f`.
    pub fn interpolate(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("DEIM full vector", self.basis.nrows(), f.len())?;
        let sampled = DVector::from_iterator(self.len(), self.points.iter().map(|&p| f[p]));
        Ok(&self.basis * self.project(&sampled)?)
    }

    /// `Φ^T Φ_f (P^T Φ_f)^{-1}`, the r × ℓ matrix used by a DEIM-reduced model.
    pub fn reduced_operator(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let left = crate::pod::at_b(phi.as_view(), self.basis.as_view());
        let inv = self
            .lu
            .try_inverse()
            .expect("DEIM interpolation matrix checked invertible");
        left * inv
    }
}

/// POD of the nonlinear snapshots `f` truncated to `ell` modes, followed by
/// greedy point selection.
pub fn deim_select(f: DMatrixView<'_, f64>, ell: usize) -> Result<DeimOperator> {
    if ell == 0 {
        return Err(RomError::Config("DEIM needs at least one basis vector".into()));
    }
    let pod = pod_mos(f, 0.0, ell).map_err(|e| match e {
        RomError::EmptyWindow => RomError::RankDeficient {
            requested: ell,
            achievable: 0,
        },
        other => other,
    })?;
    if pod.rank() < ell {
        return Err(RomError::RankDeficient {
            requested: ell,
            achievable: pod.rank(),
        });
    }
    DeimOperator::from_basis(pod.phi().clone())
}
