//! Dual-based output error indicator.
//!
//! Testing the dual equation `E^T x_du = -C^T` with the state error gives the
//! exact identity `y - y_r = -x_du^T r_pr`. Splitting `x_du` into an
//! approximation `x̂_du` plus a remainder controlled by the dual residual
//! yields the computable bound
//!
//! ```text
//! |y^{k+1} - y_r^{k+1}| <= (||r_du|| ||E^{-1}|| + ||x̂_du||) ||r_pr^{k+1}||
//! ```
//!
//! and the indicator `Δ^{k+1} = C_du ||r̂_pr^{k+1}||` replaces the true
//! residual by the one evaluated entirely from reduced quantities.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::pod::orthonormal_extend;
use crate::rom::{solve_reduced_dual, Rom};
use crate::system::{DiscreteSystem, InvNormEstimate, LinearSolveHandle};

/// Indicator value recorded for steps advanced with the full-order model.
pub const FOM_STEP_DELTA: f64 = f64::EPSILON;

/// How the dual problem is approximated.
#[derive(Debug, Clone, PartialEq)]
pub enum DualMode {
    /// Direct solve with the factorization of `E`.
    Full,
    /// Galerkin solve in the span of the given orthonormal basis.
    Reduced(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualData {
    pub x_du_hat: DVector<f64>,
    pub r_du_norm: f64,
    pub inv_norm: InvNormEstimate,
    /// `||r_du|| ||E^{-1}|| + ||x̂_du||`
    pub c_du: f64,
}

impl DualData {
    pub fn from_parts(x_du_hat: DVector<f64>, r_du_norm: f64, inv_norm: InvNormEstimate) -> Self {
        let c_du = r_du_norm * inv_norm.value + x_du_hat.norm();
        Self {
            x_du_hat,
            r_du_norm,
            inv_norm,
            c_du,
        }
    }
}

/// Per-step indicator record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEstimate {
    pub delta: f64,
    pub residual_norm: f64,
    pub rho: Option<f64>,
    pub true_error: Option<f64>,
}

/// `r_du = -C^T - E^T x̂_du`.
pub fn dual_residual(system: &DiscreteSystem, x_du_hat: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("dual state", system.n(), x_du_hat.len())?;
    let et = system.e().transpose();
    let mut r = -system.c();
    r -= et.mul_vec(x_du_hat)?;
    Ok(r)
}

/// Solves the dual problem with an existing factorization of `E` (either orientation).
pub fn solve_dual_with(
    system: &DiscreteSystem,
    handle: &LinearSolveHandle,
    mode: &DualMode,
) -> Result<DualData> {
    check_dim("dual handle", system.n(), handle.dim())?;
    let x_du_hat = match mode {
        DualMode::Full => {
            let h = if handle.is_transpose() {
                handle.clone()
            } else {
                handle.transposed()
            };
            h.solve(&(-system.c()))?
        }
        DualMode::Reduced(psi) => solve_reduced_dual(system, psi)?,
    };
    let r_du_norm = dual_residual(system, &x_du_hat)?.norm();
    let inv_norm = handle.estimate_inv_norm();
    Ok(DualData::from_parts(x_du_hat, r_du_norm, inv_norm))
}

pub fn solve_dual(system: &DiscreteSystem, mode: &DualMode) -> Result<DualData> {
    let handle = system.factorize(true)?;
    solve_dual_with(system, &handle, mode)
}

/// Orthonormal basis of the Krylov space `span{C^T, E^T C^T, ..., (E^T)^{q-1} C^T}`,
/// which contains good approximations of the dual solution without a
/// full-order solve.
pub fn krylov_dual_basis(system: &DiscreteSystem, q: usize) -> Result<DMatrix<f64>> {
    let et = system.e().transpose();
    let mut v = system.c().clone();
    let mut cols = Vec::with_capacity(q);
    for _ in 0..q {
        cols.push(v.clone());
        v = et.mul_vec(&v)?;
    }
    let raw = DMatrix::from_columns(&cols);
    Ok(orthonormal_extend(&DMatrix::zeros(system.n(), 0), &raw))
}

/// `||A x̂^k + f(x̂^k) + B u^k - E x̂^{k+1}||`.
pub fn reduced_residual(
    system: &DiscreteSystem,
    x_hat_k: &DVector<f64>,
    x_hat_k1: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    check_dim("next lifted state", system.n(), x_hat_k1.len())?;
    let mut r = system.rhs(x_hat_k, u)?;
    r -= system.e().mul_vec(x_hat_k1)?;
    Ok(r.norm())
}

/// `Δ = C_du * ||r̂_pr||`.
pub fn error_indicator(dual: &DualData, residual_norm: f64) -> f64 {
    dual.c_du * residual_norm
}

/// `ρ = ||r_pr|| / ||r̂_pr||` where `r_pr` uses the true previous state.
/// Returns NaN when the reduced residual vanishes.
pub fn effectivity_rho(
    system: &DiscreteSystem,
    x_k: &DVector<f64>,
    x_hat_k: &DVector<f64>,
    x_hat_k1: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let reduced = reduced_residual(system, x_hat_k, x_hat_k1, u)?;
    let truth = reduced_residual(system, x_k, x_hat_k1, u)?;
    if reduced == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(truth / reduced)
}

/// `|y^{k+1} - y_r^{k+1}|` for one FOM and one ROM step from the same `x^k`.
pub fn true_step_error(
    system: &DiscreteSystem,
    handle: &LinearSolveHandle,
    rom: &Rom,
    x_k: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let fom = system.step_fom(handle, x_k, u)?;
    let x_r = rom.project(x_k)?;
    let next = rom.step(system, &x_r, u)?;
    Ok((system.output(&fom)? - rom.reduced_output(&next)?).abs())
}
