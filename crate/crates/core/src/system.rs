//! Discrete input/output dynamical systems
//!
//! ```text
//! E x^{k+1} = A x^k + f(x^k) + B u^k
//! y^{k+1}   = C x^{k+1}
//! ```
//!
//! with constant sparse `E`, `A`, dense `B`, a single output row `C`, and a
//! nonlinear vector field `f`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result, RomError};
use crate::sparse::{BandedLu, CsrMatrix};

/// Nonlinear map `f: R^n -> R^n`.
pub trait Nonlinearity: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    /// Evaluates only the requested components. The default evaluates the
    /// full vector and extracts rows.
    fn eval_rows(&self, x: &[f64], rows: &[usize], out: &mut [f64]) {
        let mut full = vec![0.0; self.dim()];
        self.eval_into(x, &mut full);
        for (o, &r) in out.iter_mut().zip(rows) {
            *o = full[r];
        }
    }
}

/// `f ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroNonlinearity(pub usize);

impl Nonlinearity for ZeroNonlinearity {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval_into(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn eval_rows(&self, _x: &[f64], _rows: &[usize], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Wraps a closure as a [`Nonlinearity`].
pub struct FnNonlinearity<F> {
    n: usize,
    f: F,
}

impl<F> FnNonlinearity<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> Nonlinearity for FnNonlinearity<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// Time-dependent input signal `u(t) ∈ R^m`.
pub type InputSignal = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

pub fn no_input() -> InputSignal {
    Arc::new(|_t| DVector::zeros(0))
}

#[derive(Clone)]
pub struct DiscreteSystem {
    e: CsrMatrix,
    a: CsrMatrix,
    b: DMatrix<f64>,
    c: DVector<f64>,
    f: Arc<dyn Nonlinearity>,
    f_description: String,
    a_identity: bool,
}

impl fmt::Debug for DiscreteSystem {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("DiscreteSystem")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("nnz(E)", &self.e.nnz())
            .field("nnz(A)", &self.a.nnz())
            .field("f", &self.f_description)
            .finish()
    }
}

impl DiscreteSystem {
    /// `c` is the output row stored as a column vector. `b` may have zero columns.
    pub fn new(
        e: CsrMatrix,
        a: CsrMatrix,
        b: DMatrix<f64>,
        c: DVector<f64>,
        f: Arc<dyn Nonlinearity>,
        f_description: impl Into<String>,
    ) -> Result<Self> {
        let n = e.nrows();
        if n == 0 {
            return Err(RomError::Config("state dimension must be positive".into()));
        }
        check_dim("E columns", n, e.ncols())?;
        check_dim("A rows", n, a.nrows())?;
        check_dim("A columns", n, a.ncols())?;
        check_dim("B rows", n, b.nrows())?;
        check_dim("C length", n, c.len())?;
        check_dim("f dimension", n, f.dim())?;
        let a_identity = a.is_identity();
        Ok(Self {
            e,
            a,
            b,
            c,
            f,
            f_description: f_description.into(),
            a_identity,
        })
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn e(&self) -> &CsrMatrix {
        &self.e
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    /// `A == I`, detected once at construction.
    pub fn a_is_identity(&self) -> bool {
        self.a_identity
    }

    /// `out = A x`.
    pub fn apply_a_into(&self, x: &[f64], out: &mut [f64]) {
        if self.a_identity {
            out.copy_from_slice(x);
        } else {
            self.a.mul_vec_into(x, out);
        }
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn nonlinearity(&self) -> &dyn Nonlinearity {
        self.f.as_ref()
    }

    pub fn f_description(&self) -> &str {
        &self.f_description
    }

    pub fn eval_f(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        self.f.eval_into(x.as_slice(), out.as_mut_slice());
        out
    }

    /// Same system with `f` replaced.
    pub fn with_nonlinearity(&self, f: Arc<dyn Nonlinearity>, description: &str) -> Result<Self> {
        Self::new(
            self.e.clone(),
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            f,
            description,
        )
    }

    /// `A x + f(x) + B u`.
    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("state", self.n(), x.len())?;
        let fx = self.eval_f(x);
        self.rhs_with_nonlinear(x, &fx, u)
    }

    /// `A x + fx + B u` with `fx = f(x)` already evaluated.
    pub fn rhs_with_nonlinear(
        &self,
        x: &DVector<f64>,
        fx: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("state", self.n(), x.len())?;
        check_dim("nonlinear term", self.n(), fx.len())?;
        check_dim("input", self.m(), u.len())?;
        let mut rhs = DVector::zeros(self.n());
        self.apply_a_into(x.as_slice(), rhs.as_mut_slice());
        rhs += fx;
        if self.m() > 0 {
            rhs.gemv(1.0, &self.b, u, 1.0);
        }
        Ok(rhs)
    }

    /// `C x`.
    pub fn output(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim("output state", self.n(), x.len())?;
        Ok(self.c.dot(x))
    }

    pub fn factorize(&self, transpose: bool) -> Result<LinearSolveHandle> {
        LinearSolveHandle::new(&self.e, transpose)
    }

    /// One full-order step: solves `E x^{k+1} = A x^k + f(x^k) + B u^k`.
    pub fn step_fom(
        &self,
        handle: &LinearSolveHandle,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("state", self.n(), x.len())?;
        let fx = self.eval_f(x);
        self.step_fom_with_nonlinear(handle, x, &fx, u)
    }

    /// [`DiscreteSystem::step_fom`] with `f(x^k)` supplied by the caller.
    pub fn step_fom_with_nonlinear(
        &self,
        handle: &LinearSolveHandle,
        x: &DVector<f64>,
        fx: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if handle.is_transpose() {
            return Err(RomError::Config(
                "step_fom requires a factorization of E, not E^T".into(),
            ));
        }
        check_dim("solve handle", self.n(), handle.dim())?;
        let mut rhs = self.rhs_with_nonlinear(x, fx, u)?;
        handle.lu.solve_in_place(rhs.as_mut_slice());
        Ok(rhs)
    }
}

/// Cached factorization of `E`, usable for solves with `E` or `E^T`.
#[derive(Debug, Clone)]
pub struct LinearSolveHandle {
    lu: Arc<BandedLu>,
    transpose: bool,
}

impl LinearSolveHandle {
    pub fn new(e: &CsrMatrix, transpose: bool) -> Result<Self> {
        Ok(Self {
            lu: Arc::new(BandedLu::factorize(e)?),
            transpose,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn is_transpose(&self) -> bool {
        self.transpose
    }

    /// Solves with `E` or `E^T` depending on how the handle was created.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("solve rhs", self.dim(), b.len())?;
        let mut z = b.clone();
        if self.transpose {
            self.lu.solve_transpose_in_place(z.as_mut_slice());
        } else {
            self.lu.solve_in_place(z.as_mut_slice());
        }
        Ok(z)
    }

    /// Same factors, opposite orientation.
    pub fn transposed(&self) -> Self {
        Self {
            lu: Arc::clone(&self.lu),
            transpose: !self.transpose,
        }
    }

    pub fn estimate_inv_norm(&self) -> InvNormEstimate {
        estimate_inv_norm(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvNormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const INV_NORM_RTOL: f64 = 1e-6;
pub const INV_NORM_MAX_ITER: usize = 200;

/// Estimates `||E^{-1}||_2 = 1 / sigma_min(E)` by inverse power iteration on
/// `E^T E`, using the Rayleigh quotient of `(E^T E)^{-1}` as the estimate.
pub fn estimate_inv_norm(handle: &LinearSolveHandle) -> InvNormEstimate {
    let n = handle.dim();
    let lu = &handle.lu;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    for it in 1..=INV_NORM_MAX_ITER {
        // w = E^{-T} v, so ||w||^2 = v^T (E^T E)^{-1} v
        let mut w = v.clone();
        lu.solve_transpose_in_place(&mut w);
        let next = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lu.solve_in_place(&mut w);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return InvNormEstimate {
                value: next,
                iterations: it,
                converged: false,
            };
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if it > 1 && (next - estimate).abs() <= INV_NORM_RTOL * next {
            return InvNormEstimate {
                value: next,
                iterations: it,
                converged: true,
            };
        }
        estimate = next;
    }
    log::warn!("inverse norm estimate did not converge in {INV_NORM_MAX_ITER} iterations");
    InvNormEstimate {
        value: estimate,
        iterations: INV_NORM_MAX_ITER,
        converged: false,
    }
}

/// One recorded time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    pub x: DVector<f64>,
    pub y: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_system(e: CsrMatrix) -> DiscreteSystem {
        let n = e.nrows();
        DiscreteSystem::new(
            e,
            CsrMatrix::identity(n),
            DMatrix::zeros(n, 0),
            DVector::from_element(n, 1.0 / n as f64),
            Arc::new(ZeroNonlinearity(n)),
            "zero",
        )
        .unwrap()
    }

    #[test]
    fn identity_and_scalar_solves() {
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let h = linear_system(CsrMatrix::identity(3)).factorize(false).unwrap();
        assert_eq!(h.solve(&b).unwrap(), b);

        let h = linear_system(CsrMatrix::from_diagonal(&[2.0; 3]))
            .factorize(false)
            .unwrap();
        let z = h.solve(&DVector::from_vec(vec![2.0, 4.0, 6.0])).unwrap();
        assert_eq!(z, b);
    }

    #[test]
    fn random_sparse_solve_matches_dense() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut t = Vec::new();
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if i != j && rng.gen::<f64>() < 0.08 {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    s += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, s + 0.5));
        }
        let e = CsrMatrix::from_triplets(n, n, &t);
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let oracle = e.to_dense().lu().solve(&b).unwrap();
        for transpose in [false, true] {
            let sys = linear_system(e.clone());
            let h = sys.factorize(transpose).unwrap();
            let z = h.solve(&b).unwrap();
            if transpose {
                let oracle_t = e.to_dense().transpose().lu().solve(&b).unwrap();
                assert!((z - &oracle_t).norm() / oracle_t.norm() < 1e-10);
            } else {
                assert!((&z - &oracle).norm() / oracle.norm() < 1e-10);
                let res = e.mul_vec(&z).unwrap() - &b;
                assert!(res.norm() / b.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn singular_e_is_rejected() {
        let e = CsrMatrix::from_diagonal(&[1.0, 0.0, 1.0]);
        let sys = linear_system(e);
        assert!(matches!(sys.factorize(false), Err(RomError::SingularMatrix { .. })));
    }

    #[test]
    fn step_with_quadratic_nonlinearity_matches_dense_oracle() {
        let n = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut e = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.3..0.3));
        for i in 0..n {
            e[(i, i)] += 2.0;
        }
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let f = Arc::new(FnNonlinearity::new(n, |x: &[f64], out: &mut [f64]| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = xi * xi;
            }
        }));
        let sys = DiscreteSystem::new(
            CsrMatrix::from_dense(&e, 0.0),
            CsrMatrix::from_dense(&a, 0.0),
            b.clone(),
            c,
            f,
            "x∘x",
        )
        .unwrap();
        let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let u = DVector::from_vec(vec![0.5, -0.25]);
        let h = sys.factorize(false).unwrap();
        let got = sys.step_fom(&h, &x, &u).unwrap();
        let rhs = &a * &x + x.component_mul(&x) + &b * &u;
        let oracle = e.lu().solve(&rhs).unwrap();
        assert!((got - &oracle).norm() <= 1e-12 * oracle.norm());
    }

    #[test]
    fn step_rejects_bad_dimensions_and_transposed_handle() {
        let sys = linear_system(CsrMatrix::identity(4));
        let h = sys.factorize(false).unwrap();
        assert!(sys.step_fom(&h, &DVector::zeros(3), &DVector::zeros(0)).is_err());
        assert!(sys.step_fom(&h, &DVector::zeros(4), &DVector::zeros(1)).is_err());
        assert!(sys
            .step_fom(&h.transposed(), &DVector::zeros(4), &DVector::zeros(0))
            .is_err());
    }

    #[test]
    fn output_is_dot_product() {
        let n = 6;
        let sys = linear_system(CsrMatrix::identity(n));
        assert!((sys.output(&DVector::from_element(n, 1.0)).unwrap() - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let sys = DiscreteSystem::new(
            CsrMatrix::identity(n),
            CsrMatrix::identity(n),
            DMatrix::zeros(n, 0),
            c.clone(),
            Arc::new(ZeroNonlinearity(n)),
            "zero",
        )
        .unwrap();
        let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let oracle: f64 = (0..n).map(|i| c[i] * x[i]).sum();
        assert!((sys.output(&x).unwrap() - oracle).abs() < 1e-15);
        assert!(sys.output(&DVector::zeros(2)).is_err());
    }

    #[test]
    fn inverse_norm_simple_cases() {
        let h = CsrMatrix::from_diagonal(&[2.0; 4]);
        let est = LinearSolveHandle::new(&h, false).unwrap().estimate_inv_norm();
        assert!(est.converged);
        assert!((est.value - 0.5).abs() < 1e-12);

        let h = LinearSolveHandle::new(&CsrMatrix::from_diagonal(&[1.0, 0.1, 10.0]), false).unwrap();
        let est = h.estimate_inv_norm();
        assert!(est.converged);
        assert!((est.value - 10.0).abs() / 10.0 < 1e-6);
    }

    #[test]
    fn inverse_norm_matches_svd() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g1 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let g2 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q1 = g1.qr().q();
        let q2 = g2.qr().q();
        let s = DVector::from_fn(n, |i, _| if i == 0 { 0.5 } else { rng.gen_range(1.0..3.0) });
        let e = &q1 * DMatrix::from_diagonal(&s) * q2.transpose();
        let sigma_min = e.clone().svd(false, false).singular_values.min();
        let h = LinearSolveHandle::new(&CsrMatrix::from_dense(&e, 0.0), false).unwrap();
        let est = h.estimate_inv_norm();
        assert!(est.converged);
        assert!((est.value - 1.0 / sigma_min).abs() * sigma_min < 1e-5);
    }
}
