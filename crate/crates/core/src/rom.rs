//! Galerkin-projected reduced-order model
//!
//! ```text
//! E_r x_r^{k+1} = A_r x_r^k + Φ^T f̂(Φ x_r^k) + B_r u^k,   y_r = C_r x_r
//! ```
//!
//! with `f̂ = f` (POD) or `f̂ = 𝕡 f` (DEIM).

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::deim::DeimOperator;
use crate::error::{check_dim, Result, RomError};
use crate::pod::{at_b, PodBasis};
use crate::system::DiscreteSystem;
use crate::window::SnapshotWindow;

#[derive(Debug, Clone)]
struct RomDeim {
    op: DeimOperator,
    /// Φ^T Φ_f (P^T Φ_f)^{-1}
    reduced: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct Rom {
    phi: DMatrix<f64>,
    e_phi: DMatrix<f64>,
    a_phi: DMatrix<f64>,
    e_r: DMatrix<f64>,
    a_r: DMatrix<f64>,
    b_r: DMatrix<f64>,
    c_r: DVector<f64>,
    e_r_lu: Option<LU<f64, Dyn, Dyn>>,
    deim: Option<RomDeim>,
}

/// Intermediate quantities of one reduced step, reused by the error indicator.
#[derive(Debug, Clone)]
pub struct RomStep {
    /// `x_r^{k+1}`
    pub next: DVector<f64>,
    /// `x̂^k = Φ x_r^k`
    pub lifted: DVector<f64>,
    /// `f(x̂^k)`, evaluated in full
    pub f_lifted: DVector<f64>,
}

impl Rom {
    /// Assembles the ROM from a window-derived basis. `EΦ` and `AΦ` come from
    /// the stored images (`S_E K`, `S_A K`) unless the sparse product is cheaper.
    pub fn from_window(
        system: &DiscreteSystem,
        basis: &PodBasis,
        window: &SnapshotWindow,
        deim: Option<DeimOperator>,
    ) -> Result<Self> {
        check_dim("basis/window snapshot count", window.count(), basis.coefficients().nrows())?;
        check_dim("basis/window state dimension", window.n(), basis.n())?;
        // S_E K costs n w r flops, E Φ costs nnz(E) r; take the cheaper one
        let dense_cost = window.n() * window.count();
        let image = |m: &crate::sparse::CsrMatrix, s| {
            if m.nnz() < dense_cost {
                m.mul_dense(basis.phi())
            } else {
                Ok(basis.image(s))
            }
        };
        let e_phi = image(system.e(), window.storage_e_images())?;
        // S_A = S when A = I, so S_A K is Φ itself
        let a_phi = if system.a_is_identity() {
            basis.phi().clone()
        } else {
            image(system.a(), window.storage_a_images())?
        };
        Self::assemble(system, basis.phi().clone(), e_phi, a_phi, deim)
    }

    /// Assembles the ROM for an arbitrary orthonormal basis with direct sparse products.
    pub fn from_basis(
        system: &DiscreteSystem,
        phi: &DMatrix<f64>,
        deim: Option<DeimOperator>,
    ) -> Result<Self> {
        check_dim("basis rows", system.n(), phi.nrows())?;
        let e_phi = system.e().mul_dense(phi)?;
        let a_phi = system.a().mul_dense(phi)?;
        Self::assemble(system, phi.clone(), e_phi, a_phi, deim)
    }

    /// Zero-dimensional model: every lifted state is 0.
    pub fn empty(system: &DiscreteSystem) -> Self {
        let n = system.n();
        Self {
            phi: DMatrix::zeros(n, 0),
            e_phi: DMatrix::zeros(n, 0),
            a_phi: DMatrix::zeros(n, 0),
            e_r: DMatrix::zeros(0, 0),
            a_r: DMatrix::zeros(0, 0),
            b_r: DMatrix::zeros(0, system.m()),
            c_r: DVector::zeros(0),
            e_r_lu: None,
            deim: None,
        }
    }

    fn assemble(
        system: &DiscreteSystem,
        phi: DMatrix<f64>,
        e_phi: DMatrix<f64>,
        a_phi: DMatrix<f64>,
        deim: Option<DeimOperator>,
    ) -> Result<Self> {
        if phi.ncols() == 0 {
            return Ok(Self::empty(system));
        }
        let e_r = at_b(phi.as_view(), e_phi.as_view());
        let a_r = at_b(phi.as_view(), a_phi.as_view());
        let b_r = phi.tr_mul(system.b());
        let c_r = phi.tr_mul(system.c());
        let lu = e_r.clone().lu();
        if !lu.is_invertible() {
            return Err(RomError::DegenerateBasis);
        }
        let deim = match deim {
            Some(op) => {
                check_dim("DEIM basis rows", system.n(), op.basis().nrows())?;
                let reduced = op.reduced_operator(&phi);
                Some(RomDeim { op, reduced })
            }
            None => None,
        };
        Ok(Self {
            phi,
            e_phi,
            a_phi,
            e_r,
            a_r,
            b_r,
            c_r,
            e_r_lu: Some(lu),
            deim,
        })
    }

    pub fn rank(&self) -> usize {
        self.phi.ncols()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn e_phi(&self) -> &DMatrix<f64> {
        &self.e_phi
    }

    pub fn a_phi(&self) -> &DMatrix<f64> {
        &self.a_phi
    }

    pub fn e_r(&self) -> &DMatrix<f64> {
        &self.e_r
    }

    pub fn a_r(&self) -> &DMatrix<f64> {
        &self.a_r
    }

    pub fn b_r(&self) -> &DMatrix<f64> {
        &self.b_r
    }

    pub fn c_r(&self) -> &DVector<f64> {
        &self.c_r
    }

    pub fn deim(&self) -> Option<&DeimOperator> {
        self.deim.as_ref().map(|d| &d.op)
    }

    pub fn uses_deim(&self) -> bool {
        self.deim.is_some()
    }

    /// `x_r = Φ^T x`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("projected state", self.phi.nrows(), x.len())?;
        Ok(self.phi.tr_mul(x))
    }

    /// `x̂ = Φ x_r`.
    pub fn lift(&self, x_r: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("reduced state", self.rank(), x_r.len())?;
        Ok(&self.phi * x_r)
    }

    /// `y_r = C_r x_r`.
    pub fn reduced_output(&self, x_r: &DVector<f64>) -> Result<f64> {
        check_dim("reduced state", self.rank(), x_r.len())?;
        Ok(self.c_r.dot(x_r))
    }

    /// Reduced nonlinear term `Φ^T f̂(x̂)` given the full `f(x̂)`.
    fn reduced_nonlinear(&self, system: &DiscreteSystem, lifted: &DVector<f64>, f_full: Option<&DVector<f64>>) -> DVector<f64> {
        match &self.deim {
            Some(d) => {
                let pts = d.op.points();
                let mut samples = DVector::zeros(pts.len());
                match f_full {
                    Some(f) => {
                        for (s, &p) in samples.iter_mut().zip(pts) {
                            *s = f[p];
                        }
                    }
                    None => system
                        .nonlinearity()
                        .eval_rows(lifted.as_slice(), pts, samples.as_mut_slice()),
                }
                &d.reduced * samples
            }
            None => {
                let f = f_full.expect("POD reduction needs the full nonlinear term");
                self.phi.tr_mul(f)
            }
        }
    }

    /// One reduced step that also returns `x̂^k` and the full `f(x̂^k)`.
    pub fn advance(
        &self,
        system: &DiscreteSystem,
        x_r: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<RomStep> {
        check_dim("reduced state", self.rank(), x_r.len())?;
        self.advance_from(system, x_r, &self.phi * x_r, u)
    }

    /// [`Rom::advance`] when `lifted = Φ x_r` is already known.
    pub fn advance_from(
        &self,
        system: &DiscreteSystem,
        x_r: &DVector<f64>,
        lifted: DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<RomStep> {
        check_dim("reduced state", self.rank(), x_r.len())?;
        check_dim("lifted state", self.phi.nrows(), lifted.len())?;
        check_dim("input", system.m(), u.len())?;
        let f_lifted = system.eval_f(&lifted);
        let next = self.solve_step(system, x_r, u, &lifted, Some(&f_lifted));
        Ok(RomStep {
            next,
            lifted,
            f_lifted,
        })
    }

    fn solve_step(
        &self,
        system: &DiscreteSystem,
        x_r: &DVector<f64>,
        u: &DVector<f64>,
        lifted: &DVector<f64>,
        f_full: Option<&DVector<f64>>,
    ) -> DVector<f64> {
        let Some(lu) = &self.e_r_lu else {
            return DVector::zeros(0);
        };
        let mut rhs = &self.a_r * x_r + self.reduced_nonlinear(system, lifted, f_full);
        if system.m() > 0 {
            rhs.gemv(1.0, &self.b_r, u, 1.0);
        }
        lu.solve(&rhs).expect("E_r checked invertible at assembly")
    }

    /// `x_r^{k+1}` from `x_r^k`. With DEIM only the interpolation rows of `f`
    /// are evaluated.
    pub fn step(
        &self,
        system: &DiscreteSystem,
        x_r: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("reduced state", self.rank(), x_r.len())?;
        check_dim("input", system.m(), u.len())?;
        let lifted = &self.phi * x_r;
        if self.deim.is_some() {
            Ok(self.solve_step(system, x_r, u, &lifted, None))
        } else {
            let f = system.eval_f(&lifted);
            Ok(self.solve_step(system, x_r, u, &lifted, Some(&f)))
        }
    }

    /// Reduced residual `A x̂^k + f(x̂^k) + B u^k - E x̂^{k+1}` from the pieces of
    /// [`Rom::advance`], using the cached images `AΦ`, `EΦ`.
    pub fn residual_from_step(
        &self,
        system: &DiscreteSystem,
        x_r: &DVector<f64>,
        step: &RomStep,
        u: &DVector<f64>,
    ) -> DVector<f64> {
        let mut r = step.f_lifted.clone();
        if self.rank() > 0 {
            r.gemv(1.0, &self.a_phi, x_r, 1.0);
            r.gemv(-1.0, &self.e_phi, &step.next, 1.0);
        }
        if system.m() > 0 {
            r.gemv(1.0, system.b(), u, 1.0);
        }
        r
    }
}

/// Reduced dual solve `E_r^T x_r^du = -Ψ^T C^T`, returning the lifted `Ψ x_r^du`.
pub fn solve_reduced_dual(system: &DiscreteSystem, psi: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_dim("dual basis rows", system.n(), psi.nrows())?;
    if psi.ncols() == 0 {
        return Ok(DVector::zeros(system.n()));
    }
    let e_psi = system.e().mul_dense(psi)?;
    let e_r = psi.transpose() * e_psi;
    let rhs = -(psi.tr_mul(system.c()));
    let sol = e_r
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or(RomError::DegenerateBasis)?;
    Ok(psi * sol)
}
