//! Benchmark problems in canonical [`DiscreteSystem`] form.
//!
//! * 1D viscous Burgers' equation on `[0, 1]` with zero Dirichlet data,
//!   central differences and semi-implicit Euler (diffusion implicit,
//!   convection explicit).
//! * RC ladder with diodes `g(v) = exp(40 v) - 1` driven by a step current at
//!   node 1, linearized at `v = 0` so that the Jacobian part is treated
//!   implicitly and the remainder explicitly.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RomError};
use crate::sparse::CsrMatrix;
use crate::system::{no_input, DiscreteSystem, InputSignal, Nonlinearity, ZeroNonlinearity};

/// A system together with its initial state, input and time grid.
#[derive(Clone)]
pub struct ModelProblem {
    pub system: DiscreteSystem,
    pub x0: DVector<f64>,
    pub input: InputSignal,
    pub n_t: usize,
    pub t_final: f64,
}

impl ModelProblem {
    pub fn dt(&self) -> f64 {
        self.t_final / self.n_t as f64
    }

    /// `t_k = k * t_final / n_t`, computed without accumulating round-off.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.t_final / self.n_t as f64
    }
}

impl std::fmt::Debug for ModelProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelProblem")
            .field("system", &self.system)
            .field("n_t", &self.n_t)
            .field("t_final", &self.t_final)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersConfig {
    /// Grid exponent: `n = 2^p - 1` interior points, `2^(p+1)` time steps.
    pub p: u32,
    pub nu: f64,
}

impl BurgersConfig {
    pub fn new(p: u32, nu: f64) -> Self {
        Self { p, nu }
    }

    pub fn n(&self) -> usize {
        (1usize << self.p) - 1
    }

    pub fn n_t(&self) -> usize {
        1usize << (self.p + 1)
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n() + 1) as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_t() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 || self.p > 24 {
            return Err(RomError::Config(format!("grid exponent p = {} outside 3..=24", self.p)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(RomError::Config(format!("viscosity must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    /// Grid coordinates `x_i = i h`, `i = 1..=n`.
    pub fn grid(&self) -> Vec<f64> {
        let np1 = (self.n() + 1) as f64;
        (1..=self.n()).map(|i| i as f64 / np1).collect()
    }
}

/// `f(Q) = -dt * Q ∘ (D_x Q)` with centered differences and zero ghost values.
#[derive(Debug, Clone, Copy)]
pub struct BurgersConvection {
    n: usize,
    dt: f64,
    h: f64,
}

impl BurgersConvection {
    #[inline]
    fn component(&self, q: &[f64], i: usize) -> f64 {
        let left = if i > 0 { q[i - 1] } else { 0.0 };
        let right = if i + 1 < self.n { q[i + 1] } else { 0.0 };
        -self.dt * q[i] * (right - left) / (2.0 * self.h)
    }
}

impl Nonlinearity for BurgersConvection {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let scale = -self.dt / (2.0 * self.h);
        let n = self.n;
        if n == 1 {
            out[0] = 0.0;
            return;
        }
        out[0] = scale * x[0] * x[1];
        for i in 1..n - 1 {
            out[i] = scale * x[i] * (x[i + 1] - x[i - 1]);
        }
        out[n - 1] = scale * x[n - 1] * (-x[n - 2]);
    }

    fn eval_rows(&self, x: &[f64], rows: &[usize], out: &mut [f64]) {
        for (o, &r) in out.iter_mut().zip(rows) {
            *o = self.component(x, r);
        }
    }
}

/// Dirichlet Laplacian `(1, -2, 1) / h^2` on `n` interior points.
pub fn laplacian(n: usize, h: f64) -> CsrMatrix {
    let s = 1.0 / (h * h);
    CsrMatrix::tridiagonal(&vec![s; n - 1], &vec![-2.0 * s; n], &vec![s; n - 1])
}

/// Builds the Burgers problem. With `nonlinear == false` the convection term is
/// dropped, leaving the linear heat equation on the same grid.
pub fn build_burgers_with(cfg: &BurgersConfig, nonlinear: bool) -> Result<ModelProblem> {
    cfg.validate()?;
    let n = cfg.n();
    let dt = cfg.dt();
    let h = cfg.h();
    let identity = CsrMatrix::identity(n);
    let e = identity.add_scaled(1.0, &laplacian(n, h), -dt * cfg.nu);
    let c = DVector::from_element(n, 1.0 / n as f64);
    let (f, desc): (Arc<dyn Nonlinearity>, String) = if nonlinear {
        (
            Arc::new(BurgersConvection { n, dt, h }),
            format!("-dt Q∘(D_x Q), nu = {}", cfg.nu),
        )
    } else {
        (Arc::new(ZeroNonlinearity(n)), format!("linear heat, nu = {}", cfg.nu))
    };
    let system = DiscreteSystem::new(e, identity, DMatrix::zeros(n, 0), c, f, desc)?;
    let x0 = DVector::from_iterator(
        n,
        cfg.grid()
            .into_iter()
            .map(|x| if (0.1..=0.2).contains(&x) { 1.0 } else { 0.0 }),
    );
    Ok(ModelProblem {
        system,
        x0,
        input: no_input(),
        n_t: cfg.n_t(),
        t_final: 1.0,
    })
}

pub fn build_burgers(cfg: &BurgersConfig) -> Result<ModelProblem> {
    build_burgers_with(cfg, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitConfig {
    pub n_bar: usize,
    pub t_final: f64,
    pub n_t: usize,
    pub diode_slope: f64,
    /// Step time of the input current.
    pub switch_time: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            n_bar: 401,
            t_final: 10.0,
            n_t: 400,
            diode_slope: 40.0,
            switch_time: 3.0,
        }
    }
}

impl CircuitConfig {
    pub fn with_nodes(n_bar: usize) -> Self {
        Self {
            n_bar,
            ..Self::default()
        }
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_t as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bar < 2 {
            return Err(RomError::Config(format!("circuit needs at least 2 nodes, got {}", self.n_bar)));
        }
        if self.n_t == 0 || !(self.t_final > 0.0) {
            return Err(RomError::Config("circuit time grid must be nonempty".into()));
        }
        Ok(())
    }

    /// Diode current `g(v) = exp(slope v) - 1`.
    #[inline]
    pub fn diode(&self, v: f64) -> f64 {
        (self.diode_slope * v).exp_m1()
    }

    /// Nodal currents `G(v)` of the ladder.
    pub fn nodal_currents(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.nodal_currents_into(v, &mut out);
        out
    }

    fn nodal_currents_into(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        // branch currents through the diodes between consecutive nodes
        let mut prev = self.diode(v[0] - v[1]);
        out[0] = -self.diode(v[0]) - prev;
        for i in 1..n - 1 {
            let next = self.diode(v[i] - v[i + 1]);
            out[i] = prev - next;
            prev = next;
        }
        out[n - 1] = prev;
    }

    /// Jacobian of `G` at `v = 0`.
    pub fn linear_part(&self) -> CsrMatrix {
        let n = self.n_bar;
        let s = self.diode_slope;
        let mut diag = vec![-2.0 * s; n];
        diag[n - 1] = -s;
        CsrMatrix::tridiagonal(&vec![s; n - 1], &diag, &vec![s; n - 1])
    }

    /// `u(t) = 0` for `t <= switch_time`, `1` afterwards.
    pub fn step_input(&self, t: f64) -> f64 {
        if t <= self.switch_time {
            0.0
        } else {
            1.0
        }
    }
}

/// `dt * (G(v) - A_c v)`, the explicit part of the semi-implicit circuit step.
#[derive(Debug, Clone)]
pub struct CircuitNonlinearity {
    cfg: CircuitConfig,
    scale: f64,
}

impl CircuitNonlinearity {
    pub fn new(cfg: CircuitConfig, scale: f64) -> Self {
        Self { cfg, scale }
    }

    #[inline]
    fn g_remainder(&self, v: f64) -> f64 {
        // g(v) - g'(0) v
        self.cfg.diode(v) - self.cfg.diode_slope * v
    }

    #[inline]
    fn component(&self, v: &[f64], i: usize) -> f64 {
        let n = v.len();
        let val = if i == 0 {
            -self.g_remainder(v[0]) - self.g_remainder(v[0] - v[1])
        } else if i == n - 1 {
            self.g_remainder(v[n - 2] - v[n - 1])
        } else {
            self.g_remainder(v[i - 1] - v[i]) - self.g_remainder(v[i] - v[i + 1])
        };
        self.scale * val
    }
}

impl Nonlinearity for CircuitNonlinearity {
    fn dim(&self) -> usize {
        self.cfg.n_bar
    }

    fn eval_into(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        let mut prev = self.g_remainder(v[0] - v[1]);
        out[0] = self.scale * (-self.g_remainder(v[0]) - prev);
        for i in 1..n - 1 {
            let next = self.g_remainder(v[i] - v[i + 1]);
            out[i] = self.scale * (prev - next);
            prev = next;
        }
        out[n - 1] = self.scale * prev;
    }

    fn eval_rows(&self, v: &[f64], rows: &[usize], out: &mut [f64]) {
        for (o, &r) in out.iter_mut().zip(rows) {
            *o = self.component(v, r);
        }
    }
}

pub fn build_circuit(cfg: &CircuitConfig) -> Result<ModelProblem> {
    cfg.validate()?;
    let n = cfg.n_bar;
    let dt = cfg.dt();
    let identity = CsrMatrix::identity(n);
    let e = identity.add_scaled(1.0, &cfg.linear_part(), -dt);
    let mut b = DMatrix::zeros(n, 1);
    b[(0, 0)] = dt;
    let mut c = DVector::zeros(n);
    c[0] = 1.0;
    let system = DiscreteSystem::new(
        e,
        identity,
        b,
        c,
        Arc::new(CircuitNonlinearity::new(*cfg, dt)),
        format!("RC diode ladder, g(v) = exp({} v) - 1", cfg.diode_slope),
    )?;
    let signal = *cfg;
    Ok(ModelProblem {
        system,
        x0: DVector::zeros(n),
        input: Arc::new(move |t| DVector::from_element(1, signal.step_input(t))),
        n_t: cfg.n_t,
        t_final: cfg.t_final,
    })
}
