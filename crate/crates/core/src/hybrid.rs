//! FOM/ROM hybrid time integration.
//!
//! After `w` full-order warmup steps every step is first attempted with a POD
//! ROM built from the sliding window. The step is accepted when the dual
//! indicator `Δ^{k+1}` is at most `tol`; otherwise the full-order model redoes
//! it and the ROM is rebuilt from the updated window.

use std::time::Instant;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::deim::{deim_select, DeimOperator};
use crate::error::{Result, RomError};
use crate::estimate::{
    error_indicator, krylov_dual_basis, solve_dual_with, DualData, DualMode, FOM_STEP_DELTA,
};
use crate::models::ModelProblem;
use crate::pod::{pod_mos_with_gram, DEFAULT_ENERGY_TOL};
use crate::rom::{Rom, RomStep};
use crate::system::{DiscreteSystem, LinearSolveHandle};
use crate::window::SnapshotWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepFlag {
    /// ROM step accepted.
    Rom = 1,
    /// Full-order step (warmup or rejected ROM step).
    Fom = 2,
}

impl StepFlag {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Self::Rom),
            2 => Some(Self::Fom),
            _ => None,
        }
    }
}

/// How the hybrid driver approximates the dual solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStrategy {
    Full,
    /// Galerkin dual in a Krylov space of `E^T` of the given dimension.
    Reduced { dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub w: usize,
    pub tol: f64,
    /// Overrides the problem's step count when set.
    pub n_t: Option<usize>,
    pub energy_tol: f64,
    pub r_max: usize,
    pub use_deim: bool,
    pub dual: DualStrategy,
    /// Record true one-step error and `ρ` for ROM attempts (excluded from timing).
    pub diagnostics: bool,
    /// Keep the FOM-computed states and their `f` values.
    pub collect_snapshots: bool,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            w: 20,
            tol: 1e-4,
            n_t: None,
            energy_tol: DEFAULT_ENERGY_TOL,
            r_max: usize::MAX,
            use_deim: false,
            dual: DualStrategy::Full,
            diagnostics: false,
            collect_snapshots: false,
        }
    }
}

impl HybridConfig {
    pub fn new(w: usize, tol: f64) -> Self {
        Self {
            w,
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self, n_t: usize) -> Result<()> {
        if self.w < 2 {
            return Err(RomError::Config(format!("window width must be >= 2, got {}", self.w)));
        }
        if self.w >= n_t {
            return Err(RomError::Config(format!(
                "window width {} must be below the step count {n_t}",
                self.w
            )));
        }
        if self.tol.is_nan() {
            return Err(RomError::Config("tolerance is NaN".into()));
        }
        if !(self.energy_tol >= 0.0 && self.energy_tol < 1.0) {
            return Err(RomError::Config(format!(
                "energy tolerance must lie in [0, 1), got {}",
                self.energy_tol
            )));
        }
        if self.r_max == 0 {
            return Err(RomError::Config("r_max must be positive".into()));
        }
        if let DualStrategy::Reduced { dim } = self.dual {
            if dim == 0 {
                return Err(RomError::Config("reduced dual dimension must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub t: f64,
    pub flag: StepFlag,
    pub delta: f64,
    pub y: f64,
    pub true_error: Option<f64>,
    pub rho: Option<f64>,
}

/// States computed by the full-order model during a run, with `f` at each.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub steps: Vec<usize>,
    pub states: DMatrix<f64>,
    pub nonlinear: DMatrix<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HybridStats {
    pub rom_builds: usize,
    pub rom_build_failures: usize,
    pub max_rank: usize,
    pub c_du: f64,
    pub setup_seconds: f64,
    pub diagnostics_seconds: f64,
}

/// Per-step record of a run. FOM reference runs use the same type with every
/// flag set to [`StepFlag::Fom`] and no hybrid statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Rows for steps `1..=n_t`.
    pub rows: Vec<TraceRow>,
    /// Wall-clock seconds spent in the stepping loop.
    pub wall_seconds: f64,
    pub final_state: DVector<f64>,
    pub snapshots: Option<SnapshotSet>,
    pub hybrid: Option<HybridStats>,
}

pub type HybridTrace = Trace;

impl Trace {
    pub fn n_t(&self) -> usize {
        self.rows.len()
    }

    /// `N_f`, warmup included.
    pub fn fom_steps(&self) -> usize {
        self.rows.iter().filter(|r| r.flag == StepFlag::Fom).count()
    }

    /// `P_f = N_f / n_t`.
    pub fn fom_fraction(&self) -> f64 {
        self.fom_steps() as f64 / self.n_t().max(1) as f64
    }

    pub fn outputs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.y).collect()
    }
}

#[derive(Default)]
struct SnapshotCollector {
    steps: Vec<usize>,
    states: Vec<DVector<f64>>,
    nonlinear: Vec<DVector<f64>>,
}

impl SnapshotCollector {
    fn push(&mut self, k: usize, x: &DVector<f64>, fx: DVector<f64>) {
        self.steps.push(k);
        self.states.push(x.clone());
        self.nonlinear.push(fx);
    }

    fn finish(self, n: usize) -> SnapshotSet {
        let cols = |v: &[DVector<f64>]| {
            if v.is_empty() {
                DMatrix::zeros(n, 0)
            } else {
                DMatrix::from_columns(v)
            }
        };
        SnapshotSet {
            states: cols(&self.states),
            nonlinear: cols(&self.nonlinear),
            steps: self.steps,
        }
    }
}

fn check_finite(x: &DVector<f64>, step: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RomError::Divergence { step })
    }
}

/// Options for [`run_fom`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FomOptions {
    pub n_t: Option<usize>,
    pub collect_snapshots: bool,
}

/// Full-order trajectory with a fresh factorization of `E`.
pub fn run_fom(problem: &ModelProblem, opts: FomOptions) -> Result<Trace> {
    let handle = problem.system.factorize(false)?;
    run_fom_with(problem, &handle, opts)
}

pub fn run_fom_with(
    problem: &ModelProblem,
    handle: &LinearSolveHandle,
    opts: FomOptions,
) -> Result<Trace> {
    let sys = &problem.system;
    let n_t = opts.n_t.unwrap_or(problem.n_t);
    let mut rows = Vec::with_capacity(n_t);
    let mut collector = opts.collect_snapshots.then(SnapshotCollector::default);
    let mut x = problem.x0.clone();
    if let Some(c) = collector.as_mut() {
        c.push(0, &x, sys.eval_f(&x));
    }
    let start = Instant::now();
    for k in 0..n_t {
        let u = (problem.input)(problem.time(k));
        x = sys.step_fom(handle, &x, &u)?;
        check_finite(&x, k + 1)?;
        rows.push(TraceRow {
            k: k + 1,
            t: problem.time(k + 1),
            flag: StepFlag::Fom,
            delta: FOM_STEP_DELTA,
            y: sys.output(&x)?,
            true_error: None,
            rho: None,
        });
        if let Some(c) = collector.as_mut() {
            c.push(k + 1, &x, sys.eval_f(&x));
        }
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(Trace {
        rows,
        wall_seconds,
        final_state: x,
        snapshots: collector.map(|c| c.finish(sys.n())),
        hybrid: None,
    })
}

/// Dual data for the configured strategy.
pub fn hybrid_dual(
    system: &DiscreteSystem,
    handle: &LinearSolveHandle,
    strategy: DualStrategy,
) -> Result<DualData> {
    let mode = match strategy {
        DualStrategy::Full => DualMode::Full,
        DualStrategy::Reduced { dim } => DualMode::Reduced(krylov_dual_basis(system, dim)?),
    };
    solve_dual_with(system, handle, &mode)
}

/// Builds the window ROM. A window without nonzero content yields the
/// zero-dimensional ROM, whose prediction is the zero state.
fn build_rom(
    system: &DiscreteSystem,
    window: &mut SnapshotWindow,
    cfg: &HybridConfig,
) -> Result<Rom> {
    let gram = window.gram().into_owned();
    let basis = match pod_mos_with_gram(window.storage_states(), gram.as_view(), cfg.energy_tol, cfg.r_max) {
        Ok(b) => b,
        Err(RomError::EmptyWindow) => return Ok(Rom::empty(system)),
        Err(e) => return Err(e),
    };
    let deim = match window.storage_nonlinear() {
        Some(f) if cfg.use_deim => Some(select_window_deim(f, basis.rank())?),
        _ => None,
    };
    Rom::from_window(system, &basis, window, deim)
}

fn select_window_deim(f: nalgebra::DMatrixView<'_, f64>, ell: usize) -> Result<DeimOperator> {
    match deim_select(f, ell) {
        Err(RomError::RankDeficient { achievable, .. }) if achievable > 0 => {
            deim_select(f, achievable)
        }
        other => other,
    }
}

struct Workspace {
    e_next: DVector<f64>,
    a_next: DVector<f64>,
}

/// Hybrid FOM/ROM integration of `problem` with a fresh factorization of `E`.
pub fn run_hybrid(problem: &ModelProblem, cfg: &HybridConfig) -> Result<HybridTrace> {
    let handle = problem.system.factorize(false)?;
    run_hybrid_with(problem, &handle, cfg)
}

pub fn run_hybrid_with(
    problem: &ModelProblem,
    handle: &LinearSolveHandle,
    cfg: &HybridConfig,
) -> Result<HybridTrace> {
    let sys = &problem.system;
    let n = sys.n();
    let n_t = cfg.n_t.unwrap_or(problem.n_t);
    cfg.validate(n_t)?;

    let setup = Instant::now();
    let dual = hybrid_dual(sys, handle, cfg.dual)?;
    let mut stats = HybridStats {
        c_du: dual.c_du,
        setup_seconds: setup.elapsed().as_secs_f64(),
        ..HybridStats::default()
    };
    debug!(
        "dual: C_du = {:.6e}, ||E^-1|| ~ {:.6e} ({} iterations)",
        dual.c_du, dual.inv_norm.value, dual.inv_norm.iterations
    );

    let mut window = SnapshotWindow::new(n, cfg.w)?;
    if cfg.use_deim {
        window = window.with_nonlinear_snapshots();
    }
    let mut collector = cfg.collect_snapshots.then(SnapshotCollector::default);
    let mut rows = Vec::with_capacity(n_t);
    let mut ws = Workspace {
        e_next: DVector::zeros(n),
        a_next: DVector::zeros(n),
    };
    let mut x = problem.x0.clone();
    if let Some(c) = collector.as_mut() {
        c.push(0, &x, sys.eval_f(&x));
    }
    let mut rom: Option<Rom> = None;
    // reduced coordinates of x after an accepted step (the ROM is unchanged then)
    let mut carried: Option<DVector<f64>> = None;
    let mut diag_seconds = 0.0;
    let mut f_zero: Option<DVector<f64>> = None;

    let start = Instant::now();
    for k in 0..n_t {
        let u = (problem.input)(problem.time(k));
        let mut accepted: Option<(DVector<f64>, DVector<f64>, f64)> = None;
        // f(x^k) from a rejected attempt whose lifted state is exactly x^k
        let mut known_f: Option<DVector<f64>> = None;
        let mut true_error = None;
        let mut rho = None;

        if let (true, Some(rom)) = (k >= cfg.w, rom.as_ref()) {
            let (x_r, lifted, exact) = match carried.take() {
                Some(x_r) => (x_r, x.clone(), true),
                None => {
                    let x_r = rom.project(&x)?;
                    let lifted = rom.lift(&x_r)?;
                    (x_r, lifted, false)
                }
            };
            // r̂ = A x̂^k + f(x̂^k) + B u^k - E x̂^{k+1}
            let (step, x_next, r_hat) = if rom.rank() == 0 {
                // x̂^k = x̂^{k+1} = 0, so only f(0) + B u^k remains
                let f0 = f_zero.get_or_insert_with(|| sys.eval_f(&DVector::zeros(n)));
                let mut r_hat = f0.clone();
                if sys.m() > 0 {
                    r_hat.gemv(1.0, sys.b(), &u, 1.0);
                }
                ws.e_next.fill(0.0);
                let step = RomStep {
                    next: DVector::zeros(0),
                    lifted: DVector::zeros(n),
                    f_lifted: f0.clone(),
                };
                (step, DVector::zeros(n), r_hat)
            } else {
                let step = rom.advance_from(sys, &x_r, lifted, &u)?;
                let x_next = rom.lift(&step.next)?;
                let mut r_hat = sys.rhs_with_nonlinear(&step.lifted, &step.f_lifted, &u)?;
                sys.e().mul_vec_into(x_next.as_slice(), ws.e_next.as_mut_slice());
                r_hat -= &ws.e_next;
                (step, x_next, r_hat)
            };
            let residual_norm = r_hat.norm();
            let delta = error_indicator(&dual, residual_norm);
            if cfg.diagnostics {
                let t0 = Instant::now();
                let (te, rh) = step_diagnostics(sys, handle, rom, &x, &step, &x_next, &u, residual_norm)?;
                true_error = Some(te);
                rho = Some(rh);
                diag_seconds += t0.elapsed().as_secs_f64();
            }
            if delta <= cfg.tol {
                accepted = Some((step.next, x_next, delta));
            } else if exact {
                known_f = Some(step.f_lifted);
            }
        }

        let flag = match accepted {
            Some((next, x_next, delta)) => {
                x = x_next;
                // ws.e_next already holds E x̂^{k+1}. Window images come from
                // sparse products rather than EΦ x_r: EΦ = S_E K inherits any
                // error in S_E amplified by ||K||, and feeding it back into the
                // window compounds over rebuilds.
                if next.is_empty() {
                    ws.a_next.fill(0.0);
                } else {
                    sys.apply_a_into(x.as_slice(), ws.a_next.as_mut_slice());
                }
                push_window(&mut window, sys, &x, &ws)?;
                carried = Some(next);
                rows.push(TraceRow {
                    k: k + 1,
                    t: problem.time(k + 1),
                    flag: StepFlag::Rom,
                    delta,
                    y: sys.output(&x)?,
                    true_error,
                    rho,
                });
                StepFlag::Rom
            }
            None => {
                x = match known_f {
                    Some(fx) => sys.step_fom_with_nonlinear(handle, &x, &fx, &u)?,
                    None => sys.step_fom(handle, &x, &u)?,
                };
                check_finite(&x, k + 1)?;
                sys.e().mul_vec_into(x.as_slice(), ws.e_next.as_mut_slice());
                sys.apply_a_into(x.as_slice(), ws.a_next.as_mut_slice());
                push_window(&mut window, sys, &x, &ws)?;
                if let Some(c) = collector.as_mut() {
                    c.push(k + 1, &x, sys.eval_f(&x));
                }
                rows.push(TraceRow {
                    k: k + 1,
                    t: problem.time(k + 1),
                    flag: StepFlag::Fom,
                    delta: FOM_STEP_DELTA,
                    y: sys.output(&x)?,
                    true_error,
                    rho,
                });
                StepFlag::Fom
            }
        };

        if flag == StepFlag::Fom && k + 1 >= cfg.w {
            match build_rom(sys, &mut window, cfg) {
                Ok(r) => {
                    stats.rom_builds += 1;
                    stats.max_rank = stats.max_rank.max(r.rank());
                    rom = Some(r);
                }
                Err(e) => {
                    warn!("ROM assembly failed after step {}: {e}; next step uses the FOM", k + 1);
                    stats.rom_build_failures += 1;
                    rom = None;
                }
            }
        }
    }
    let wall_seconds = (start.elapsed().as_secs_f64() - diag_seconds).max(0.0);
    stats.diagnostics_seconds = diag_seconds;

    Ok(Trace {
        rows,
        wall_seconds,
        final_state: x,
        snapshots: collector.map(|c| c.finish(n)),
        hybrid: Some(stats),
    })
}

fn push_window(
    window: &mut SnapshotWindow,
    sys: &DiscreteSystem,
    x: &DVector<f64>,
    ws: &Workspace,
) -> Result<()> {
    if window.tracks_nonlinear() {
        window.push_with_nonlinear(x, &ws.e_next, &ws.a_next, &sys.eval_f(x))
    } else {
        window.push(x, &ws.e_next, &ws.a_next)
    }
}

/// True one-step output error of the ROM candidate and the effectivity `ρ`.
#[allow(clippy::too_many_arguments)]
fn step_diagnostics(
    sys: &DiscreteSystem,
    handle: &LinearSolveHandle,
    rom: &Rom,
    x: &DVector<f64>,
    step: &RomStep,
    x_next: &DVector<f64>,
    u: &DVector<f64>,
    reduced_norm: f64,
) -> Result<(f64, f64)> {
    let fom = sys.step_fom(handle, x, u)?;
    let y_rom = rom.reduced_output(&step.next)?;
    let true_error = (sys.output(&fom)? - y_rom).abs();
    let r_pr = sys.rhs(x, u)? - sys.e().mul_vec(x_next)?;
    let rho = if reduced_norm == 0.0 {
        f64::NAN
    } else {
        r_pr.norm() / reduced_norm
    };
    Ok((true_error, rho))
}

/// Accuracy and cost of a hybrid run against a reference trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Mean absolute output error over steps `1..=n_t`.
    pub e_o: f64,
    pub max_error: f64,
    pub n_f: usize,
    pub n_t: usize,
    pub p_f: f64,
    pub t_h: f64,
    pub t_f: f64,
    /// `t_f / t_h`
    pub speedup: f64,
}

pub fn compare_traces(hybrid: &Trace, reference: &Trace) -> Result<Metrics> {
    if hybrid.rows.len() != reference.rows.len() {
        return Err(RomError::LengthMismatch(hybrid.rows.len(), reference.rows.len()));
    }
    let n_t = hybrid.rows.len();
    let mut sum = 0.0;
    let mut max_error: f64 = 0.0;
    for (h, r) in hybrid.rows.iter().zip(&reference.rows) {
        let e = (h.y - r.y).abs();
        sum += e;
        max_error = max_error.max(e);
    }
    let e_o = if n_t == 0 { 0.0 } else { sum / n_t as f64 };
    let speedup = if hybrid.wall_seconds > 0.0 {
        reference.wall_seconds / hybrid.wall_seconds
    } else {
        f64::INFINITY
    };
    Ok(Metrics {
        e_o,
        max_error,
        n_f: hybrid.fom_steps(),
        n_t,
        p_f: hybrid.fom_fraction(),
        t_h: hybrid.wall_seconds,
        t_f: reference.wall_seconds,
        speedup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_burgers, build_circuit, BurgersConfig, CircuitConfig};

    fn small_burgers() -> ModelProblem {
        build_burgers(&BurgersConfig::new(6, 1e-2)).unwrap()
    }

    #[test]
    fn fom_from_zero_stays_zero() {
        let mut prob = small_burgers();
        prob.x0 = DVector::zeros(prob.system.n());
        let tr = run_fom(&prob, FomOptions::default()).unwrap();
        assert!(tr.rows.iter().all(|r| r.y == 0.0));
        assert_eq!(tr.n_t(), prob.n_t);
    }

    #[test]
    fn fom_single_step_matches_step_fom() {
        let prob = small_burgers();
        let tr = run_fom(
            &prob,
            FomOptions {
                n_t: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let h = prob.system.factorize(false).unwrap();
        let x1 = prob.system.step_fom(&h, &prob.x0, &DVector::zeros(0)).unwrap();
        assert_eq!(tr.final_state, x1);
        assert_eq!(tr.rows[0].y, prob.system.output(&x1).unwrap());
    }

    #[test]
    fn circuit_output_zero_before_switch() {
        let prob = build_circuit(&CircuitConfig::with_nodes(21)).unwrap();
        let tr = run_fom(&prob, FomOptions::default()).unwrap();
        for r in &tr.rows {
            if r.t <= 3.0 {
                assert_eq!(r.y, 0.0);
            }
        }
        assert!(tr.rows.last().unwrap().y > 0.0);
    }

    #[test]
    fn negative_tol_reproduces_fom() {
        let prob = small_burgers();
        let fom = run_fom(&prob, FomOptions::default()).unwrap();
        let hyb = run_hybrid(&prob, &HybridConfig::new(10, -1.0)).unwrap();
        assert_eq!(hyb.fom_steps(), prob.n_t);
        for (a, b) in hyb.rows.iter().zip(&fom.rows) {
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        assert_eq!(hyb.final_state, fom.final_state);
    }

    #[test]
    fn infinite_tol_only_warmup() {
        let prob = small_burgers();
        let w = 10;
        let hyb = run_hybrid(&prob, &HybridConfig::new(w, f64::INFINITY)).unwrap();
        assert_eq!(hyb.fom_steps(), w);
        assert!((hyb.fom_fraction() - w as f64 / prob.n_t as f64).abs() < 1e-15);
    }

    #[test]
    fn accepted_steps_satisfy_tolerance() {
        let prob = small_burgers();
        let cfg = HybridConfig {
            diagnostics: true,
            ..HybridConfig::new(10, 1e-4)
        };
        let hyb = run_hybrid(&prob, &cfg).unwrap();
        assert!(hyb.fom_steps() >= 10);
        for r in &hyb.rows {
            match r.flag {
                StepFlag::Rom => assert!(r.delta <= cfg.tol),
                StepFlag::Fom => assert_eq!(r.delta, FOM_STEP_DELTA),
            }
        }
        for r in &hyb.rows[..10] {
            assert_eq!(r.flag, StepFlag::Fom);
        }
    }

    #[test]
    fn deim_and_reduced_dual_run() {
        let prob = small_burgers();
        for cfg in [
            HybridConfig {
                use_deim: true,
                ..HybridConfig::new(10, 1e-4)
            },
            HybridConfig {
                dual: DualStrategy::Reduced { dim: 10 },
                ..HybridConfig::new(10, 1e-4)
            },
        ] {
            let hyb = run_hybrid(&prob, &cfg).unwrap();
            assert!(hyb.rows.iter().all(|r| r.y.is_finite()));
            assert!(hyb.rows.iter().all(|r| r.flag == StepFlag::Fom || r.delta <= cfg.tol));
        }
    }

    #[test]
    fn config_validation() {
        let prob = small_burgers();
        assert!(run_hybrid(&prob, &HybridConfig::new(1, 1e-4)).is_err());
        assert!(run_hybrid(&prob, &HybridConfig::new(prob.n_t, 1e-4)).is_err());
        assert!(run_hybrid(&prob, &HybridConfig::new(10, f64::NAN)).is_err());
    }

    #[test]
    fn snapshot_collection_stores_fom_steps() {
        let prob = small_burgers();
        let cfg = HybridConfig {
            collect_snapshots: true,
            ..HybridConfig::new(10, 1e-4)
        };
        let hyb = run_hybrid(&prob, &cfg).unwrap();
        let snaps = hyb.snapshots.as_ref().unwrap();
        assert_eq!(snaps.steps.len(), hyb.fom_steps() + 1);
        assert_eq!(snaps.states.ncols(), snaps.steps.len());
        for (j, &k) in snaps.steps.iter().enumerate().skip(1) {
            assert_eq!(hyb.rows[k - 1].flag, StepFlag::Fom);
            let y = prob.system.output(&snaps.states.column(j).into_owned()).unwrap();
            assert_eq!(y, hyb.rows[k - 1].y);
        }
    }

    #[test]
    fn compare_cases() {
        let prob = small_burgers();
        let fom = run_fom(&prob, FomOptions::default()).unwrap();
        let m = compare_traces(&fom, &fom).unwrap();
        assert_eq!(m.e_o, 0.0);
        let mut shifted = fom.clone();
        for r in &mut shifted.rows {
            r.y += 1.0;
        }
        let m = compare_traces(&shifted, &fom).unwrap();
        assert!((m.e_o - 1.0).abs() < 1e-12);
        assert!((m.max_error - 1.0).abs() < 1e-12);
        let mut short = fom.clone();
        short.rows.pop();
        assert!(matches!(
            compare_traces(&short, &fom),
            Err(RomError::LengthMismatch(_, _))
        ));
    }
}
