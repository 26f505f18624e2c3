//! Greedy offline basis construction for parametric problems.
//!
//! [`pod_greedy`] enriches a global POD basis one vector per iteration from
//! the trajectory at the worst parameter. [`adaptive_pod_greedy_deim`] also
//! builds a DEIM operator and adapts how many POD and DEIM vectors are added
//! from the size of the estimated error relative to `tol`.
//!
//! The high-fidelity trajectories come either from the full-order model or
//! from the hybrid driver, in which case only the full-order steps are kept
//! as snapshots.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::deim::{deim_select, DeimOperator};
use crate::error::{Result, RomError};
use crate::estimate::{solve_dual_with, DualData, DualMode};
use crate::hybrid::{run_fom_with, run_hybrid_with, FomOptions, HybridConfig, SnapshotSet};
use crate::models::{build_burgers, build_burgers_with, BurgersConfig, ModelProblem};
use crate::pod::{compress_snapshots, deflated_modes, orthonormal_extend};
use crate::rom::Rom;

pub const POD_GREEDY_MAX_ITER: usize = 100;
pub const ADAPTIVE_MAX_ITER: usize = 50;
pub const DEFAULT_SEED: u64 = 1;
/// Column block used when compressing archived snapshot matrices.
pub const COMPRESS_BLOCK: usize = 64;

type Builder = dyn Fn(f64) -> Result<ModelProblem> + Send + Sync;

/// Parameter-to-problem map together with the training set `Θ`.
#[derive(Clone)]
pub struct ParametricFamily {
    builder: Arc<Builder>,
    pub theta: Vec<f64>,
    pub name: String,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .finish()
    }
}

impl ParametricFamily {
    pub fn new<F>(name: impl Into<String>, theta: Vec<f64>, builder: F) -> Self
    where
        F: Fn(f64) -> Result<ModelProblem> + Send + Sync + 'static,
    {
        Self {
            builder: Arc::new(builder),
            theta,
            name: name.into(),
        }
    }

    /// Burgers' equation on a `2^p - 1` grid with the viscosity as parameter.
    pub fn burgers(p: u32, theta: Vec<f64>) -> Self {
        Self::new(format!("burgers p={p}"), theta, move |nu| {
            build_burgers(&BurgersConfig::new(p, nu))
        })
    }

    /// Burgers' grid and data without the convection term (a heat equation).
    pub fn heat(p: u32, theta: Vec<f64>) -> Self {
        Self::new(format!("heat p={p}"), theta, move |nu| {
            build_burgers_with(&BurgersConfig::new(p, nu), false)
        })
    }

    pub fn problem(&self, mu: f64) -> Result<ModelProblem> {
        (self.builder)(mu)
    }

    fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(RomError::Config("training set is empty".into()));
        }
        if self.theta.iter().any(|m| !m.is_finite()) {
            return Err(RomError::Config("training set contains a non-finite parameter".into()));
        }
        Ok(())
    }
}

/// `count` values spaced evenly in `log10` between `lo` and `hi`, inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// High-fidelity solver used to generate snapshots.
#[derive(Debug, Clone, PartialEq)]
pub enum HifiSolver {
    Fom,
    Hybrid(HybridConfig),
}

impl HifiSolver {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Fom => "fom",
            Self::Hybrid(_) => "hybrid",
        }
    }
}

/// Which dual solution supplies `C_du(μ)` in the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualScope {
    /// One dual solve per training parameter, cached.
    PerParameter,
    /// The dual of the first training parameter is used for all of `Θ`.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyConfig {
    pub tol: f64,
    pub hifi: HifiSolver,
    pub seed: u64,
    /// `None` selects the algorithm's default cap.
    pub max_iter: Option<usize>,
    pub dual: DualScope,
}

impl GreedyConfig {
    pub fn new(tol: f64, hifi: HifiSolver) -> Self {
        Self {
            tol,
            hifi,
            seed: DEFAULT_SEED,
            max_iter: None,
            dual: DualScope::PerParameter,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(RomError::Config(format!("greedy tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(RomError::Config("iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Snapshots stored for one simulated training parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub mu: f64,
    pub snapshots: SnapshotSet,
    /// `U Σ` of the state snapshots.
    pub states_compressed: DMatrix<f64>,
    /// `U Σ` of the nonlinear snapshots.
    pub nonlinear_compressed: DMatrix<f64>,
    pub hifi_seconds: f64,
    pub fom_steps: usize,
}

/// Estimated trajectory error at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamEstimate {
    pub pod: f64,
    pub deim: f64,
}

impl ParamEstimate {
    pub fn total(&self) -> f64 {
        self.pod + self.deim
    }

    fn diverged() -> Self {
        Self {
            pod: f64::INFINITY,
            deim: f64::INFINITY,
        }
    }
}

/// One row of the greedy progress log.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyLogEntry {
    pub iteration: usize,
    /// Parameter whose trajectory enriched the basis in this iteration.
    pub mu_used: f64,
    /// `true` when a high-fidelity run happened, `false` for archived or removal steps.
    pub simulated: bool,
    /// Worst parameter after the update and its estimate.
    pub mu_star: f64,
    pub delta_bar: f64,
    pub delta_pod: f64,
    pub delta_deim: f64,
    pub ell_pod: i64,
    pub ell_deim: usize,
    pub pod_dim: usize,
    pub deim_dim: usize,
    pub hifi_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub phi: DMatrix<f64>,
    pub deim: Option<DeimOperator>,
    pub log: Vec<GreedyLogEntry>,
    pub archive: BTreeMap<usize, ArchiveEntry>,
    pub converged: bool,
    pub hifi: &'static str,
}

impl GreedyResult {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }

    pub fn hifi_runs(&self) -> usize {
        self.archive.len()
    }

    /// Wall-clock seconds of all high-fidelity simulations.
    pub fn hifi_seconds(&self) -> f64 {
        self.archive.values().map(|e| e.hifi_seconds).sum()
    }

    pub fn pod_dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn deim_dim(&self) -> usize {
        self.deim.as_ref().map_or(0, |d| d.len())
    }

    /// The progress log as whitespace-aligned text with a header line.
    pub fn log_text(&self) -> String {
        let mut s = String::from(
            "iteration mu_used simulated mu_star delta_bar delta_pod delta_deim ell_pod ell_deim pod_dim deim_dim hifi_seconds\n",
        );
        for e in &self.log {
            s.push_str(&format!(
                "{} {:.6e} {} {:.6e} {:.6e} {:.6e} {:.6e} {} {} {} {} {:.6}\n",
                e.iteration,
                e.mu_used,
                e.simulated as u8,
                e.mu_star,
                e.delta_bar,
                e.delta_pod,
                e.delta_deim,
                e.ell_pod,
                e.ell_deim,
                e.pod_dim,
                e.deim_dim,
                e.hifi_seconds
            ));
        }
        s
    }
}

/// Mutable state shared by both greedy algorithms.
struct GreedyState<'a> {
    family: &'a ParametricFamily,
    cfg: &'a GreedyConfig,
    archive: BTreeMap<usize, ArchiveEntry>,
    duals: Vec<Option<DualData>>,
}

impl<'a> GreedyState<'a> {
    fn new(family: &'a ParametricFamily, cfg: &'a GreedyConfig) -> Self {
        Self {
            family,
            cfg,
            archive: BTreeMap::new(),
            duals: vec![None; family.theta.len()],
        }
    }

    fn initial_index(&self) -> usize {
        ChaCha8Rng::seed_from_u64(self.cfg.seed).gen_range(0..self.family.theta.len())
    }

    /// Runs the high-fidelity solver at `Θ[idx]` unless it is archived.
    /// Returns whether a simulation happened.
    fn ensure_archived(&mut self, idx: usize) -> Result<bool> {
        if self.archive.contains_key(&idx) {
            return Ok(false);
        }
        let mu = self.family.theta[idx];
        let entry = simulate(self.family, mu, &self.cfg.hifi)?;
        info!(
            "{} run at mu = {mu:.6e}: {:.3} s, {} full-order steps",
            self.cfg.hifi.label(),
            entry.hifi_seconds,
            entry.fom_steps
        );
        self.archive.insert(idx, entry);
        Ok(true)
    }

    fn ensure_duals(&mut self) -> Result<()> {
        let needed: Vec<usize> = match self.cfg.dual {
            DualScope::PerParameter => (0..self.duals.len()).filter(|&i| self.duals[i].is_none()).collect(),
            DualScope::Single => {
                if self.duals[0].is_none() {
                    vec![0]
                } else {
                    Vec::new()
                }
            }
        };
        let family = self.family;
        let solved: Vec<(usize, Result<DualData>)> = needed
            .into_par_iter()
            .map(|i| (i, parameter_dual(family, family.theta[i])))
            .collect();
        for (i, d) in solved {
            self.duals[i] = Some(d?);
        }
        Ok(())
    }

    fn dual(&self, idx: usize) -> &DualData {
        let i = match self.cfg.dual {
            DualScope::PerParameter => idx,
            DualScope::Single => 0,
        };
        self.duals[i].as_ref().expect("duals solved before the sweep")
    }

    /// Estimates at every training parameter, in `Θ` order.
    fn sweep(&mut self, phi: &DMatrix<f64>, deim: Option<&DeimOperator>) -> Result<Vec<ParamEstimate>> {
        self.ensure_duals()?;
        let this = &*self;
        (0..this.family.theta.len())
            .into_par_iter()
            .map(|i| {
                let problem = this.family.problem(this.family.theta[i])?;
                estimate_with_dual(&problem, this.dual(i), phi, deim)
            })
            .collect()
    }

    /// DEIM operator of dimension at most `ell` from all archived `F`.
    fn rebuild_deim(&self, ell: usize) -> Result<DeimOperator> {
        let blocks: Vec<&DMatrix<f64>> = self.archive.values().map(|e| &e.nonlinear_compressed).collect();
        let n = blocks.first().map_or(0, |b| b.nrows());
        let total: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut f = DMatrix::zeros(n, total);
        let mut col = 0;
        for b in blocks {
            f.columns_mut(col, b.ncols()).copy_from(b);
            col += b.ncols();
        }
        match deim_select(f.as_view(), ell) {
            Err(RomError::RankDeficient { achievable, .. }) if achievable > 0 => {
                warn!("DEIM dimension clamped from {ell} to {achievable}");
                deim_select(f.as_view(), achievable)
            }
            other => other,
        }
    }
}

fn parameter_dual(family: &ParametricFamily, mu: f64) -> Result<DualData> {
    let problem = family.problem(mu)?;
    let handle = problem.system.factorize(false)?;
    solve_dual_with(&problem.system, &handle, &DualMode::Full)
}

/// Runs the configured high-fidelity solver at `mu` and archives its snapshots.
fn simulate(family: &ParametricFamily, mu: f64, hifi: &HifiSolver) -> Result<ArchiveEntry> {
    let problem = family.problem(mu)?;
    let handle = problem.system.factorize(false)?;
    let (trace, seconds) = match hifi {
        HifiSolver::Fom => {
            let t = run_fom_with(
                &problem,
                &handle,
                FomOptions {
                    n_t: None,
                    collect_snapshots: true,
                },
            )?;
            let s = t.wall_seconds;
            (t, s)
        }
        HifiSolver::Hybrid(cfg) => {
            let cfg = HybridConfig {
                collect_snapshots: true,
                diagnostics: false,
                ..cfg.clone()
            };
            let t = run_hybrid_with(&problem, &handle, &cfg)?;
            // the dual solve is part of the hybrid model's cost
            let s = t.wall_seconds + t.hybrid.as_ref().map_or(0.0, |h| h.setup_seconds);
            (t, s)
        }
    };
    let fom_steps = trace.fom_steps();
    let snapshots = trace.snapshots.expect("snapshot collection was requested");
    Ok(ArchiveEntry {
        mu,
        states_compressed: compress_snapshots(snapshots.states.as_view(), COMPRESS_BLOCK),
        nonlinear_compressed: compress_snapshots(snapshots.nonlinear.as_view(), COMPRESS_BLOCK),
        snapshots,
        hifi_seconds: seconds,
        fom_steps,
    })
}

/// `Δ̄(μ)` of the global ROM with basis `phi` and optional DEIM operator.
///
/// `Δ̄_POD` is the largest `C_du ||A x̂^k + f̂(x̂^k) + B u^k - E x̂^{k+1}||` over the
/// ROM trajectory, where `f̂` is the DEIM approximation when present, and
/// `Δ̄_DEIM` the largest `C_du ||f(x̂^k) - f̂(x̂^k)||`. A diverging trajectory
/// yields `+∞` for both.
pub fn param_error_estimate(
    family: &ParametricFamily,
    phi: &DMatrix<f64>,
    deim: Option<&DeimOperator>,
    mu: f64,
) -> Result<ParamEstimate> {
    let problem = family.problem(mu)?;
    let dual = parameter_dual(family, mu)?;
    estimate_with_dual(&problem, &dual, phi, deim)
}

fn estimate_with_dual(
    problem: &ModelProblem,
    dual: &DualData,
    phi: &DMatrix<f64>,
    deim: Option<&DeimOperator>,
) -> Result<ParamEstimate> {
    let sys = &problem.system;
    let rom = Rom::from_basis(sys, phi, deim.cloned())?;
    let n = sys.n();
    let mut x_r = rom.project(&problem.x0)?;
    let mut lifted = rom.lift(&x_r)?;
    let mut ex = DVector::zeros(n);
    let mut est = ParamEstimate { pod: 0.0, deim: 0.0 };
    for k in 0..problem.n_t {
        let u = (problem.input)(problem.time(k));
        let step = rom.advance_from(sys, &x_r, lifted, &u)?;
        let next_lifted = rom.lift(&step.next)?;
        let f_hat = match deim {
            Some(op) => op.interpolate(&step.f_lifted)?,
            None => step.f_lifted.clone(),
        };
        let mut r = sys.rhs_with_nonlinear(&step.lifted, &f_hat, &u)?;
        sys.e().mul_vec_into(next_lifted.as_slice(), ex.as_mut_slice());
        r -= &ex;
        let pod = dual.c_du * r.norm();
        let dei = if deim.is_some() {
            dual.c_du * (&step.f_lifted - &f_hat).norm()
        } else {
            0.0
        };
        if !(pod.is_finite() && dei.is_finite() && next_lifted.iter().all(|v| v.is_finite())) {
            return Ok(ParamEstimate::diverged());
        }
        est.pod = est.pod.max(pod);
        est.deim = est.deim.max(dei);
        x_r = step.next;
        lifted = next_lifted;
    }
    Ok(est)
}

/// First index of the largest total estimate. NaN counts as `+∞`.
fn argmax(estimates: &[ParamEstimate]) -> usize {
    let key = |e: &ParamEstimate| {
        let t = e.total();
        if t.is_nan() {
            f64::INFINITY
        } else {
            t
        }
    };
    let mut best = 0;
    for (i, e) in estimates.iter().enumerate() {
        if key(e) > key(&estimates[best]) {
            best = i;
        }
    }
    best
}

/// Appends up to `count` left singular vectors of `(I - Φ Φ^T) X_μ` to `phi`.
fn enrich(phi: &DMatrix<f64>, entry: &ArchiveEntry, count: usize) -> Result<DMatrix<f64>> {
    if count == 0 {
        return Ok(phi.clone());
    }
    match deflated_modes(phi, entry.states_compressed.as_view(), count) {
        Ok(u) => Ok(orthonormal_extend(phi, &u)),
        Err(RomError::EmptyWindow) => {
            warn!("snapshots at mu = {:.6e} add nothing to the basis", entry.mu);
            Ok(phi.clone())
        }
        Err(e) => Err(e),
    }
}

/// POD-greedy with one basis vector per iteration.
pub fn pod_greedy(family: &ParametricFamily, cfg: &GreedyConfig) -> Result<GreedyResult> {
    family.validate()?;
    cfg.validate()?;
    let max_iter = cfg.max_iter.unwrap_or(POD_GREEDY_MAX_ITER);
    let mut state = GreedyState::new(family, cfg);
    let n = family.problem(family.theta[0])?.system.n();
    let mut phi = DMatrix::zeros(n, 0);
    let mut mu_idx = state.initial_index();
    let mut log = Vec::new();
    let mut converged = false;

    for iteration in 1..=max_iter {
        let simulated = state.ensure_archived(mu_idx)?;
        phi = enrich(&phi, &state.archive[&mu_idx], 1)?;
        let estimates = state.sweep(&phi, None)?;
        let star = argmax(&estimates);
        let e = estimates[star];
        log.push(GreedyLogEntry {
            iteration,
            mu_used: family.theta[mu_idx],
            simulated,
            mu_star: family.theta[star],
            delta_bar: e.total(),
            delta_pod: e.pod,
            delta_deim: e.deim,
            ell_pod: 1,
            ell_deim: 0,
            pod_dim: phi.ncols(),
            deim_dim: 0,
            hifi_seconds: if simulated { state.archive[&mu_idx].hifi_seconds } else { 0.0 },
        });
        info!(
            "pod-greedy iteration {iteration}: dim {}, max estimate {:.3e} at mu = {:.6e}",
            phi.ncols(),
            e.total(),
            family.theta[star]
        );
        mu_idx = star;
        if e.total() <= cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("pod-greedy stopped at the iteration cap {max_iter}");
    }
    Ok(GreedyResult {
        phi,
        deim: None,
        log,
        archive: state.archive,
        converged,
        hifi: cfg.hifi.label(),
    })
}

/// `floor(log10(value / tol)) ± 1`, with `+1` when the total estimate exceeds
/// `tol`, `-1` when it is below `tol / 10`. The log term is clamped below at
/// `-floor` so that a zero estimate gives a finite increment.
fn increment(value: f64, total: f64, tol: f64, floor: i64) -> i64 {
    if value.is_nan() || value.is_infinite() {
        return floor.max(1) + 1;
    }
    let log_term = if value > 0.0 {
        ((value / tol).log10().floor() as i64).max(-floor)
    } else {
        -floor
    };
    let adjust = if total > tol {
        1
    } else if total < tol / 10.0 {
        -1
    } else {
        0
    };
    log_term + adjust
}

/// Adaptive POD-greedy-DEIM. `ℓ_POD` is the number of POD vectors added in
/// the next iteration (negative values remove trailing columns), `ℓ_DEIM`
/// the DEIM dimension. Stops when the worst estimate lies within
/// `[tol/10, tol]`.
pub fn adaptive_pod_greedy_deim(family: &ParametricFamily, cfg: &GreedyConfig) -> Result<GreedyResult> {
    family.validate()?;
    cfg.validate()?;
    let max_iter = cfg.max_iter.unwrap_or(ADAPTIVE_MAX_ITER);
    let mut state = GreedyState::new(family, cfg);
    state.ensure_duals()?;
    let n = family.problem(family.theta[0])?.system.n();
    let mut phi = DMatrix::zeros(n, 0);
    let mut deim: Option<DeimOperator> = None;
    let mut ell_pod: i64 = 1;
    let mut ell_deim: usize = 1;
    let mut mu_idx = state.initial_index();
    let mut log = Vec::new();
    let mut converged = false;

    for iteration in 1..=max_iter {
        let mut simulated = false;
        if ell_pod < 0 {
            let keep = phi.ncols().saturating_sub(ell_pod.unsigned_abs() as usize).max(1);
            phi = phi.columns(0, keep.min(phi.ncols())).into_owned();
        } else {
            simulated = state.ensure_archived(mu_idx)?;
            phi = enrich(&phi, &state.archive[&mu_idx], ell_pod as usize)?;
        }
        if phi.ncols() == 0 {
            return Err(RomError::Config("training trajectories are identically zero".into()));
        }
        let op = state.rebuild_deim(ell_deim)?;
        ell_deim = op.len();
        deim = Some(op);

        let estimates = state.sweep(&phi, deim.as_ref())?;
        let star = argmax(&estimates);
        let e = estimates[star];
        let total = e.total();
        log.push(GreedyLogEntry {
            iteration,
            mu_used: family.theta[mu_idx],
            simulated,
            mu_star: family.theta[star],
            delta_bar: total,
            delta_pod: e.pod,
            delta_deim: e.deim,
            ell_pod,
            ell_deim,
            pod_dim: phi.ncols(),
            deim_dim: ell_deim,
            hifi_seconds: if simulated { state.archive[&mu_idx].hifi_seconds } else { 0.0 },
        });
        info!(
            "adaptive greedy iteration {iteration}: dims ({}, {ell_deim}), estimate {total:.3e} (pod {:.3e}, deim {:.3e}) at mu = {:.6e}",
            phi.ncols(),
            e.pod,
            e.deim,
            family.theta[star]
        );
        mu_idx = star;
        if total >= cfg.tol / 10.0 && total <= cfg.tol {
            converged = true;
            break;
        }
        ell_pod += increment(e.pod, total, cfg.tol, phi.ncols() as i64);
        let deim_step = increment(e.deim, total, cfg.tol, ell_deim as i64);
        ell_deim = (ell_deim as i64 + deim_step).clamp(1, n as i64) as usize;
    }
    if !converged {
        warn!("adaptive greedy stopped at the iteration cap {max_iter}");
    }
    Ok(GreedyResult {
        phi,
        deim,
        log,
        archive: state.archive,
        converged,
        hifi: cfg.hifi.label(),
    })
}

/// Outputs of the global ROM and the full-order model at one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub mu: f64,
    pub y_rom: Vec<f64>,
    pub y_fom: Vec<f64>,
    pub max_error: f64,
    pub mean_error: f64,
}

pub fn validate_rom(
    family: &ParametricFamily,
    phi: &DMatrix<f64>,
    deim: Option<&DeimOperator>,
    mu: f64,
) -> Result<Validation> {
    let problem = family.problem(mu)?;
    let sys = &problem.system;
    let rom = Rom::from_basis(sys, phi, deim.cloned())?;
    let mut x_r = rom.project(&problem.x0)?;
    let mut y_rom = Vec::with_capacity(problem.n_t);
    for k in 0..problem.n_t {
        let u = (problem.input)(problem.time(k));
        x_r = rom.step(sys, &x_r, &u)?;
        y_rom.push(rom.reduced_output(&x_r)?);
    }
    let fom = run_fom_with(&problem, &sys.factorize(false)?, FomOptions::default())?;
    let y_fom = fom.outputs();
    let errors: Vec<f64> = y_rom.iter().zip(&y_fom).map(|(a, b)| (a - b).abs()).collect();
    // NaN outputs must not hide behind max()
    let max_error = errors
        .iter()
        .fold(0.0_f64, |m, &e| if e.is_nan() { f64::INFINITY } else { m.max(e) });
    let mean_error = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
    Ok(Validation {
        mu,
        y_rom,
        y_fom,
        max_error,
        mean_error,
    })
}
