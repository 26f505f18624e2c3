//! Experiment runner behind the command-line tool.
//!
//! Each run owns one output directory:
//!
//! ```text
//! <out>/config.txt    TOML echo of the ExperimentConfig, loadable with --config
//! <out>/metrics.txt   TOML: [metrics] then [config]
//! <out>/trace.csv
//! <out>/snapshots/    states.roms, nonlinear.roms, steps.txt (on request)
//! ```
//!
//! Greedy modes add `greedy_log.txt`, `phi.roms`, and with DEIM `phi_f.roms`
//! and `deim_points.txt`. Their `trace.csv` is the global ROM replayed at
//! `validate_mu` against the full model.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::deim::deim_select;
use crate::error::{Result, RomError};
use crate::estimate::error_indicator;
use crate::greedy::{
    adaptive_pod_greedy_deim, log_spaced, pod_greedy, validate_rom, DualScope, GreedyConfig, GreedyResult,
    HifiSolver, ParametricFamily,
};
use crate::hybrid::{
    compare_traces, hybrid_dual, run_fom_with, run_hybrid_with, DualStrategy, FomOptions, HybridConfig, Metrics,
    SnapshotSet, StepFlag, Trace, TraceRow,
};
use crate::io::{fmt_float, write_matrix, TraceFile, TraceRecord};
use crate::models::{build_burgers, build_circuit, BurgersConfig, CircuitConfig, ModelProblem};
use crate::pod::{pod_mos, DEFAULT_ENERGY_TOL};
use crate::rom::Rom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Burgers,
    /// Burgers with the viscosity as training parameter; required by greedy modes.
    BurgersParam,
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fom,
    Hybrid,
    /// POD of the whole FOM trajectory, then a pure ROM run.
    Rom,
    Greedy,
    GreedyDeim,
}

impl Mode {
    pub fn is_greedy(self) -> bool {
        matches!(self, Self::Greedy | Self::GreedyDeim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DualChoice {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HifiChoice {
    Fom,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub model: ModelKind,
    pub p: u32,
    pub nu: f64,
    /// Training set `nu_count` log-spaced values in `[nu_lo, nu_hi]`.
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub nu_count: usize,
    pub n_bar: usize,
    /// Step count override; the model default when absent.
    pub n_t: Option<usize>,
    pub w: usize,
    /// Hybrid acceptance tolerance, or the greedy target in greedy modes.
    pub tol: f64,
    pub energy_tol: f64,
    pub r_max: Option<usize>,
    pub deim: bool,
    pub dual_mode: DualChoice,
    pub dual_dim: usize,
    pub hifi: HifiChoice,
    /// Acceptance tolerance of the hybrid solver used inside greedy modes.
    pub hifi_tol: f64,
    pub max_iter: Option<usize>,
    pub validate_mu: f64,
    pub seed: u64,
    pub no_reference: bool,
    pub diagnostics: bool,
    pub save_snapshots: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Hybrid,
            model: ModelKind::Burgers,
            p: 10,
            nu: 1e-3,
            nu_lo: 0.005,
            nu_hi: 1.0,
            nu_count: 20,
            n_bar: 401,
            n_t: None,
            w: 20,
            tol: 1e-4,
            energy_tol: DEFAULT_ENERGY_TOL,
            r_max: None,
            deim: false,
            dual_mode: DualChoice::Full,
            dual_dim: 10,
            hifi: HifiChoice::Hybrid,
            hifi_tol: 1e-4,
            max_iter: None,
            validate_mu: 0.005,
            seed: 1,
            no_reference: false,
            diagnostics: false,
            save_snapshots: false,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RomError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all TOML-representable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RomError::Config(m));
        if self.mode.is_greedy() && self.model != ModelKind::BurgersParam {
            return bad(format!("{:?} mode needs --model burgers-param", self.mode));
        }
        if self.model == ModelKind::BurgersParam && !self.mode.is_greedy() && !(self.nu > 0.0) {
            return bad("viscosity must be positive".into());
        }
        if self.mode.is_greedy() {
            if !(self.nu_lo > 0.0 && self.nu_hi >= self.nu_lo) {
                return bad(format!("invalid training range [{}, {}]", self.nu_lo, self.nu_hi));
            }
            if self.nu_count == 0 {
                return bad("training set is empty".into());
            }
            if !(self.validate_mu > 0.0) {
                return bad("validation viscosity must be positive".into());
            }
        }
        if !(self.tol.is_finite() || self.tol == f64::INFINITY) {
            return bad(format!("invalid tolerance {}", self.tol));
        }
        if self.n_t == Some(0) {
            return bad("step count must be positive".into());
        }
        if self.r_max == Some(0) {
            return bad("r_max must be positive".into());
        }
        Ok(())
    }

    fn dual_strategy(&self) -> DualStrategy {
        match self.dual_mode {
            DualChoice::Full => DualStrategy::Full,
            DualChoice::Reduced => DualStrategy::Reduced { dim: self.dual_dim },
        }
    }

    /// The hybrid settings of this experiment.
    pub fn hybrid_config(&self) -> HybridConfig {
        HybridConfig {
            w: self.w,
            tol: self.tol,
            n_t: self.n_t,
            energy_tol: self.energy_tol,
            r_max: self.r_max.unwrap_or(usize::MAX),
            use_deim: self.deim,
            dual: self.dual_strategy(),
            diagnostics: self.diagnostics,
            collect_snapshots: self.save_snapshots,
        }
    }

    pub fn problem(&self) -> Result<ModelProblem> {
        let mut prob = match self.model {
            ModelKind::Burgers | ModelKind::BurgersParam => build_burgers(&BurgersConfig::new(self.p, self.nu))?,
            ModelKind::Circuit => {
                let mut c = CircuitConfig::with_nodes(self.n_bar);
                if let Some(n_t) = self.n_t {
                    c.n_t = n_t;
                }
                build_circuit(&c)?
            }
        };
        if let Some(n_t) = self.n_t {
            // Burgers keeps its step size, so the horizon scales with n_t
            if self.model != ModelKind::Circuit {
                prob.t_final = prob.dt() * n_t as f64;
                prob.n_t = n_t;
            }
        }
        Ok(prob)
    }

    pub fn family(&self) -> ParametricFamily {
        ParametricFamily::burgers(self.p, log_spaced(self.nu_lo, self.nu_hi, self.nu_count))
    }

    pub fn greedy_config(&self) -> GreedyConfig {
        let hifi = match self.hifi {
            HifiChoice::Fom => HifiSolver::Fom,
            HifiChoice::Hybrid => HifiSolver::Hybrid(HybridConfig {
                tol: self.hifi_tol,
                n_t: None,
                diagnostics: false,
                collect_snapshots: false,
                ..self.hybrid_config()
            }),
        };
        GreedyConfig {
            tol: self.tol,
            hifi,
            seed: self.seed,
            max_iter: self.max_iter,
            dual: DualScope::PerParameter,
        }
    }
}

/// Everything `metrics.txt` reports. Fields that do not apply to a mode are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: String,
    pub model: String,
    pub n: usize,
    pub n_t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_o: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_f: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setup_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rom_builds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_du: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pod_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deim_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hifi_runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hifi_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validate_mu: Option<f64>,
}

impl MetricsReport {
    fn absorb(&mut self, m: &Metrics) {
        self.e_o = Some(m.e_o);
        self.max_error = Some(m.max_error);
        self.n_f = Some(m.n_f);
        self.p_f = Some(m.p_f);
        self.t_h = Some(m.t_h);
        self.t_f = Some(m.t_f);
        self.speedup = Some(m.speedup);
    }
}

#[derive(Serialize, Deserialize)]
struct MetricsFile {
    metrics: MetricsReport,
    config: ExperimentConfig,
}

/// Parses a `metrics.txt` back into its two tables.
pub fn read_metrics(path: &Path) -> Result<(MetricsReport, ExperimentConfig)> {
    let f: MetricsFile = toml::from_str(&fs::read_to_string(path)?).map_err(|e| RomError::Format(e.to_string()))?;
    Ok((f.metrics, f.config))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub metrics: MetricsReport,
    pub trace: TraceFile,
    pub greedy: Option<GreedyResult>,
}

/// Process exit status for an error: 1 for configuration and file problems, 2 for numerical failures.
pub fn exit_code(err: &RomError) -> i32 {
    match err {
        RomError::Config(_) | RomError::Io(_) | RomError::Format(_) => 1,
        _ => 2,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.txt"), cfg.to_toml())?;
    let mut report = match cfg.mode {
        Mode::Fom => run_fom_mode(cfg)?,
        Mode::Hybrid => run_hybrid_mode(cfg)?,
        Mode::Rom => run_rom_mode(cfg)?,
        Mode::Greedy | Mode::GreedyDeim => run_greedy_mode(cfg)?,
    };
    report.metrics.mode = toml_name(&cfg.mode);
    report.metrics.model = toml_name(&cfg.model);
    report.trace.write(&cfg.out.join("trace.csv"))?;
    let file = MetricsFile {
        metrics: report.metrics.clone(),
        config: cfg.clone(),
    };
    let text = toml::to_string(&file).map_err(|e| RomError::Format(e.to_string()))?;
    fs::write(cfg.out.join("metrics.txt"), text)?;
    Ok(report)
}

fn toml_name<T: Serialize>(v: &T) -> String {
    #[derive(Serialize)]
    struct W<'a, T> {
        v: &'a T,
    }
    let s = toml::to_string(&W { v }).unwrap_or_default();
    s.trim().trim_start_matches("v = ").trim_matches('"').to_owned()
}

fn save_snapshots(dir: &Path, s: &SnapshotSet) -> Result<()> {
    let dir = dir.join("snapshots");
    fs::create_dir_all(&dir)?;
    write_matrix(&dir.join("states.roms"), &s.states)?;
    write_matrix(&dir.join("nonlinear.roms"), &s.nonlinear)?;
    let steps: Vec<String> = s.steps.iter().map(|k| k.to_string()).collect();
    fs::write(dir.join("steps.txt"), steps.join("\n") + "\n")?;
    Ok(())
}

fn base_report(cfg: &ExperimentConfig, prob: &ModelProblem, trace: TraceFile) -> RunReport {
    RunReport {
        out_dir: cfg.out.clone(),
        metrics: MetricsReport {
            n: prob.system.n(),
            n_t: prob.n_t,
            ..Default::default()
        },
        trace,
        greedy: None,
    }
}

fn run_fom_mode(cfg: &ExperimentConfig) -> Result<RunReport> {
    let prob = cfg.problem()?;
    let handle = prob.system.factorize(false)?;
    let fom = run_fom_with(
        &prob,
        &handle,
        FomOptions {
            n_t: None,
            collect_snapshots: cfg.save_snapshots,
        },
    )?;
    if let Some(s) = &fom.snapshots {
        save_snapshots(&cfg.out, s)?;
    }
    let mut rep = base_report(cfg, &prob, TraceFile::from_trace(&fom, None)?);
    rep.metrics.t_f = Some(fom.wall_seconds);
    rep.metrics.n_f = Some(fom.fom_steps());
    Ok(rep)
}

fn run_hybrid_mode(cfg: &ExperimentConfig) -> Result<RunReport> {
    let prob = cfg.problem()?;
    let handle = prob.system.factorize(false)?;
    let hy = run_hybrid_with(&prob, &handle, &cfg.hybrid_config())?;
    if let Some(s) = &hy.snapshots {
        save_snapshots(&cfg.out, s)?;
    }
    let reference = if cfg.no_reference {
        None
    } else {
        Some(run_fom_with(&prob, &handle, FomOptions::default())?)
    };
    let mut rep = base_report(cfg, &prob, TraceFile::from_trace(&hy, reference.as_ref())?);
    match &reference {
        Some(r) => rep.metrics.absorb(&compare_traces(&hy, r)?),
        None => {
            rep.metrics.n_f = Some(hy.fom_steps());
            rep.metrics.p_f = Some(hy.fom_fraction());
            rep.metrics.t_h = Some(hy.wall_seconds);
        }
    }
    if let Some(st) = &hy.hybrid {
        rep.metrics.setup_seconds = Some(st.setup_seconds);
        rep.metrics.rom_builds = Some(st.rom_builds);
        rep.metrics.max_rank = Some(st.max_rank);
        rep.metrics.c_du = Some(st.c_du);
    }
    Ok(rep)
}

/// POD of the full FOM trajectory (initial state included) and a pure ROM run
/// with the per-step indicator evaluated along the reduced trajectory.
fn run_rom_mode(cfg: &ExperimentConfig) -> Result<RunReport> {
    let prob = cfg.problem()?;
    let sys = &prob.system;
    let handle = sys.factorize(false)?;
    let fom = run_fom_with(
        &prob,
        &handle,
        FomOptions {
            n_t: None,
            collect_snapshots: true,
        },
    )?;
    let snaps = fom.snapshots.as_ref().expect("snapshots requested");
    if cfg.save_snapshots {
        save_snapshots(&cfg.out, snaps)?;
    }
    let r_max = cfg.r_max.unwrap_or(usize::MAX);
    let basis = pod_mos(snaps.states.as_view(), cfg.energy_tol, r_max)?;
    let deim = if cfg.deim {
        let ell = basis.rank();
        Some(match deim_select(snaps.nonlinear.as_view(), ell) {
            Err(RomError::RankDeficient { achievable, .. }) if achievable > 0 => {
                deim_select(snaps.nonlinear.as_view(), achievable)?
            }
            other => other?,
        })
    } else {
        None
    };
    let deim_dim = deim.as_ref().map(|d| d.len());
    let rom = Rom::from_basis(sys, basis.phi(), deim)?;
    let dual = hybrid_dual(sys, &handle, cfg.dual_strategy())?;

    let mut rows = Vec::with_capacity(prob.n_t);
    let mut x_r = rom.project(&prob.x0)?;
    let start = Instant::now();
    for k in 0..prob.n_t {
        let u = (prob.input)(prob.time(k));
        let step = rom.advance(sys, &x_r, &u)?;
        let r = rom.residual_from_step(sys, &x_r, &step, &u);
        x_r = step.next;
        if !x_r.iter().all(|v| v.is_finite()) {
            return Err(RomError::Divergence { step: k + 1 });
        }
        rows.push(TraceRow {
            k: k + 1,
            t: prob.time(k + 1),
            flag: StepFlag::Rom,
            delta: error_indicator(&dual, r.norm()),
            y: rom.reduced_output(&x_r)?,
            true_error: None,
            rho: None,
        });
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    let rom_trace = Trace {
        rows,
        wall_seconds,
        final_state: rom.lift(&x_r)?,
        snapshots: None,
        hybrid: None,
    };
    let mut rep = base_report(cfg, &prob, TraceFile::from_trace(&rom_trace, Some(&fom))?);
    rep.metrics.absorb(&compare_traces(&rom_trace, &fom)?);
    rep.metrics.pod_dim = Some(rom.rank());
    rep.metrics.deim_dim = deim_dim;
    rep.metrics.c_du = Some(dual.c_du);
    Ok(rep)
}

fn run_greedy_mode(cfg: &ExperimentConfig) -> Result<RunReport> {
    let family = cfg.family();
    let gcfg = cfg.greedy_config();
    let res = if cfg.mode == Mode::GreedyDeim {
        adaptive_pod_greedy_deim(&family, &gcfg)?
    } else {
        pod_greedy(&family, &gcfg)?
    };
    fs::write(cfg.out.join("greedy_log.txt"), res.log_text())?;
    write_matrix(&cfg.out.join("phi.roms"), &res.phi)?;
    if let Some(d) = &res.deim {
        write_matrix(&cfg.out.join("phi_f.roms"), d.basis())?;
        let pts: Vec<String> = d.points().iter().map(|p| p.to_string()).collect();
        fs::write(cfg.out.join("deim_points.txt"), pts.join("\n") + "\n")?;
    }
    if cfg.save_snapshots {
        let dir = cfg.out.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (i, e) in res.archive.values().enumerate() {
            write_matrix(&dir.join(format!("states_{i:02}.roms")), &e.snapshots.states)?;
            write_matrix(&dir.join(format!("nonlinear_{i:02}.roms")), &e.snapshots.nonlinear)?;
        }
    }
    let v = validate_rom(&family, &res.phi, res.deim.as_ref(), cfg.validate_mu)?;
    let prob = family.problem(cfg.validate_mu)?;
    let records = v
        .y_rom
        .iter()
        .zip(&v.y_fom)
        .enumerate()
        .map(|(i, (&y, &y_ref))| TraceRecord {
            k: i + 1,
            t: prob.time(i + 1),
            flag: StepFlag::Rom,
            delta: f64::NAN,
            y,
            y_ref: Some(y_ref),
            true_err: None,
            rho: None,
        })
        .collect();
    let mut rep = base_report(cfg, &prob, TraceFile { records });
    let m = &mut rep.metrics;
    m.e_o = Some(v.mean_error);
    m.max_error = Some(v.max_error);
    m.pod_dim = Some(res.pod_dim());
    m.deim_dim = Some(res.deim_dim());
    m.iterations = Some(res.iterations());
    m.hifi_runs = Some(res.hifi_runs());
    m.hifi_seconds = Some(res.hifi_seconds());
    m.converged = Some(res.converged);
    m.validate_mu = Some(cfg.validate_mu);
    rep.greedy = Some(res);
    Ok(rep)
}

/// Axes of a hybrid sweep; cells are the cartesian product `nu × w × tol`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRanges {
    pub nu: Vec<f64>,
    pub w: Vec<usize>,
    pub tol: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub w: usize,
    pub tol: f64,
    pub metrics: Option<Metrics>,
    /// `ok`, or the error of a failed cell.
    pub status: String,
}

pub const SWEEP_HEADER: [&str; 11] = ["nu", "w", "tol", "e_o", "max_error", "n_f", "p_f", "t_h", "t_f", "speedup", "status"];

/// Runs one hybrid experiment per cell under `base.out/<cell>/` and writes
/// `base.out/sweep.csv`. A failing cell is recorded and the sweep moves on.
pub fn table_sweep(base: &ExperimentConfig, ranges: &SweepRanges) -> Result<Vec<SweepRow>> {
    if base.mode != Mode::Hybrid {
        return Err(RomError::Config("sweeps run hybrid experiments only".into()));
    }
    fs::create_dir_all(&base.out)?;
    let mut rows = Vec::new();
    for &nu in &ranges.nu {
        for &w in &ranges.w {
            for &tol in &ranges.tol {
                let cfg = ExperimentConfig {
                    nu,
                    w,
                    tol,
                    no_reference: false,
                    out: base.out.join(format!("nu{nu:e}_w{w}_tol{tol:e}")),
                    ..base.clone()
                };
                let (metrics, status) = match run_experiment(&cfg) {
                    Ok(rep) => (metrics_of(&rep.metrics), "ok".to_owned()),
                    Err(e) => {
                        log::warn!("sweep cell nu={nu} w={w} tol={tol} failed: {e}");
                        (None, format!("error: {e}"))
                    }
                };
                rows.push(SweepRow {
                    nu,
                    w,
                    tol,
                    metrics,
                    status,
                });
            }
        }
    }
    write_sweep(&base.out.join("sweep.csv"), &rows)?;
    Ok(rows)
}

fn metrics_of(m: &MetricsReport) -> Option<Metrics> {
    Some(Metrics {
        e_o: m.e_o?,
        max_error: m.max_error?,
        n_f: m.n_f?,
        n_t: m.n_t,
        p_f: m.p_f?,
        t_h: m.t_h?,
        t_f: m.t_f?,
        speedup: m.speedup?,
    })
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| RomError::Io(e.to_string()))?;
    let io = |e: csv::Error| RomError::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for r in rows {
        let mut rec = vec![fmt_float(r.nu), r.w.to_string(), fmt_float(r.tol)];
        match &r.metrics {
            Some(m) => rec.extend([
                fmt_float(m.e_o),
                fmt_float(m.max_error),
                m.n_f.to_string(),
                fmt_float(m.p_f),
                fmt_float(m.t_h),
                fmt_float(m.t_f),
                fmt_float(m.speedup),
            ]),
            None => rec.extend(std::iter::repeat("NaN".to_owned()).take(7)),
        }
        rec.push(r.status.clone());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
