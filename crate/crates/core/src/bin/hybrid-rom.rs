use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_rom::bench::{
    exit_code, run_experiment, table_sweep, DualChoice, ExperimentConfig, HifiChoice, Mode, ModelKind,
    SweepRanges,
};
use hybrid_rom::RomError;

#[derive(Parser)]
#[command(name = "hybrid-rom", version, about = "Hybrid FOM/ROM time integration experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full-order reference run
    Fom(Common),
    /// Hybrid run, compared against the full model unless --no-reference
    Hybrid(Common),
    /// POD of the full trajectory followed by a pure ROM run
    Rom(Common),
    /// POD-greedy over the viscosity training set
    Greedy(Common),
    /// Adaptive POD-greedy with DEIM
    GreedyDeim(Common),
    /// Hybrid runs over nu x w x tol
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated; an empty string gives an empty axis
        #[arg(long, value_parser = parse_list::<usize>)]
        w_list: Option<List<usize>>,
        #[arg(long, value_parser = parse_list::<f64>)]
        tol_list: Option<List<f64>>,
        #[arg(long, value_parser = parse_list::<f64>)]
        nu_list: Option<List<f64>>,
    },
}

/// Overrides on top of the defaults or `--config`.
#[derive(Args)]
struct Common {
    /// TOML config, e.g. a config.txt written by an earlier run
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    nu_lo: Option<f64>,
    #[arg(long)]
    nu_hi: Option<f64>,
    #[arg(long)]
    nu_count: Option<usize>,
    #[arg(long)]
    n_bar: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long)]
    energy_tol: Option<f64>,
    #[arg(long)]
    r_max: Option<usize>,
    #[arg(long)]
    deim: bool,
    #[arg(long, value_enum)]
    dual_mode: Option<DualChoice>,
    #[arg(long)]
    dual_dim: Option<usize>,
    #[arg(long, value_enum)]
    hifi: Option<HifiChoice>,
    #[arg(long)]
    hifi_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    validate_mu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_reference: bool,
    /// Record true one-step errors and effectivities of ROM attempts
    #[arg(long)]
    diagnostics: bool,
    #[arg(long)]
    save_snapshots: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct List<T>(Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry {t:?}")))
        .collect::<Result<_, _>>()
        .map(List)
}

macro_rules! set {
    ($cfg:ident, $args:ident, $($f:ident),*) => {
        $(if let Some(v) = $args.$f.clone() { $cfg.$f = v; })*
    };
}

impl Common {
    fn resolve(&self, mode: Mode) -> Result<ExperimentConfig, RomError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        set!(cfg, self, model, p, nu, nu_lo, nu_hi, nu_count, n_bar, w, tol, energy_tol, dual_mode, dual_dim);
        set!(cfg, self, hifi, hifi_tol, validate_mu, seed, out);
        if self.n_t.is_some() {
            cfg.n_t = self.n_t;
        }
        if self.r_max.is_some() {
            cfg.r_max = self.r_max;
        }
        if self.max_iter.is_some() {
            cfg.max_iter = self.max_iter;
        }
        cfg.deim |= self.deim;
        cfg.no_reference |= self.no_reference;
        cfg.diagnostics |= self.diagnostics;
        cfg.save_snapshots |= self.save_snapshots;
        if mode.is_greedy() && self.model.is_none() && self.config.is_none() {
            cfg.model = ModelKind::BurgersParam;
        }
        Ok(cfg)
    }
}

fn run(cmd: Cmd) -> Result<(), RomError> {
    let (common, mode) = match &cmd {
        Cmd::Fom(c) => (c, Mode::Fom),
        Cmd::Hybrid(c) => (c, Mode::Hybrid),
        Cmd::Rom(c) => (c, Mode::Rom),
        Cmd::Greedy(c) => (c, Mode::Greedy),
        Cmd::GreedyDeim(c) => (c, Mode::GreedyDeim),
        Cmd::Sweep { common, .. } => (common, Mode::Hybrid),
    };
    let cfg = common.resolve(mode)?;
    if let Cmd::Sweep {
        w_list,
        tol_list,
        nu_list,
        ..
    } = cmd
    {
        let ranges = SweepRanges {
            nu: nu_list.map_or(vec![cfg.nu], |l| l.0),
            w: w_list.map_or(vec![cfg.w], |l| l.0),
            tol: tol_list.map_or(vec![cfg.tol], |l| l.0),
        };
        let rows = table_sweep(&cfg, &ranges)?;
        let failed = rows.iter().filter(|r| r.status != "ok").count();
        println!(
            "{} cells, {failed} failed, table in {}",
            rows.len(),
            cfg.out.join("sweep.csv").display()
        );
        return Ok(());
    }
    let rep = run_experiment(&cfg)?;
    print!("{}", toml::to_string(&rep.metrics).unwrap_or_default());
    println!("# written to {}", rep.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
