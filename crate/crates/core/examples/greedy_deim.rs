//! Offline basis generation over a viscosity training set, once with
//! full-order snapshots and once with hybrid snapshots.
//!
//! ```text
//! cargo run --release --example greedy_deim -- [p] [tol]
//! ```

use std::env;

use hybrid_rom::greedy::{adaptive_pod_greedy_deim, log_spaced, validate_rom, GreedyConfig, HifiSolver, ParametricFamily};
use hybrid_rom::hybrid::HybridConfig;

fn main() -> hybrid_rom::Result<()> {
    let p: u32 = env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let tol: f64 = env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let family = ParametricFamily::burgers(p, log_spaced(0.005, 1.0, 20));

    for hifi in [HifiSolver::Fom, HifiSolver::Hybrid(HybridConfig::new(20, tol / 10.0))] {
        let res = adaptive_pod_greedy_deim(&family, &GreedyConfig::new(tol, hifi))?;
        println!("== {} snapshots ==", res.hifi);
        print!("{}", res.log_text());
        let v = validate_rom(&family, &res.phi, res.deim.as_ref(), 0.005)?;
        println!(
            "(POD, DEIM) = ({}, {}), {} high-fidelity runs, {:.3}s, converged {}",
            res.pod_dim(),
            res.deim_dim(),
            res.hifi_runs(),
            res.hifi_seconds(),
            res.converged
        );
        println!("nu = 0.005: max output error {:.2e}, mean {:.2e}\n", v.max_error, v.mean_error);
    }
    Ok(())
}
