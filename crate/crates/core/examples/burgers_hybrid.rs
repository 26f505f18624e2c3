//! Hybrid integration of viscous Burgers' equation against the full model.
//!
//! ```text
//! cargo run --release --example burgers_hybrid -- [p] [nu] [w] [tol]
//! ```

use std::env;

use hybrid_rom::hybrid::{compare_traces, run_fom_with, run_hybrid_with, FomOptions, HybridConfig, StepFlag};
use hybrid_rom::models::{build_burgers, BurgersConfig};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> hybrid_rom::Result<()> {
    let (p, nu, w, tol) = (arg(1, 10u32), arg(2, 1e-3), arg(3, 20usize), arg(4, 1e-4));
    let problem = build_burgers(&BurgersConfig::new(p, nu))?;
    let handle = problem.system.factorize(false)?;

    let hybrid = run_hybrid_with(&problem, &handle, &HybridConfig::new(w, tol))?;
    let fom = run_fom_with(&problem, &handle, FomOptions::default())?;
    let m = compare_traces(&hybrid, &fom)?;

    println!("n = {}, n_t = {}, nu = {nu}, w = {w}, tol = {tol:e}", problem.system.n(), problem.n_t);
    println!("E_o       {:.3e}", m.e_o);
    println!("max error {:.3e}", m.max_error);
    println!("N_f       {} ({:.1}%)", m.n_f, 100.0 * m.p_f);
    println!("t_h / t_f {:.4}s / {:.4}s", m.t_h, m.t_f);
    if let Some(st) = &hybrid.hybrid {
        println!("rebuilds  {} (max rank {}), C_du = {:.3e}", st.rom_builds, st.max_rank, st.c_du);
    }

    // where the FOM had to step in after warmup
    let rejected: Vec<usize> = hybrid
        .rows
        .iter()
        .filter(|r| r.k > w && r.flag == StepFlag::Fom)
        .map(|r| r.k)
        .take(12)
        .collect();
    println!("first rejected steps: {rejected:?}");
    Ok(())
}
