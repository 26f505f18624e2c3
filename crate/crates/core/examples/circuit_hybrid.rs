//! RC diode ladder with a step input at t = 3. Before the switch the whole
//! state stays at rest and the ROM is zero-dimensional; afterwards the window
//! tracks the transient.

use hybrid_rom::hybrid::{compare_traces, run_fom_with, run_hybrid_with, FomOptions, HybridConfig, StepFlag};
use hybrid_rom::models::{build_circuit, CircuitConfig};

fn main() -> hybrid_rom::Result<()> {
    let cc = CircuitConfig::default();
    let problem = build_circuit(&cc)?;
    let handle = problem.system.factorize(false)?;
    let cfg = HybridConfig {
        diagnostics: true,
        ..HybridConfig::new(20, 1e-4)
    };
    let hybrid = run_hybrid_with(&problem, &handle, &cfg)?;
    let fom = run_fom_with(&problem, &handle, FomOptions::default())?;
    let m = compare_traces(&hybrid, &fom)?;

    let before: Vec<_> = hybrid.rows.iter().filter(|r| r.t <= cc.switch_time).collect();
    let max_delta = before.iter().map(|r| r.delta).fold(0.0, f64::max);
    let max_true = before.iter().filter_map(|r| r.true_error).fold(0.0, f64::max);
    println!("nodes {}, steps {}", cc.n_bar, problem.n_t);
    println!("N_f = {} (P_f = {:.1}%)", m.n_f, 100.0 * m.p_f);
    println!("t <= {}: max delta {max_delta:.2e}, max true error {max_true:.2e}", cc.switch_time);
    println!("E_o = {:.3e}, speedup t_f/t_h = {:.2}", m.e_o, m.speedup);

    let fom_after: Vec<usize> = hybrid
        .rows
        .iter()
        .filter(|r| r.k > cfg.w && r.flag == StepFlag::Fom)
        .map(|r| r.k)
        .collect();
    println!("FOM steps after warmup: {fom_after:?}");
    Ok(())
}
