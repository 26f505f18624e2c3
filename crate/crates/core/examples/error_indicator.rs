//! The dual-based indicator on individual ROM attempts: the indicator, the
//! true one-step output error and the residual effectivity.

use hybrid_rom::estimate::{effectivity_rho, error_indicator, solve_dual, true_step_error, DualMode};
use hybrid_rom::hybrid::{run_fom, FomOptions};
use hybrid_rom::models::{build_burgers, BurgersConfig};
use hybrid_rom::pod::pod_mos;
use hybrid_rom::rom::Rom;

fn main() -> hybrid_rom::Result<()> {
    let problem = build_burgers(&BurgersConfig::new(8, 5e-3))?;
    let sys = &problem.system;
    let handle = sys.factorize(false)?;
    let dual = solve_dual(sys, &DualMode::Full)?;
    println!(
        "||x_du|| = {:.3e}, ||r_du|| = {:.1e}, ||E^-1|| ~ {:.4}, C_du = {:.4e}",
        dual.x_du_hat.norm(),
        dual.r_du_norm,
        dual.inv_norm.value,
        dual.c_du
    );

    let fom = run_fom(
        &problem,
        FomOptions {
            n_t: Some(60),
            collect_snapshots: true,
        },
    )?;
    let s = fom.snapshots.expect("requested").states;
    // window of the last 20 states, then try the ROM on the next one
    let window = s.columns(s.ncols() - 20, 20);
    println!("{:>6} {:>4} {:>11} {:>11} {:>8}", "energy", "r", "delta", "true err", "rho");
    for energy_tol in [1e-4, 1e-6, 1e-8, 1e-10] {
        let basis = pod_mos(window, energy_tol, usize::MAX)?;
        let rom = Rom::from_basis(sys, basis.phi(), None)?;
        let x = s.column(s.ncols() - 1).into_owned();
        let u = (problem.input)(problem.time(60));
        let x_r = rom.project(&x)?;
        let step = rom.advance(sys, &x_r, &u)?;
        let r = rom.residual_from_step(sys, &x_r, &step, &u);
        let x_next = rom.lift(&step.next)?;
        let delta = error_indicator(&dual, r.norm());
        let truth = true_step_error(sys, &handle, &rom, &x, &u)?;
        let rho = effectivity_rho(sys, &x, &step.lifted, &x_next, &u)?;
        println!("{energy_tol:>6.0e} {:>4} {delta:>11.3e} {truth:>11.3e} {rho:>8.3}", rom.rank());
    }
    Ok(())
}
