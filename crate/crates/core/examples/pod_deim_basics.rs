//! POD by the method of snapshots against a dense SVD, and DEIM on the
//! nonlinear snapshots of the same Burgers trajectory.

use hybrid_rom::deim::deim_select;
use hybrid_rom::hybrid::{run_fom, FomOptions};
use hybrid_rom::models::{build_burgers, BurgersConfig};
use hybrid_rom::pod::{max_principal_angle, orthonormality_defect, pod_mos};

fn main() -> hybrid_rom::Result<()> {
    let problem = build_burgers(&BurgersConfig::new(7, 1e-2))?;
    let fom = run_fom(
        &problem,
        FomOptions {
            n_t: None,
            collect_snapshots: true,
        },
    )?;
    let snaps = fom.snapshots.expect("requested");
    println!("snapshots: {} x {}", snaps.states.nrows(), snaps.states.ncols());

    // very low-energy trailing modes are where squaring the singular values
    // in the Gram matrix costs accuracy
    for energy_tol in [1e-4, 1e-8, 1e-12] {
        let pod = pod_mos(snaps.states.as_view(), energy_tol, usize::MAX)?;
        let r = pod.rank();
        let svd = snaps.states.clone().svd(true, false);
        // nalgebra sorts singular values in descending order
        let u = svd.u.expect("requested").columns(0, r).into_owned();
        println!(
            "energy_tol {energy_tol:.0e}: r = {r:2}, angle to SVD {:.1e}, orthonormality {:.1e}",
            max_principal_angle(pod.phi(), &u),
            orthonormality_defect(pod.phi())
        );
    }

    let f = &snaps.nonlinear;
    for ell in [4, 8, 16] {
        let op = deim_select(f.as_view(), ell)?;
        let mut worst: f64 = 0.0;
        let mut at_points: f64 = 0.0;
        for c in f.column_iter() {
            let c = c.into_owned();
            let approx = op.interpolate(&c)?;
            worst = worst.max((&approx - &c).norm() / c.norm().max(1e-300));
            for &p in op.points() {
                at_points = at_points.max((approx[p] - c[p]).abs());
            }
        }
        println!(
            "DEIM ell = {ell:2}: points {:?}, worst relative error {worst:.2e}, error at points {at_points:.1e}",
            &op.points()[..ell.min(6)]
        );
    }
    Ok(())
}
