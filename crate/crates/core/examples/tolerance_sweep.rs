//! Window width by tolerance table on Burgers, written as sweep.csv.
//!
//! ```text
//! cargo run --release --example tolerance_sweep -- [out_dir]
//! ```

use std::path::PathBuf;

use hybrid_rom::bench::{table_sweep, ExperimentConfig, SweepRanges};

fn main() -> hybrid_rom::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hybrid-rom-sweep"));
    let base = ExperimentConfig {
        out: out.clone(),
        ..Default::default()
    };
    let ranges = SweepRanges {
        nu: vec![1e-3],
        w: vec![10, 20, 40],
        tol: vec![1e-3, 1e-4, 1e-5],
    };
    let rows = table_sweep(&base, &ranges)?;
    println!("{:>4} {:>7} {:>10} {:>7} {:>8}", "w", "tol", "E_o", "P_f", "t_h/t_f");
    for r in &rows {
        match &r.metrics {
            Some(m) => println!(
                "{:>4} {:>7.0e} {:>10.3e} {:>6.1}% {:>8.2}",
                r.w,
                r.tol,
                m.e_o,
                100.0 * m.p_f,
                m.t_h / m.t_f
            ),
            None => println!("{:>4} {:>7.0e} {}", r.w, r.tol, r.status),
        }
    }
    println!("table: {}", out.join("sweep.csv").display());
    Ok(())
}
