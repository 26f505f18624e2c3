//! Runs an experiment from a TOML config and reads its files back.

use hybrid_rom::bench::{read_metrics, run_experiment, ExperimentConfig};
use hybrid_rom::io::{read_matrix, TraceFile};

fn main() -> hybrid_rom::Result<()> {
    let dir = std::env::temp_dir().join("hybrid-rom-files");
    let text = format!(
        "mode = \"hybrid\"\nmodel = \"circuit\"\nn_bar = 101\nw = 20\ntol = 1e-4\nsave_snapshots = true\nout = {:?}\n",
        dir.display().to_string()
    );
    let cfg = ExperimentConfig::from_toml(&text)?;
    run_experiment(&cfg)?;

    let (metrics, echo) = read_metrics(&dir.join("metrics.txt"))?;
    assert_eq!(echo, cfg);
    println!("N_f = {:?}, E_o = {:?}", metrics.n_f, metrics.e_o);

    let trace = TraceFile::read(&dir.join("trace.csv"))?;
    println!("trace columns {:?}, {} rows", trace.header(), trace.records.len());

    let states = read_matrix(&dir.join("snapshots/states.roms"))?;
    println!("FOM snapshots {} x {}", states.nrows(), states.ncols());

    // the echo alone reproduces the run
    let again = ExperimentConfig::load(&dir.join("config.txt"))?;
    assert_eq!(again, cfg);
    Ok(())
}
