//! Prints the flagged steps of every run of the UAV experiment.
//!
//! cargo run --release -p lds-cpd --example uav_flags -- [base_seed]

use lds_cpd::harness::{emit_table, run_experiment, ExperimentConfig};

fn main() -> lds_cpd::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2023);
    let cfg = ExperimentConfig::uav_defaults(seed);
    let report = run_experiment(&cfg)?;
    for cell in &report.cells {
        println!(
            "N={:<4} run={:<2} seed={:<6} flags={:?}",
            cell.window,
            cell.run,
            cell.seed,
            cell.report.flagged()
        );
    }
    print!("{}", emit_table(&report).text);
    Ok(())
}
