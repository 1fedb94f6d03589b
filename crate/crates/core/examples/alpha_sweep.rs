//! Sweeps the energy weight alpha against the initial friendly fraction and
//! writes sweep.csv through the experiment harness.
//!
//! cargo run --release --example alpha_sweep

use signet::experiment::{cmd_sweep, SweepCell};
use signet::experiment::{ExperimentConfig, NetworkSource, SweepAxes};

pub fn run_example(n: usize, steps: u64, points: usize) -> signet::Result<Vec<SweepCell>> {
    let axis: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let cfg = ExperimentConfig {
        network: NetworkSource::Complete { n },
        steps,
        sample_every: steps / 10,
        runs: 2,
        sweep: SweepAxes { alpha: axis.clone(), r0: axis, ..SweepAxes::default() },
        out: std::env::temp_dir().join("signet-alpha-sweep"),
        ..ExperimentConfig::default()
    };
    Ok(cmd_sweep(&cfg)?.0)
}

fn main() -> signet::Result<()> {
    let cells = run_example(60, 200_000, 5)?;
    println!("alpha    r0      rho_inf  E");
    for c in &cells {
        println!("{:<8.2} {:<7.2} {:<8.4} {:.4}", c.coords[0], c.coords[1], c.steady.rho, c.steady.e_total);
    }
    println!("csv in {}", std::env::temp_dir().join("signet-alpha-sweep").display());
    Ok(())
}
