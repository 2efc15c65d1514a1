//! Optimizes the bandwidth split for one scenario and shows where the swarm
//! moved bandwidth relative to an equal split.
//!
//! ```bash
//! cargo run --release -p batchdenoise --example pso_bandwidth
//! ```

use batchdenoise::bandwidth::{equal_allocation, evaluate_allocation, pso_optimize, PsoParams};
use batchdenoise::experiments::{generate_scenario, ExperimentConfig, Interval};

fn main() -> batchdenoise::Result<()> {
    let config = ExperimentConfig { services: 8, deadline_range: Interval::new(1.0, 20.0), ..ExperimentConfig::default() };
    let scenario = generate_scenario(&config, 0)?;
    let params = PsoParams { iterations: 40, ..PsoParams::default() };

    let outcome = pso_optimize(&scenario, &params)?;
    let equal = equal_allocation(scenario.len(), scenario.total_bandwidth);
    println!("equal split mean FID {:.4}", evaluate_allocation(&scenario, &equal)?);
    println!("PSO mean FID         {:.4}\n", outcome.mean_quality);

    println!("{:>3} {:>9} {:>6} {:>11}", "id", "deadline", "eta", "share [Hz]");
    for (s, bw) in scenario.services.iter().zip(&outcome.allocation.0) {
        println!("{:>3} {:>9.3} {:>6.2} {:>11.1}", s.id, s.deadline, s.spectral_efficiency, bw);
    }

    let checkpoints: Vec<String> =
        outcome.trace.iter().enumerate().step_by(10).map(|(i, v)| format!("{i}:{v:.4}")).collect();
    println!("\nbest-so-far trace {}", checkpoints.join(" "));
    Ok(())
}
