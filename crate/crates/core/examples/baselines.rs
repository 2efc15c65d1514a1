//! Runs the batching baselines and the scheduler on one random scenario with
//! equal bandwidth.
//!
//! ```bash
//! cargo run -p batchdenoise --example baselines
//! ```

use batchdenoise::bandwidth::{budgets, equal_allocation};
use batchdenoise::baselines::{default_fixed_size, fixed_size_batching, greedy_batching, single_instance};
use batchdenoise::experiments::{generate_scenario, ExperimentConfig};
use batchdenoise::scheduler::{stacking, Schedule};

fn main() -> batchdenoise::Result<()> {
    let config = ExperimentConfig { services: 12, ..ExperimentConfig::default() };
    let scenario = generate_scenario(&config, 0)?;
    let allocation = equal_allocation(scenario.len(), scenario.total_bandwidth);
    let b = budgets(&scenario, &allocation)?;
    let size = default_fixed_size(scenario.len());

    let runs: [(String, Schedule); 4] = [
        ("stacking".into(), stacking(&scenario, &b).schedule),
        ("single-instance".into(), single_instance(&scenario, &b)),
        ("greedy".into(), greedy_batching(&scenario, &b)),
        (format!("fixed-size ({size})"), fixed_size_batching(&scenario, &b, size)),
    ];
    println!("{:<18} {:>8} {:>10} {:>8}", "scheme", "batches", "mean FID", "outages");
    for (name, s) in &runs {
        println!("{:<18} {:>8} {:>10.4} {:>8}", name, s.batches.len(), s.mean_quality(&scenario.quality_model), s.outage_count());
    }
    Ok(())
}
