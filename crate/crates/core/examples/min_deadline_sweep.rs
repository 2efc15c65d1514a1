//! Mean FID of every scheme as the tightest deadline shrinks, with the
//! loosest deadline fixed at 20 s. The last column is the gain of PSO
//! bandwidth allocation over the equal split.
//!
//! ```bash
//! cargo run --release -p batchdenoise --example min_deadline_sweep -- 10
//! ```

use batchdenoise::experiments::{sweep_min_delay, ExperimentConfig, Scheme};

fn main() -> batchdenoise::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = ExperimentConfig { replications, ..ExperimentConfig::default() };
    let table = sweep_min_delay(&config, &config.sweep.min_deadlines)?;

    print!("{:>6}", "tau_min");
    for s in Scheme::ALL {
        print!(" {:>16}", s.name());
    }
    println!(" {:>10}", "pso gain");
    for &m in &config.sweep.min_deadlines {
        print!("{m:>7}");
        for s in Scheme::ALL {
            print!(" {:>16.4}", table.mean_fid(m, s).unwrap_or(f64::NAN));
        }
        let gain = table.mean_fid(m, Scheme::EqualBandwidth).unwrap() - table.mean_fid(m, Scheme::Proposed).unwrap();
        println!(" {gain:>10.4}");
    }
    Ok(())
}
