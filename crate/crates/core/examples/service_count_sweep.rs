//! Mean FID of every scheme as the number of services grows while the
//! total bandwidth stays at 40 kHz.
//!
//! ```bash
//! cargo run --release -p batchdenoise --example service_count_sweep -- 10
//! ```

use batchdenoise::experiments::{sweep_service_count, ExperimentConfig, Scheme};

fn main() -> batchdenoise::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = ExperimentConfig { replications, ..ExperimentConfig::default() };
    let table = sweep_service_count(&config, &config.sweep.service_counts)?;

    print!("{:>4}", "K");
    for s in Scheme::ALL {
        print!(" {:>16}", s.name());
    }
    println!();
    for &k in &config.sweep.service_counts {
        print!("{k:>4}");
        for s in Scheme::ALL {
            print!(" {:>16.4}", table.mean_fid(k as f64, s).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
