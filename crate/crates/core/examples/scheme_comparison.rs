//! Compares the five schemes at the reference setup (20 services, 40 kHz,
//! deadlines uniform in [7, 20] s).
//!
//! ```bash
//! cargo run --release -p batchdenoise --example scheme_comparison -- 10
//! ```

use std::time::Instant;

use batchdenoise::experiments::{run_comparison, ExperimentConfig, Scheme};

fn main() -> batchdenoise::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = ExperimentConfig { replications, ..ExperimentConfig::default() };

    let started = Instant::now();
    let result = run_comparison(&config)?;
    println!("{} replications in {:.1?}\n", replications, started.elapsed());

    println!("{:<16} {:>10} {:>8}", "scheme", "mean FID", "outages");
    for s in &result.summaries {
        println!("{:<16} {:>10.4} {:>8}", s.scheme.name(), s.mean_fid, s.outages);
    }

    let proposed = result.mean_fid(Scheme::Proposed);
    let worst = Scheme::ALL.iter().map(|&s| result.mean_fid(s)).fold(f64::MIN, f64::max);
    println!("\nproposed improves on the worst scheme by {:.1}%", 100.0 * (worst - proposed) / worst);
    Ok(())
}
