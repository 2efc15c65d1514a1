//! Measures how far the scheduler lands from the exhaustive optimum on small
//! random instances.
//!
//! ```bash
//! cargo run --release -p batchdenoise --example oracle_gap -- 500
//! ```

use batchdenoise::baselines::{exhaustive_oracle, ORACLE_MAX_HORIZON};
use batchdenoise::model::{DelayModel, QualityModel, Scenario, ServiceRequest};
use batchdenoise::scheduler::stacking;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> batchdenoise::Result<()> {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let model = DelayModel::default();
    let cap = ORACLE_MAX_HORIZON as f64 * model.solo_step();

    let mut gaps = Vec::new();
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=3usize);
        let budgets: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=cap)).collect();
        let services = budgets.iter().enumerate().map(|(i, &b)| ServiceRequest::new(i as u32, b.max(1e-3), 8.0)).collect();
        let scenario = Scenario::new(services, 40_000.0, 24_576.0, model, QualityModel::default())?;
        let oracle = exhaustive_oracle(&scenario, &budgets, ORACLE_MAX_HORIZON)?.mean_quality;
        let heuristic = stacking(&scenario, &budgets).mean_quality;
        gaps.push((heuristic - oracle) / oracle);
    }
    gaps.sort_by(f64::total_cmp);
    let optimal = gaps.iter().filter(|&&g| g <= 0.0).count();
    println!("{trials} instances, optimal on {optimal}");
    println!("median gap {:.5}, p95 {:.5}, max {:.5}", gaps[gaps.len() / 2], gaps[gaps.len() * 95 / 100], gaps[gaps.len() - 1]);
    Ok(())
}
