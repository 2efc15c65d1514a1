//! Schedules six services with mixed budgets and prints every batch.
//!
//! ```bash
//! cargo run -p batchdenoise --example stacking_schedule
//! ```

use batchdenoise::model::{DelayModel, QualityModel, Scenario, ServiceRequest};
use batchdenoise::scheduler::{max_target_steps, stacking, stacking_run};

fn main() -> batchdenoise::Result<()> {
    let budgets = [1.2, 2.5, 3.0, 4.4, 6.0, 9.5];
    let services = budgets.iter().enumerate().map(|(i, &b)| ServiceRequest::new(i as u32, b, 8.0)).collect();
    let scenario = Scenario::new(services, 40_000.0, 24_576.0, DelayModel::default(), QualityModel::default())?;

    let best = stacking(&scenario, &budgets);
    println!("best target T* = {} (searched 1..={})", best.target_steps, max_target_steps(&budgets, &scenario.delay_model));
    for batch in &best.schedule.batches {
        let members: Vec<String> = batch.members.iter().map(|t| format!("{}#{}", t.service, t.step)).collect();
        println!("  [{:>7.4}, {:>7.4}) {}", batch.start, batch.end(), members.join(" "));
    }
    for o in &best.schedule.services {
        println!("service {} budget {:>4.1}: {} steps", o.id, budgets[o.id as usize], o.completed_steps);
    }
    println!("mean FID {:.4}", best.mean_quality);

    println!("\nmean FID by target:");
    for t in [1, 3, 5, 10, 20] {
        println!("  T* = {:>2}: {:.4}", t, stacking_run(&scenario, &budgets, t).mean_quality);
    }
    Ok(())
}
