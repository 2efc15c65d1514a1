//! Validates a schedule, then breaks it in a few ways and prints what the
//! validator reports.
//!
//! ```bash
//! cargo run -p batchdenoise --example validate_schedule
//! ```

use batchdenoise::model::{DelayModel, QualityModel, Scenario, ServiceRequest};
use batchdenoise::scheduler::{stacking, validate_schedule, Schedule};

fn report(label: &str, schedule: &Schedule, scenario: &Scenario, budgets: &[f64]) {
    let r = validate_schedule(schedule, scenario, budgets);
    println!("{label}: {} violation(s)", r.violations.len());
    for v in r.violations.iter().take(3) {
        println!("  {v}");
    }
}

fn main() -> batchdenoise::Result<()> {
    let budgets = [1.5, 3.0, 4.0];
    let services = budgets.iter().enumerate().map(|(i, &b)| ServiceRequest::new(i as u32, b, 8.0)).collect();
    let scenario = Scenario::new(services, 40_000.0, 24_576.0, DelayModel::default(), QualityModel::default())?;
    let schedule = stacking(&scenario, &budgets).schedule;
    report("original", &schedule, &scenario, &budgets);

    let mut short = schedule.clone();
    short.batches[0].duration *= 0.9;
    report("shortened first batch", &short, &scenario, &budgets);

    let mut tight = budgets;
    tight[2] = 1.0;
    report("tighter budget", &schedule, &scenario, &tight);

    let mut dup = schedule.clone();
    let extra = dup.batches[0].members[0];
    dup.batches[0].members.push(extra);
    report("duplicated member", &dup, &scenario, &budgets);
    Ok(())
}
