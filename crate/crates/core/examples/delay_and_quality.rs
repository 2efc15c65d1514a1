//! Prints the batch delay law, the quality curve, and how a bandwidth share
//! turns a deadline into a generation budget.
//!
//! ```bash
//! cargo run -p batchdenoise --example delay_and_quality
//! ```

use batchdenoise::model::{generation_budget, transmission_delay, DelayModel, QualityModel};

fn main() -> batchdenoise::Result<()> {
    let delay = DelayModel::default();
    let quality = QualityModel::default();

    println!("{:>6} {:>10} {:>12}", "tasks", "g(X) [s]", "per task [s]");
    for x in [1, 2, 5, 10, 20, 50] {
        let g = delay.batch_delay(x);
        println!("{:>6} {:>10.4} {:>12.4}", x, g, g / x as f64);
    }

    println!("\n{:>6} {:>10}", "steps", "FID");
    for t in [0, 1, 5, 10, 20, 50, 100] {
        println!("{:>6} {:>10.3}", t, quality.quality(t));
    }

    // A 24576-bit image over 2 kHz at 8 bit/s/Hz.
    let deadline = 10.0;
    let ct = transmission_delay(2_000.0, 8.0, 24_576.0)?;
    let budget = generation_budget(deadline, ct);
    println!(
        "\ndeadline {deadline} s, transmission {ct:.4} s, generation budget {budget:.4} s ({} solo steps)",
        (budget / delay.solo_step()).floor()
    );
    Ok(())
}
