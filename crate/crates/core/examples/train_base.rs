//! Train the base network on one scenario and report accuracy per
//! observability level. Pass a grid size (default 32) to scale up.

use goalrec::harness::{run_base, RunConfig};

fn main() -> goalrec::Result<()> {
    let grid_size = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let cfg = RunConfig {
        grid_size,
        ..RunConfig::default()
    };
    let run = run_base(&cfg)?;
    println!("train {} / test {}", run.train.len(), run.test.len());
    for (epoch, loss) in run.loss_curve.iter().enumerate() {
        println!("epoch {} loss {loss:.4}", epoch + 1);
    }
    for (obs, acc) in run.baseline.by_observability() {
        println!("{obs:>3}% observed: accuracy {acc:.3}");
    }
    Ok(())
}
