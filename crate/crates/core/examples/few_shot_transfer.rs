//! Zero-shot versus 5-shot accuracy of a base network on unseen maps.

use goalrec::harness::{run_base, transfer_scenarios, transfer_tasks, RunConfig};
use goalrec::recognizer::{adapt, evaluate};

fn main() -> goalrec::Result<()> {
    let grid_size = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let cfg = RunConfig {
        grid_size,
        ..RunConfig::default()
    };
    let base = run_base(&cfg)?;
    let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg)?)?;
    for (i, task) in tasks.iter().enumerate() {
        let zero = evaluate(&base.network, &task.validation, 0)?;
        let tc = cfg.transfer_config(5, 5, 0.01, i as u64);
        let adapted = adapt(&base.network, &tc, &task.shots(5)?)?;
        let five = evaluate(&adapted, &task.validation, 0)?;
        println!(
            "{}: zero-shot {:.3}, 5-shot {:.3} (100% observed {:.3})",
            task.scenario.map().name(),
            zero.accuracy(),
            five.accuracy(),
            five.accuracy_at(100).unwrap_or(0.0)
        );
    }
    Ok(())
}
