//! Run the three transfer sweeps and write CSV/SVG reports.
//!
//! `cargo run --release --example sweeps [grid_size] [out_dir]`

use std::path::PathBuf;

use goalrec::harness::{
    emit_report, run_base, sweep_frozen, sweep_lr, sweep_shots, transfer_scenarios, transfer_tasks, RunConfig,
};

fn main() -> goalrec::Result<()> {
    let mut args = std::env::args().skip(1);
    let grid_size = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "sweeps".into()));
    let cfg = RunConfig {
        grid_size,
        ..RunConfig::default()
    };
    let base = run_base(&cfg)?;
    let baseline = Some(base.baseline_curve());
    let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg)?)?;
    for report in [
        sweep_frozen(&base.network, &tasks, &cfg, baseline.clone())?,
        sweep_shots(&base.network, &tasks, &cfg, baseline.clone())?,
        sweep_lr(&base.network, &tasks, &cfg, baseline.clone())?,
    ] {
        println!("{} sweep", report.axis);
        for (i, v) in report.values.iter().enumerate() {
            println!("  {v:>8}: mean {:.3}", report.mean_overall(i));
        }
        emit_report(&report, &out, &format!("sweep_{}", report.axis))?;
    }
    println!("reports in {}", out.display());
    Ok(())
}
