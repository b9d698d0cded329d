//! Experiment orchestration: run configuration, base/transfer preparation,
//! the three hyperparameter sweeps, report emission and activation dumps.

mod activations;
mod config;
mod experiment;
mod report;
mod sweep;

pub use activations::{dump_activations, write_activations, GrayImage};
pub use config::{RunConfig, TRANSFER_MAP_COUNT};
pub use experiment::{
    base_datasets, base_scenario, hash_entry, load_map, run_base, run_metadata, transfer_scenarios, transfer_tasks,
    BaseRun, TransferTask,
};
pub use report::{emit_report, parse_csv, report_csv, report_meta, report_svg, CsvRow, CSV_HEADER};
pub use sweep::{run_sweep, sweep_frozen, sweep_lr, sweep_shots, SweepAxis, SweepCell, SweepReport, SweepSettings};
