//! Command-line front end for the goal recognition pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use goalrec::dataset::{self, Example};
use goalrec::encoder::render_ppm;
use goalrec::harness::{
    base_datasets, base_scenario, dump_activations, emit_report, hash_entry, run_base, run_metadata, run_sweep,
    transfer_scenarios, transfer_tasks, write_activations, RunConfig, SweepAxis, SweepSettings,
};
use goalrec::kv::KvDoc;
use goalrec::recognizer::{adapt, evaluate, Network};
use goalrec::seed::{self, tag};
use goalrec::{Error, Result, OBSERVABILITIES};

#[derive(Parser)]
#[command(name = "goalrec", version, about = "Few-shot goal recognition on grid maps")]
struct Cli {
    /// Run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Side length of the square grid (power of two).
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Flat key=value run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    All,
    BaseTrain,
    BaseTest,
    Validation,
    Shots,
    TransferTest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Frozen,
    Shots,
    Lr,
}

#[derive(Subcommand)]
enum Command {
    /// Write the base and transfer maps with their scenarios.
    GenMaps,
    /// Write GRD1 datasets.
    GenData {
        #[arg(long, value_enum, default_value = "all")]
        role: Role,
        /// Transfer map index for validation, shots and transfer-test.
        #[arg(long, default_value_t = 0)]
        map: usize,
        /// Paths per (goal, observability) for the shots role.
        #[arg(long, default_value_t = 5)]
        shots: usize,
    },
    /// Train the base network and write its checkpoint.
    TrainBase,
    /// Fine-tune a checkpoint on one transfer map.
    Adapt {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0)]
        map: usize,
        #[arg(long, default_value_t = 5)]
        frozen: usize,
        #[arg(long, default_value_t = 5)]
        shots: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
    },
    /// Evaluate a checkpoint on a dataset file.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run one hyperparameter sweep over the five transfer maps.
    Sweep {
        #[arg(value_enum)]
        axis: Axis,
        /// Base checkpoint; trained from scratch when omitted.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Dump per-filter activation maps of one block as PGM images.
    Activations {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        layer: usize,
        /// Dataset to draw the example from; the base test set when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Render one example as a PPM image.
    Render {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: category=usage message={}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "error: category={} message={}",
                e.category(),
                e.to_string().replace('\n', " ")
            );
            ExitCode::FAILURE
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
            RunConfig::from_kv(&KvDoc::parse(&text)?)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.grid_size {
        cfg.grid_size = n;
    }
    Ok(cfg)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
    println!("{}", path.display());
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn load_checkpoint(path: &Path) -> Result<Network> {
    Ok(Network::load(&read(path)?)?)
}

fn load_data(path: &Path) -> Result<Vec<Example>> {
    Ok(dataset::load(&read(path)?)?)
}

fn pick(examples: &[Example], index: usize) -> Result<&Example> {
    examples
        .get(index)
        .ok_or_else(|| Error::Usage(format!("index {index} out of range for {} examples", examples.len())))
}

fn map_index(map: usize) -> Result<()> {
    if map >= goalrec::harness::TRANSFER_MAP_COUNT {
        return Err(Error::Usage(format!("map index {map} out of range")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::GenMaps => {
            let mut all = vec![("base".to_string(), base_scenario(&cfg)?)];
            for (i, s) in transfer_scenarios(&cfg)?.into_iter().enumerate() {
                all.push((format!("transfer{i}"), s));
            }
            for (name, s) in all {
                write(&out.join(format!("{name}.map")), s.map().to_movingai())?;
                write(&out.join(format!("{name}.scen")), s.to_kv().to_string())?;
            }
        }
        Command::GenData { role, map, shots } => {
            let mut sets: Vec<(String, Vec<Example>)> = Vec::new();
            if matches!(role, Role::All | Role::BaseTrain | Role::BaseTest) {
                let (train, test) = base_datasets(&cfg, &base_scenario(&cfg)?)?;
                if matches!(role, Role::All | Role::BaseTrain) {
                    sets.push(("base_train".into(), train));
                }
                if matches!(role, Role::All | Role::BaseTest) {
                    sets.push(("base_test".into(), test));
                }
            }
            if !matches!(role, Role::BaseTrain | Role::BaseTest) {
                map_index(map)?;
                let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg)?)?;
                let maps: Vec<usize> = if matches!(role, Role::All) {
                    (0..tasks.len()).collect()
                } else {
                    vec![map]
                };
                for m in maps {
                    let t = &tasks[m];
                    if matches!(role, Role::All | Role::Validation) {
                        sets.push((format!("validation{m}"), t.validation.clone()));
                    }
                    if matches!(role, Role::All | Role::Shots) {
                        sets.push((format!("shots{m}_n{shots}"), t.shots(shots)?));
                    }
                    if matches!(role, Role::All | Role::TransferTest) {
                        sets.push((format!("transfer_test{m}"), t.test_set(m)?));
                    }
                }
            }
            let mut hashes = Vec::new();
            for (name, examples) in &sets {
                write(&out.join(format!("{name}.grd")), dataset::save(examples)?)?;
                hashes.push(hash_entry(name, examples)?);
            }
            let extra: Vec<(&str, String)> = hashes.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            write(&out.join("data.meta"), run_metadata(&cfg, &extra).to_string())?;
        }
        Command::TrainBase => {
            let run = run_base(&cfg)?;
            write(&out.join("base.nnw"), run.network.save())?;
            let curve = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            let (tk, tv) = hash_entry("base_train", &run.train)?;
            let (sk, sv) = hash_entry("base_test", &run.test)?;
            let extra = [
                ("loss_curve", curve(&run.loss_curve)),
                ("baseline_accuracy", curve(&run.baseline_curve())),
                (tk.as_str(), tv),
                (sk.as_str(), sv),
            ];
            write(&out.join("base.meta"), run_metadata(&cfg, &extra).to_string())?;
            println!("baseline_accuracy={}", curve(&run.baseline_curve()));
        }
        Command::Adapt {
            checkpoint,
            map,
            frozen,
            shots,
            lr,
        } => {
            map_index(map)?;
            let base = load_checkpoint(&checkpoint)?;
            let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg)?)?;
            let task = &tasks[map];
            let tc = cfg.transfer_config(frozen, shots, lr, seed::derive(cfg.seed, &[tag::CELL, map as u64]));
            let adapted = adapt(&base, &tc, &task.shots(shots)?)?;
            write(&out.join(format!("adapted{map}.nnw")), adapted.save())?;
            let eval = evaluate(&adapted, &task.validation, cfg.seed)?;
            for (o, a) in eval.by_observability() {
                println!("accuracy_{o}={a}");
            }
        }
        Command::Eval { checkpoint, data } => {
            let net = load_checkpoint(&checkpoint)?;
            let eval = evaluate(&net, &load_data(&data)?, cfg.seed)?;
            for (o, a) in eval.by_observability() {
                println!("accuracy_{o}={a}");
            }
            println!("accuracy={}", eval.accuracy());
        }
        Command::Sweep { axis, checkpoint } => {
            let axis = match axis {
                Axis::Frozen => SweepAxis::Frozen,
                Axis::Shots => SweepAxis::Shots,
                Axis::Lr => SweepAxis::Lr,
            };
            let (base, baseline) = match checkpoint {
                Some(p) => {
                    let net = load_checkpoint(&p)?;
                    let (_, test) = base_datasets(&cfg, &base_scenario(&cfg)?)?;
                    let eval = evaluate(&net, &test, cfg.seed)?;
                    let curve = OBSERVABILITIES
                        .iter()
                        .map(|&o| eval.accuracy_at(o).unwrap_or(0.0))
                        .collect();
                    (net, curve)
                }
                None => {
                    let run = run_base(&cfg)?;
                    let curve = run.baseline_curve();
                    (run.network, curve)
                }
            };
            let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg)?)?;
            let values = match axis {
                SweepAxis::Frozen => &cfg.frozen_values,
                SweepAxis::Shots => &cfg.shots_values,
                SweepAxis::Lr => &cfg.lr_values,
            };
            let report = run_sweep(
                axis,
                &base,
                &tasks,
                values,
                SweepSettings::defaults_for(axis),
                &cfg,
                Some(baseline),
            )?;
            for p in emit_report(&report, out, &format!("sweep_{axis}"))? {
                println!("{}", p.display());
            }
        }
        Command::Activations {
            checkpoint,
            layer,
            data,
            index,
        } => {
            let net = load_checkpoint(&checkpoint)?;
            let examples = match data {
                Some(p) => load_data(&p)?,
                None => base_datasets(&cfg, &base_scenario(&cfg)?)?.1,
            };
            let ex = pick(&examples, index)?;
            let images = dump_activations(&net, &ex.bitmap, layer)?;
            for p in write_activations(&images, layer, out)? {
                println!("{}", p.display());
            }
        }
        Command::Render { data, index } => {
            let examples = load_data(&data)?;
            let ex = pick(&examples, index)?;
            write(&out.join(format!("example{index}.ppm")), render_ppm(&ex.bitmap))?;
        }
    }
    Ok(())
}
