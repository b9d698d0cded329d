//! Frozen-block, shot-count and transfer-learning-rate sweeps, each
//! cross-validated over the transfer maps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::recognizer::{adapt, evaluate, Network};
use crate::seed::{self, tag};
use crate::{Error, Result, OBSERVABILITIES};

use super::config::{RunConfig, TRANSFER_MAP_COUNT};
use super::experiment::TransferTask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Frozen,
    Shots,
    Lr,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Frozen => "frozen",
            SweepAxis::Shots => "shots",
            SweepAxis::Lr => "lr",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(SweepAxis::Frozen),
            "shots" => Ok(SweepAxis::Shots),
            "lr" => Ok(SweepAxis::Lr),
            _ => Err(Error::Usage(format!("unknown sweep axis {s:?}"))),
        }
    }
}

/// Values held fixed while one axis is swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub frozen: usize,
    pub shots: usize,
    pub lr: f64,
}

impl SweepSettings {
    pub fn defaults_for(axis: SweepAxis) -> Self {
        match axis {
            SweepAxis::Frozen => SweepSettings {
                frozen: 0,
                shots: 5,
                lr: 0.01,
            },
            SweepAxis::Shots => SweepSettings {
                frozen: 5,
                shots: 0,
                lr: 0.01,
            },
            SweepAxis::Lr => SweepSettings {
                frozen: 4,
                shots: 5,
                lr: 0.0,
            },
        }
    }

    fn with(self, axis: SweepAxis, value: f64) -> Self {
        match axis {
            SweepAxis::Frozen => SweepSettings {
                frozen: value as usize,
                ..self
            },
            SweepAxis::Shots => SweepSettings {
                shots: value as usize,
                ..self
            },
            SweepAxis::Lr => SweepSettings { lr: value, ..self },
        }
    }
}

/// One (value, map) adaptation result: accuracy per observability level.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value_index: usize,
    pub map_id: usize,
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub observabilities: Vec<u8>,
    pub map_names: Vec<String>,
    /// Ordered by (value, map).
    pub cells: Vec<SweepCell>,
    /// Single-configuration network accuracy per observability level.
    pub baseline: Option<Vec<f64>>,
    pub seed: u64,
    pub dataset_hashes: Vec<(String, String)>,
}

impl SweepReport {
    pub fn cells_for(&self, value_index: usize) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(move |c| c.value_index == value_index)
    }

    /// Mean accuracy across maps, per observability level.
    pub fn mean(&self, value_index: usize) -> Vec<f64> {
        let cells: Vec<&SweepCell> = self.cells_for(value_index).collect();
        (0..self.observabilities.len())
            .map(|o| cells.iter().map(|c| c.accuracy[o]).sum::<f64>() / cells.len() as f64)
            .collect()
    }

    /// Mean across maps and observability levels.
    pub fn mean_overall(&self, value_index: usize) -> f64 {
        let m = self.mean(value_index);
        m.iter().sum::<f64>() / m.len() as f64
    }

    pub fn mean_at(&self, value_index: usize, observability: u8) -> Option<f64> {
        let o = self.observabilities.iter().position(|&x| x == observability)?;
        Some(self.mean(value_index)[o])
    }

    pub fn value_index(&self, value: f64) -> Option<usize> {
        self.values.iter().position(|&v| v == value)
    }
}

/// Adapts the base network once per (value, map) and evaluates on the map's
/// validation set. Cells are independent; the training seed depends only
/// on the map so every value sees the same shuffles.
pub fn run_sweep(
    axis: SweepAxis,
    base: &Network,
    tasks: &[TransferTask],
    values: &[f64],
    fixed: SweepSettings,
    cfg: &RunConfig,
    baseline: Option<Vec<f64>>,
) -> Result<SweepReport> {
    if tasks.len() != TRANSFER_MAP_COUNT {
        return Err(Error::Usage(format!(
            "sweeps need {TRANSFER_MAP_COUNT} transfer maps, got {}",
            tasks.len()
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..tasks.len()).map(move |m| (v, m)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(vi, mi)| {
            let s = fixed.with(axis, values[vi]);
            let task = &tasks[mi];
            let cell_seed = seed::derive(cfg.seed, &[tag::CELL, mi as u64]);
            let shots = task.shots(s.shots)?;
            let tc = cfg.transfer_config(s.frozen, s.shots, s.lr, cell_seed);
            let adapted = adapt(base, &tc, &shots)?;
            let eval = evaluate(
                &adapted,
                &task.validation,
                seed::derive(cell_seed, &[axis.tag(), vi as u64]),
            )?;
            let accuracy = OBSERVABILITIES
                .iter()
                .map(|&o| eval.accuracy_at(o).unwrap_or(0.0))
                .collect();
            Ok(SweepCell {
                value_index: vi,
                map_id: mi,
                accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dataset_hashes = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        dataset_hashes.push(super::experiment::hash_entry(&format!("validation{i}"), &t.validation)?);
    }
    Ok(SweepReport {
        axis,
        values: values.to_vec(),
        observabilities: OBSERVABILITIES.to_vec(),
        map_names: tasks.iter().map(|t| t.scenario.map().name().to_string()).collect(),
        cells,
        baseline,
        seed: cfg.seed,
        dataset_hashes,
    })
}

/// Locked blocks swept with 5 shots at learning rate 0.01.
pub fn sweep_frozen(
    base: &Network,
    tasks: &[TransferTask],
    cfg: &RunConfig,
    baseline: Option<Vec<f64>>,
) -> Result<SweepReport> {
    let axis = SweepAxis::Frozen;
    run_sweep(
        axis,
        base,
        tasks,
        &cfg.frozen_values,
        SweepSettings::defaults_for(axis),
        cfg,
        baseline,
    )
}

/// Shot count swept with 5 frozen blocks at learning rate 0.01.
pub fn sweep_shots(
    base: &Network,
    tasks: &[TransferTask],
    cfg: &RunConfig,
    baseline: Option<Vec<f64>>,
) -> Result<SweepReport> {
    let axis = SweepAxis::Shots;
    run_sweep(
        axis,
        base,
        tasks,
        &cfg.shots_values,
        SweepSettings::defaults_for(axis),
        cfg,
        baseline,
    )
}

/// Transfer learning rate swept with 4 frozen blocks and 5 shots.
pub fn sweep_lr(
    base: &Network,
    tasks: &[TransferTask],
    cfg: &RunConfig,
    baseline: Option<Vec<f64>>,
) -> Result<SweepReport> {
    let axis = SweepAxis::Lr;
    run_sweep(
        axis,
        base,
        tasks,
        &cfg.lr_values,
        SweepSettings::defaults_for(axis),
        cfg,
        baseline,
    )
}
