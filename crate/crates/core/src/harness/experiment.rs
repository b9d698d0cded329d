use std::path::Path;
use std::sync::Arc;

use crate::dataset::{dataset_hash, generate, make_shots_with, DatasetSpec, Example};
use crate::gridworld::{downscale, parse_movingai, sample_scenario, synthetic_map, GridMap, Scenario};
use crate::kv::KvDoc;
use crate::nn::{AdamConfig, BN_EPS, BN_MOMENTUM};
use crate::recognizer::{evaluate, train_base, Evaluation, Network};
use crate::seed::{self, tag};
use crate::{Error, Result};

use super::config::{RunConfig, TRANSFER_MAP_COUNT};

/// Reads a MovingAI file and downscales it to `grid_size` when larger. The
/// map is named after the file stem.
pub fn load_map(path: &Path, grid_size: usize) -> Result<GridMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".into());
    let map = parse_movingai(&text, &name)?;
    if map.width() == grid_size && map.height() == grid_size {
        Ok(map)
    } else {
        Ok(downscale(&map, grid_size)?)
    }
}

fn scenario_for(cfg: &RunConfig, index: usize, file: Option<&Path>) -> Result<Scenario> {
    let map = match file {
        Some(p) => load_map(p, cfg.grid_size)?,
        None => synthetic_map(
            cfg.grid_size,
            cfg.map_fill,
            seed::derive(cfg.seed, &[tag::MAP, index as u64]),
        )
        .with_name(format!("synthetic-{index}")),
    };
    Ok(sample_scenario(
        Arc::new(map),
        seed::derive(cfg.seed, &[tag::SCENARIO, index as u64]),
    )?)
}

pub fn base_scenario(cfg: &RunConfig) -> Result<Scenario> {
    scenario_for(cfg, 0, cfg.base_map.as_deref())
}

pub fn transfer_scenarios(cfg: &RunConfig) -> Result<Vec<Scenario>> {
    (0..TRANSFER_MAP_COUNT)
        .map(|i| scenario_for(cfg, i + 1, cfg.transfer_maps.get(i).map(|p| p.as_path())))
        .collect()
}

fn spec(cfg: &RunConfig, scenario: &Scenario, paths_per_goal: usize, seed_value: u64) -> DatasetSpec {
    DatasetSpec {
        scenario: scenario.clone(),
        n_paths_per_goal: paths_per_goal,
        observabilities: crate::OBSERVABILITIES.to_vec(),
        planner_params: cfg.planner_params(),
        seed: seed_value,
        goal_precedence: cfg.goal_precedence,
    }
}

/// One unseen configuration with its validation set.
#[derive(Debug, Clone)]
pub struct TransferTask {
    pub scenario: Scenario,
    pub validation: Vec<Example>,
    shot_seed: u64,
    cfg: RunConfig,
}

impl TransferTask {
    /// `n`-shot transfer training set; shot streams do not depend on `n`.
    pub fn shots(&self, n: usize) -> Result<Vec<Example>> {
        make_shots_with(
            &self.scenario,
            n,
            &self.cfg.planner_params(),
            self.shot_seed,
            self.cfg.goal_precedence,
        )
    }

    /// Transfer test set, from a stream disjoint from shots and validation.
    pub fn test_set(&self, index: usize) -> Result<Vec<Example>> {
        let s = seed::derive(self.cfg.seed, &[tag::TRANSFER_TEST, index as u64]);
        generate(&spec(
            &self.cfg,
            &self.scenario,
            self.cfg.transfer_test_paths_per_goal,
            s,
        ))
    }
}

pub fn transfer_tasks(cfg: &RunConfig, scenarios: &[Scenario]) -> Result<Vec<TransferTask>> {
    scenarios
        .iter()
        .enumerate()
        .map(|(i, sc)| {
            let vseed = seed::derive(cfg.seed, &[tag::VALIDATION, i as u64]);
            Ok(TransferTask {
                scenario: sc.clone(),
                validation: generate(&spec(cfg, sc, cfg.validation_paths_per_goal, vseed))?,
                shot_seed: seed::derive(cfg.seed, &[tag::SHOTS, i as u64]),
                cfg: cfg.clone(),
            })
        })
        .collect()
}

pub fn base_datasets(cfg: &RunConfig, scenario: &Scenario) -> Result<(Vec<Example>, Vec<Example>)> {
    let train = generate(&spec(
        cfg,
        scenario,
        cfg.base_train_paths_per_goal,
        seed::derive(cfg.seed, &[tag::BASE_TRAIN]),
    ))?;
    let test = generate(&spec(
        cfg,
        scenario,
        cfg.base_test_paths_per_goal,
        seed::derive(cfg.seed, &[tag::BASE_TEST]),
    ))?;
    Ok((train, test))
}

/// A trained base network with its single-configuration baseline.
#[derive(Debug, Clone)]
pub struct BaseRun {
    pub scenario: Scenario,
    pub train: Vec<Example>,
    pub test: Vec<Example>,
    pub network: Network,
    pub loss_curve: Vec<f64>,
    /// Base network on the base test set.
    pub baseline: Evaluation,
}

impl BaseRun {
    /// Baseline accuracy per observability level.
    pub fn baseline_curve(&self) -> Vec<f64> {
        self.baseline.by_observability().into_values().collect()
    }
}

pub fn run_base(cfg: &RunConfig) -> Result<BaseRun> {
    let scenario = base_scenario(cfg)?;
    let (train, test) = base_datasets(cfg, &scenario)?;
    let init = seed::derive(cfg.seed, &[tag::INIT]);
    let mut network = if cfg.plain {
        Network::plain(cfg.grid_size, init)?
    } else {
        Network::new(cfg.grid_size, init)?
    };
    let loss_curve = train_base(&mut network, &train, &cfg.train_config())?;
    let baseline = evaluate(&network, &test, cfg.seed)?;
    Ok(BaseRun {
        scenario,
        train,
        test,
        network,
        loss_curve,
        baseline,
    })
}

/// Key=value metadata: the full configuration, fixed optimizer constants
/// and any extra entries (dataset hashes, loss curves).
pub fn run_metadata(cfg: &RunConfig, extra: &[(&str, String)]) -> KvDoc {
    let mut doc = cfg.to_kv();
    let adam = AdamConfig::default();
    doc.set("adam_beta1", adam.beta1)
        .set("adam_beta2", adam.beta2)
        .set("adam_eps", adam.eps)
        .set("bn_eps", BN_EPS)
        .set("bn_momentum", BN_MOMENTUM)
        .set("dropout_p", 0.1);
    for (k, v) in extra {
        doc.set(k, v);
    }
    doc
}

pub fn hash_entry(name: &str, examples: &[Example]) -> Result<(String, String)> {
    Ok((format!("{name}_sha256"), dataset_hash(examples)?))
}
