use std::path::PathBuf;

use crate::encoder::GoalPrecedence;
use crate::kv::{KvDoc, KvError};
use crate::planner::NoisyHeuristicParams;
use crate::recognizer::{TrainConfig, TransferConfig};
use crate::Result;

/// Transfer maps per sweep cell.
pub const TRANSFER_MAP_COUNT: usize = 5;

/// Every knob of a run. Defaults are the desk scale: a 64×64 grid and set
/// sizes one eighth of the full protocol (2000 / 800 / 800, 400 validation
/// examples per transfer map).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub grid_size: usize,
    /// Obstacle fill probability of synthetic maps.
    pub map_fill: f64,
    /// MovingAI file for the base map; synthetic when absent.
    pub base_map: Option<PathBuf>,
    /// MovingAI files for the transfer maps; synthetic when empty.
    pub transfer_maps: Vec<PathBuf>,
    pub base_train_paths_per_goal: usize,
    pub base_test_paths_per_goal: usize,
    pub transfer_test_paths_per_goal: usize,
    pub validation_paths_per_goal: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub transfer_epochs: usize,
    pub epsilon: f64,
    pub delta: u32,
    pub goal_precedence: GoalPrecedence,
    pub plain: bool,
    pub frozen_values: Vec<f64>,
    pub shots_values: Vec<f64>,
    pub lr_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            grid_size: 64,
            map_fill: 0.42,
            base_map: None,
            transfer_maps: Vec::new(),
            base_train_paths_per_goal: 50,
            base_test_paths_per_goal: 20,
            transfer_test_paths_per_goal: 20,
            validation_paths_per_goal: 10,
            epochs: 5,
            lr: 0.01,
            batch_size: 32,
            transfer_epochs: 3,
            epsilon: 0.2,
            delta: 10,
            goal_precedence: GoalPrecedence::Low,
            plain: false,
            frozen_values: (0..=6).map(f64::from).collect(),
            shots_values: (0..=10).map(f64::from).collect(),
            lr_values: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        }
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, KvError> {
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| KvError::Value {
                key: key.to_string(),
                value: text.to_string(),
            })
        })
        .collect()
}

impl RunConfig {
    pub fn planner_params(&self) -> NoisyHeuristicParams {
        NoisyHeuristicParams::new(self.epsilon, self.delta, 0).expect("validated planner parameters")
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            batch_size: self.batch_size,
            seed: self.seed,
        }
    }

    pub fn transfer_config(&self, frozen_blocks: usize, shots: usize, transfer_lr: f64, seed: u64) -> TransferConfig {
        TransferConfig {
            frozen_blocks,
            shots,
            transfer_lr,
            epochs: self.transfer_epochs,
            batch_size: self.batch_size,
            seed,
        }
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.set("seed", self.seed)
            .set("grid_size", self.grid_size)
            .set("map_fill", self.map_fill);
        if let Some(p) = &self.base_map {
            d.set("base_map", p.display());
        }
        if !self.transfer_maps.is_empty() {
            let maps: Vec<String> = self.transfer_maps.iter().map(|p| p.display().to_string()).collect();
            d.set("transfer_maps", maps.join(","));
        }
        d.set("base_train_paths_per_goal", self.base_train_paths_per_goal)
            .set("base_test_paths_per_goal", self.base_test_paths_per_goal)
            .set("transfer_test_paths_per_goal", self.transfer_test_paths_per_goal)
            .set("validation_paths_per_goal", self.validation_paths_per_goal)
            .set("epochs", self.epochs)
            .set("lr", self.lr)
            .set("batch_size", self.batch_size)
            .set("transfer_epochs", self.transfer_epochs)
            .set("epsilon", self.epsilon)
            .set("delta", self.delta)
            .set(
                "goal_precedence",
                match self.goal_precedence {
                    GoalPrecedence::Low => "low",
                    GoalPrecedence::High => "high",
                },
            )
            .set("plain", self.plain)
            .set("frozen_values", list(&self.frozen_values))
            .set("shots_values", list(&self.shots_values))
            .set("lr_values", list(&self.lr_values));
        d
    }

    /// Overrides defaults with the keys present in `doc`; unknown keys are
    /// rejected.
    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let mut c = RunConfig::default();
        for key in doc.keys() {
            let v = doc.get(key).unwrap_or_default();
            let bad = || KvError::Value {
                key: key.to_string(),
                value: v.to_string(),
            };
            match key {
                "seed" => c.seed = doc.parsed(key)?.unwrap(),
                "grid_size" => c.grid_size = doc.parsed(key)?.unwrap(),
                "map_fill" => c.map_fill = doc.parsed(key)?.unwrap(),
                "base_map" => c.base_map = Some(PathBuf::from(v)),
                "transfer_maps" => c.transfer_maps = v.split(',').map(|s| PathBuf::from(s.trim())).collect(),
                "base_train_paths_per_goal" => c.base_train_paths_per_goal = doc.parsed(key)?.unwrap(),
                "base_test_paths_per_goal" => c.base_test_paths_per_goal = doc.parsed(key)?.unwrap(),
                "transfer_test_paths_per_goal" => c.transfer_test_paths_per_goal = doc.parsed(key)?.unwrap(),
                "validation_paths_per_goal" => c.validation_paths_per_goal = doc.parsed(key)?.unwrap(),
                "epochs" => c.epochs = doc.parsed(key)?.unwrap(),
                "lr" => c.lr = doc.parsed(key)?.unwrap(),
                "batch_size" => c.batch_size = doc.parsed(key)?.unwrap(),
                "transfer_epochs" => c.transfer_epochs = doc.parsed(key)?.unwrap(),
                "epsilon" => c.epsilon = doc.parsed(key)?.unwrap(),
                "delta" => c.delta = doc.parsed(key)?.unwrap(),
                "goal_precedence" => {
                    c.goal_precedence = match v {
                        "low" => GoalPrecedence::Low,
                        "high" => GoalPrecedence::High,
                        _ => return Err(bad().into()),
                    }
                }
                "plain" => c.plain = doc.parsed(key)?.unwrap(),
                "frozen_values" => c.frozen_values = parse_list(key, v)?,
                "shots_values" => c.shots_values = parse_list(key, v)?,
                "lr_values" => c.lr_values = parse_list(key, v)?,
                other => return Err(KvError::Unknown(other.to_string()).into()),
            }
        }
        NoisyHeuristicParams::new(c.epsilon, c.delta, 0)?;
        if !c.transfer_maps.is_empty() && c.transfer_maps.len() != TRANSFER_MAP_COUNT {
            return Err(KvError::Value {
                key: "transfer_maps".into(),
                value: format!("{} maps, need {TRANSFER_MAP_COUNT}", c.transfer_maps.len()),
            }
            .into());
        }
        Ok(c)
    }
}
