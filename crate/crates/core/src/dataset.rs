//! Example generation for base, transfer and validation sets, and the
//! `GRD1` binary container.
//!
//! `GRD1` layout, little-endian:
//!
//! ```text
//! magic "GRD1" | version u8 | N u16 | count u32
//! per example: label u8 | observability u8 | path_id u32 | N*N channel bytes
//! ```

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::encoder::{encode_with, GoalPrecedence, TrailBitmap};
use crate::gridworld::Scenario;
use crate::planner::{astar_noisy, truncate, NoisyHeuristicParams, Path, PlanError};
use crate::seed;
use crate::{Error, GOAL_COUNT, OBSERVABILITIES};

pub const GRD_MAGIC: &[u8; 4] = b"GRD1";
pub const GRD_VERSION: u8 = 1;
pub const GRD_HEADER_LEN: usize = 4 + 1 + 2 + 4;
pub const GRD_RECORD_OVERHEAD: usize = 1 + 1 + 4;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("payload truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("example {index}: {message}")]
    Record { index: usize, message: String },
    #[error("examples have mixed grid sizes")]
    MixedSizes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub bitmap: TrailBitmap,
    pub label: u8,
    pub observability: u8,
    pub path_id: u32,
}

/// A full noisy path with its goal label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPath {
    pub label: u8,
    pub path_id: u32,
    pub path: Path,
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub scenario: Scenario,
    pub n_paths_per_goal: usize,
    pub observabilities: Vec<u8>,
    pub planner_params: NoisyHeuristicParams,
    pub seed: u64,
    pub goal_precedence: GoalPrecedence,
}

impl DatasetSpec {
    pub fn new(scenario: Scenario, n_paths_per_goal: usize, seed: u64) -> Self {
        DatasetSpec {
            scenario,
            n_paths_per_goal,
            observabilities: OBSERVABILITIES.to_vec(),
            planner_params: NoisyHeuristicParams::standard(0),
            seed,
            goal_precedence: GoalPrecedence::Low,
        }
    }

    pub fn total(&self) -> usize {
        GOAL_COUNT * self.n_paths_per_goal * self.observabilities.len()
    }
}

fn path_params(base: &NoisyHeuristicParams, seed_value: u64, tags: &[u64]) -> NoisyHeuristicParams {
    let mut all = vec![base.rng_seed()];
    all.extend_from_slice(tags);
    base.with_seed(seed::derive(seed_value, &all))
}

/// Goal-balanced noisy paths, ordered by (goal, path index).
pub fn generate_paths(spec: &DatasetSpec) -> Result<Vec<LabeledPath>, PlanError> {
    let sc = &spec.scenario;
    (0..GOAL_COUNT * spec.n_paths_per_goal)
        .into_par_iter()
        .map(|k| {
            let (goal, idx) = (k / spec.n_paths_per_goal, k % spec.n_paths_per_goal);
            let params = path_params(
                &spec.planner_params,
                spec.seed,
                &[seed::tag::PATH, goal as u64, idx as u64],
            );
            let path = astar_noisy(sc.map(), sc.start(), sc.goals()[goal], &params)?;
            Ok(LabeledPath {
                label: goal as u8,
                path_id: k as u32,
                path,
            })
        })
        .collect()
}

fn example_from(
    scenario: &Scenario,
    path: &LabeledPath,
    observability: u8,
    precedence: GoalPrecedence,
) -> Result<Example, Error> {
    let obs = truncate(&path.path, observability as f64)?;
    Ok(Example {
        bitmap: encode_with(scenario, &obs, precedence)?,
        label: path.label,
        observability,
        path_id: path.path_id,
    })
}

/// One example per (path, observability), shuffled with the dataset seed.
pub fn generate(spec: &DatasetSpec) -> Result<Vec<Example>, Error> {
    let paths = generate_paths(spec)?;
    let mut examples = paths
        .par_iter()
        .map(|p| {
            spec.observabilities
                .iter()
                .map(|&o| example_from(&spec.scenario, p, o, spec.goal_precedence))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    examples.shuffle(&mut seed::rng(spec.seed, &[seed::tag::SHUFFLE]));
    Ok(examples)
}

/// Transfer training set of `n` shots: for each (goal, observability) pair,
/// `n` noisy paths, giving `4 * n * 10` examples.
pub fn make_shots(
    scenario: &Scenario,
    n: usize,
    planner_params: &NoisyHeuristicParams,
    seed_value: u64,
) -> Result<Vec<Example>, Error> {
    make_shots_with(scenario, n, planner_params, seed_value, GoalPrecedence::Low)
}

pub fn make_shots_with(
    scenario: &Scenario,
    n: usize,
    planner_params: &NoisyHeuristicParams,
    seed_value: u64,
    precedence: GoalPrecedence,
) -> Result<Vec<Example>, Error> {
    // Retry budget for drawing a path not yet used by the same pair; noisy
    // search on small open maps can repeat paths.
    const DISTINCT_ATTEMPTS: u64 = 8;
    let pairs: Vec<(usize, u8)> = (0..GOAL_COUNT)
        .flat_map(|g| OBSERVABILITIES.iter().map(move |&o| (g, o)))
        .collect();
    let per_pair = pairs
        .par_iter()
        .enumerate()
        .map(|(pair_idx, &(goal, obs))| {
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let mut chosen = None;
                for attempt in 0..DISTINCT_ATTEMPTS {
                    let params = path_params(
                        planner_params,
                        seed_value,
                        &[seed::tag::SHOTS, goal as u64, obs as u64, i as u64, attempt],
                    );
                    let path = astar_noisy(scenario.map(), scenario.start(), scenario.goals()[goal], &params)?;
                    let fresh = !seen.contains(&path);
                    if fresh || attempt + 1 == DISTINCT_ATTEMPTS {
                        chosen = Some(path);
                        break;
                    }
                }
                let path = chosen.expect("at least one attempt");
                seen.insert(path.clone());
                let lp = LabeledPath {
                    label: goal as u8,
                    path_id: (pair_idx * n + i) as u32,
                    path,
                };
                out.push(example_from(scenario, &lp, obs, precedence)?);
            }
            Ok::<_, Error>(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Serialized size of `count` examples on an N×N grid.
pub fn encoded_len(count: usize, n: usize) -> usize {
    GRD_HEADER_LEN + count * (GRD_RECORD_OVERHEAD + n * n)
}

pub fn save(examples: &[Example]) -> Result<Vec<u8>, FormatError> {
    let n = examples.first().map_or(0, |e| e.bitmap.size());
    if examples.iter().any(|e| e.bitmap.size() != n) {
        return Err(FormatError::MixedSizes);
    }
    let n16 = u16::try_from(n).map_err(|_| FormatError::Record {
        index: 0,
        message: format!("grid size {n} exceeds u16"),
    })?;
    let mut out = Vec::with_capacity(encoded_len(examples.len(), n));
    out.extend_from_slice(GRD_MAGIC);
    out.push(GRD_VERSION);
    out.extend_from_slice(&n16.to_le_bytes());
    out.extend_from_slice(&(examples.len() as u32).to_le_bytes());
    for e in examples {
        out.push(e.label);
        out.push(e.observability);
        out.extend_from_slice(&e.path_id.to_le_bytes());
        out.extend_from_slice(e.bitmap.indices());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(FormatError::Truncated(self.bytes.len()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load(bytes: &[u8]) -> Result<Vec<Example>, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if &magic != GRD_MAGIC {
        return Err(FormatError::Magic(magic));
    }
    let version = r.u8()?;
    if version != GRD_VERSION {
        return Err(FormatError::Version(version));
    }
    let n = r.u16()? as usize;
    let count = r.u32()? as usize;
    let mut examples = Vec::with_capacity(count.min(bytes.len()));
    for index in 0..count {
        let label = r.u8()?;
        let observability = r.u8()?;
        let path_id = r.u32()?;
        let cells = r.take(n * n)?.to_vec();
        if label as usize >= GOAL_COUNT {
            return Err(FormatError::Record {
                index,
                message: format!("label {label} out of range"),
            });
        }
        let bitmap = TrailBitmap::from_indices(n, cells).map_err(|e| FormatError::Record {
            index,
            message: e.to_string(),
        })?;
        examples.push(Example {
            bitmap,
            label,
            observability,
            path_id,
        });
    }
    if r.pos != bytes.len() {
        return Err(FormatError::Trailing(bytes.len() - r.pos));
    }
    Ok(examples)
}

/// Hex SHA-256 of the `GRD1` encoding, recorded in run metadata.
pub fn dataset_hash(examples: &[Example]) -> Result<String, FormatError> {
    Ok(Sha256::digest(save(examples)?)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

pub fn label_histogram(examples: &[Example]) -> [usize; GOAL_COUNT] {
    let mut h = [0; GOAL_COUNT];
    for e in examples {
        h[e.label as usize] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{sample_scenario, synthetic_map};
    use std::sync::Arc;

    fn scenario(size: usize, seed_value: u64) -> Scenario {
        let map = Arc::new(synthetic_map(size, 0.42, seed_value));
        sample_scenario(map, seed_value).unwrap()
    }

    #[test]
    fn desk_scale_counts_are_balanced() {
        let spec = DatasetSpec::new(scenario(32, 1), 50, 7);
        let ex = generate(&spec).unwrap();
        assert_eq!(ex.len(), 2000);
        assert_eq!(spec.total(), 2000);
        assert_eq!(label_histogram(&ex), [200; 10]);
        for o in OBSERVABILITIES {
            assert_eq!(ex.iter().filter(|e| e.observability == o).count(), 500);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DatasetSpec::new(scenario(16, 2), 3, 9);
        assert_eq!(
            save(&generate(&spec).unwrap()).unwrap(),
            save(&generate(&spec).unwrap()).unwrap()
        );
        let other = DatasetSpec {
            seed: 10,
            ..spec.clone()
        };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn shot_counts() {
        let sc = scenario(16, 3);
        let p = NoisyHeuristicParams::standard(0);
        assert!(make_shots(&sc, 0, &p, 1).unwrap().is_empty());
        let one = make_shots(&sc, 1, &p, 1).unwrap();
        assert_eq!(one.len(), 40);
        let pairs: HashSet<(u8, u8)> = one.iter().map(|e| (e.label, e.observability)).collect();
        assert_eq!(pairs.len(), 40);
        assert_eq!(make_shots(&sc, 5, &p, 1).unwrap().len(), 200);
    }

    #[test]
    fn size_formula_and_corruption() {
        let spec = DatasetSpec::new(scenario(16, 4), 1, 3);
        let ex = generate(&spec).unwrap();
        let bytes = save(&ex).unwrap();
        assert_eq!(bytes.len(), encoded_len(ex.len(), 16));
        assert_eq!(load(&bytes).unwrap(), ex);

        let mut bad = bytes.clone();
        bad[GRD_HEADER_LEN + GRD_RECORD_OVERHEAD] = 5;
        assert!(matches!(load(&bad), Err(FormatError::Record { index: 0, .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(load(&bad), Err(FormatError::Magic(_))));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert_eq!(load(&bad), Err(FormatError::Version(2)));
        assert!(matches!(
            load(&bytes[..bytes.len() - 1]),
            Err(FormatError::Truncated(_))
        ));
        let mut long = bytes;
        long.push(0);
        assert_eq!(load(&long), Err(FormatError::Trailing(1)));
    }

    #[test]
    fn empty_set_round_trips() {
        let bytes = save(&[]).unwrap();
        assert_eq!(bytes.len(), GRD_HEADER_LEN);
        assert!(load(&bytes).unwrap().is_empty());
    }
}
