//! Noisy A* over 4-connected unit-cost grids and observability truncation.
//!
//! The heuristic is Manhattan distance, over-estimated by `delta` with
//! probability `epsilon`. Each node draws its perturbation once, on first
//! evaluation, and keeps it for the rest of the search.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gridworld::{Cell, GridMap};
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("epsilon {0} outside [0, 1]")]
    Epsilon(f64),
    #[error("delta must be positive")]
    Delta,
    #[error("{0} is blocked or out of bounds")]
    NotFree(Cell),
    #[error("goal {goal} unreachable from {start}")]
    Unreachable { start: Cell, goal: Cell },
    #[error("observability fraction {0} outside (0, 100]")]
    Fraction(f64),
    #[error("cannot truncate an empty path")]
    EmptyPath,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyHeuristicParams {
    epsilon: f64,
    delta: u32,
    rng_seed: u64,
}

impl NoisyHeuristicParams {
    pub fn new(epsilon: f64, delta: u32, rng_seed: u64) -> Result<Self, PlanError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(PlanError::Epsilon(epsilon));
        }
        if delta == 0 {
            return Err(PlanError::Delta);
        }
        Ok(NoisyHeuristicParams {
            epsilon,
            delta,
            rng_seed,
        })
    }

    /// epsilon = 0.2, delta = 10.
    pub fn standard(rng_seed: u64) -> Self {
        NoisyHeuristicParams {
            epsilon: 0.2,
            delta: 10,
            rng_seed,
        }
    }

    pub fn exact(rng_seed: u64) -> Self {
        NoisyHeuristicParams {
            epsilon: 0.0,
            delta: 1,
            rng_seed,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        NoisyHeuristicParams { rng_seed, ..self }
    }
}

/// Start-to-goal cell sequence, both ends inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    cells: Vec<Cell>,
}

impl Path {
    /// Wraps a cell list after checking unit 4-connected steps.
    pub fn from_cells(cells: Vec<Cell>) -> Option<Self> {
        let ok = !cells.is_empty() && cells.windows(2).all(|w| w[0].manhattan(w[1]) == 1);
        ok.then_some(Path { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Step count.
    pub fn cost(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn end(&self) -> Cell {
        self.cells[self.cells.len() - 1]
    }
}

#[derive(PartialEq, Eq)]
struct OpenEntry {
    f: u32,
    g: u32,
    seq: u64,
    node: usize,
}

impl Ord for OpenEntry {
    // Max-heap: lowest f first, then highest g, then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        (Reverse(self.f), self.g, Reverse(self.seq)).cmp(&(Reverse(other.f), other.g, Reverse(other.seq)))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct NoisyHeuristic {
    goal: Cell,
    params: NoisyHeuristicParams,
    rng: ChaCha8Rng,
    memo: Vec<u32>,
}

impl NoisyHeuristic {
    const UNSET: u32 = u32::MAX;

    fn value(&mut self, node: usize, cell: Cell) -> u32 {
        if self.memo[node] == Self::UNSET {
            let h = cell.manhattan(self.goal) as u32;
            // gen_bool(0) never fires, keeping epsilon = 0 exactly admissible.
            let noisy = self.rng.gen_bool(self.params.epsilon);
            self.memo[node] = if noisy { h + self.params.delta } else { h };
        }
        self.memo[node]
    }
}

/// A* from `start` to `goal` with an epsilon-over-estimating heuristic.
pub fn astar_noisy(map: &GridMap, start: Cell, goal: Cell, params: &NoisyHeuristicParams) -> Result<Path, PlanError> {
    for c in [start, goal] {
        if !map.is_free(c) {
            return Err(PlanError::NotFree(c));
        }
    }
    let n = map.width() * map.height();
    let mut heuristic = NoisyHeuristic {
        goal,
        params: *params,
        rng: seed::rng(params.rng_seed, &[seed::tag::PATH]),
        memo: vec![NoisyHeuristic::UNSET; n],
    };
    let mut g_score = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;

    let s = map.index(start);
    let target = map.index(goal);
    g_score[s] = 0;
    open.push(OpenEntry {
        f: heuristic.value(s, start),
        g: 0,
        seq,
        node: s,
    });

    while let Some(OpenEntry { g, node, .. }) = open.pop() {
        if closed[node] || g > g_score[node] {
            continue;
        }
        if node == target {
            let mut cells = vec![goal];
            let mut cur = node;
            while cur != s {
                cur = parent[cur];
                cells.push(map.cell_at(cur));
            }
            cells.reverse();
            return Ok(Path { cells });
        }
        closed[node] = true;
        for next in map.neighbors(map.cell_at(node)) {
            let ni = map.index(next);
            if closed[ni] {
                continue;
            }
            let ng = g + 1;
            if ng < g_score[ni] {
                g_score[ni] = ng;
                parent[ni] = node;
                seq += 1;
                open.push(OpenEntry {
                    f: ng + heuristic.value(ni, next),
                    g: ng,
                    seq,
                    node: ni,
                });
            }
        }
    }
    Err(PlanError::Unreachable { start, goal })
}

/// Number of cells kept when retaining the first `fraction` percent of a
/// path of `len` cells: round-half-up, at least one.
pub fn prefix_len(len: usize, fraction: f64) -> Result<usize, PlanError> {
    if !(fraction > 0.0 && fraction <= 100.0) {
        return Err(PlanError::Fraction(fraction));
    }
    if len == 0 {
        return Err(PlanError::EmptyPath);
    }
    let keep = (fraction * len as f64 / 100.0 + 0.5).floor() as usize;
    Ok(keep.clamp(1, len))
}

/// The first `fraction` percent of the path's cells.
pub fn truncate(path: &Path, fraction: f64) -> Result<Vec<Cell>, PlanError> {
    let keep = prefix_len(path.len(), fraction)?;
    Ok(path.cells[..keep].to_vec())
}
