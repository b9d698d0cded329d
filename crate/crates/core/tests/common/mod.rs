//! Oracles shared by the integration tests. Nothing here calls into the
//! library's planner, encoder or layer code.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use goalrec::gridworld::{sample_scenario, GridMap, Scenario};
use goalrec::nn::Tensor;
use goalrec::Cell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Breadth-first shortest path length in steps, or `None` if unreachable.
pub fn bfs_distance(map: &GridMap, from: Cell, to: Cell) -> Option<usize> {
    let (w, h) = (map.width(), map.height());
    let free = |x: i64, y: i64| {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && !map.blocked_cells()[y as usize * w + x as usize]
    };
    let mut dist = vec![usize::MAX; w * h];
    let mut queue = VecDeque::new();
    dist[from.y * w + from.x] = 0;
    queue.push_back((from.x as i64, from.y as i64));
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y as usize * w + x as usize];
        if (x as usize, y as usize) == (to.x, to.y) {
            return Some(d);
        }
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let (nx, ny) = (x + dx, y + dy);
            if free(nx, ny) && dist[ny as usize * w + nx as usize] == usize::MAX {
                dist[ny as usize * w + nx as usize] = d + 1;
                queue.push_back((nx, ny));
            }
        }
    }
    None
}

/// Random map with independent blocked cells; the caller's scenario
/// sampler restricts itself to the largest component.
pub fn random_map(size: usize, density: f64, seed: u64) -> GridMap {
    let mut r = rng(seed);
    let blocked = (0..size * size).map(|_| r.gen_bool(density)).collect();
    GridMap::new(size, size, blocked, format!("random-{seed}"))
}

/// Random scenario on a map whose largest component can host 11 cells.
pub fn random_scenario(size: usize, seed: u64) -> Scenario {
    let mut s = seed;
    loop {
        let map = random_map(size, 0.25, s);
        if let Ok(sc) = sample_scenario(Arc::new(map), s ^ 0x5eed) {
            return sc;
        }
        s = s.wrapping_add(0x9e37_79b9);
    }
}

/// Checks unit steps through free cells from `start` to `goal`.
pub fn valid_path(map: &GridMap, cells: &[Cell], start: Cell, goal: Cell) -> bool {
    cells.first() == Some(&start)
        && cells.last() == Some(&goal)
        && cells
            .iter()
            .all(|c| c.x < map.width() && c.y < map.height() && !map.blocked_cells()[c.y * map.width() + c.x])
        && cells
            .windows(2)
            .all(|w| w[0].x.abs_diff(w[1].x) + w[0].y.abs_diff(w[1].y) == 1)
}

/// Channel index by direct evaluation of the labelling rules: a cell takes
/// the first matching label in the list obstacle, observed, start, goal,
/// free.
pub fn rule_channel(sc: &Scenario, observed: &[Cell], cell: Cell) -> u8 {
    let map = sc.map();
    let obs: HashSet<Cell> = observed.iter().copied().collect();
    let rules: [(u8, bool); 5] = [
        (0, map.blocked_cells()[cell.y * map.width() + cell.x]),
        (1, obs.contains(&cell)),
        (2, sc.start() == cell),
        (3, sc.goals().contains(&cell)),
        (4, true),
    ];
    rules.iter().find(|(_, hit)| *hit).map(|(c, _)| *c).unwrap()
}

pub fn random_tensor(shape: &[usize], r: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| r.gen_range(-1.0..1.0)).collect())
}

pub const FD_STEP: f64 = 1e-4;

/// Central difference of `f` with respect to every entry of `x`.
pub fn numeric_grad(x: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    (0..x.len())
        .map(|i| {
            let orig = probe.values()[i];
            probe.values_mut()[i] = orig + FD_STEP;
            let up = f(&probe);
            probe.values_mut()[i] = orig - FD_STEP;
            let down = f(&probe);
            probe.values_mut()[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)` using Euclidean norms over the whole tensor.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// `sum(y * w)`, whose gradient with respect to `y` is `w`.
pub fn weighted_sum(y: &Tensor, w: &Tensor) -> f64 {
    y.values().iter().zip(w.values()).map(|(a, b)| a * b).sum()
}
