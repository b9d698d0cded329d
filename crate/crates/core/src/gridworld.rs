//! Occupancy grids, MovingAI map parsing, conservative downscaling and
//! scenario sampling.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::kv::KvDoc;
use crate::seed;
use crate::GOAL_COUNT;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot downscale {width}x{height} map to {target}x{target}")]
    Downscale { width: usize, height: usize, target: usize },
    #[error("grid size {0} is not a power of two in 16..=1024")]
    GridSize(usize),
    #[error("largest free component has {found} cells, need at least {needed}")]
    ComponentTooSmall { found: usize, needed: usize },
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

/// A grid cell; `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

impl FromStr for Cell {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s.split_once(',').ok_or_else(|| format!("bad cell {s:?}"))?;
        let x = x.trim().parse().map_err(|_| format!("bad cell {s:?}"))?;
        let y = y.trim().parse().map_err(|_| format!("bad cell {s:?}"))?;
        Ok(Cell { x, y })
    }
}

/// Row-major occupancy grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    name: String,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>, name: impl Into<String>) -> Self {
        assert_eq!(blocked.len(), width * height, "blocked buffer size");
        GridMap {
            width,
            height,
            blocked,
            name: name.into(),
        }
    }

    pub fn open(size: usize, name: impl Into<String>) -> Self {
        GridMap::new(size, size, vec![false; size * size], name)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn blocked_cells(&self) -> &[bool] {
        &self.blocked
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.blocked[self.index(cell)]
    }

    /// True for in-bounds, unblocked cells.
    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.is_blocked(cell)
    }

    pub fn set_blocked(&mut self, cell: Cell, blocked: bool) {
        let i = self.index(cell);
        self.blocked[i] = blocked;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    /// Square, power-of-two side in 16..=1024.
    pub fn is_canonical(&self) -> bool {
        self.width == self.height && is_grid_size(self.width)
    }

    /// Free 4-neighbours in up, down, left, right order.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let Cell { x, y } = cell;
        let up = (y > 0).then(|| Cell::new(x, y - 1));
        let down = (y + 1 < self.height).then(|| Cell::new(x, y + 1));
        let left = (x > 0).then(|| Cell::new(x - 1, y));
        let right = (x + 1 < self.width).then(|| Cell::new(x + 1, y));
        [up, down, left, right]
            .into_iter()
            .flatten()
            .filter(move |&c| !self.is_blocked(c))
    }

    /// Free cells of the largest 4-connected component, in row-major order.
    /// Ties go to the component containing the lowest cell index.
    pub fn largest_component(&self) -> Vec<Cell> {
        let mut label = vec![usize::MAX; self.blocked.len()];
        let mut best: Vec<Cell> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.blocked.len() {
            if self.blocked[start] || label[start] != usize::MAX {
                continue;
            }
            let mut members = Vec::new();
            label[start] = start;
            queue.push_back(self.cell_at(start));
            while let Some(c) = queue.pop_front() {
                members.push(c);
                for n in self.neighbors(c) {
                    let i = self.index(n);
                    if label[i] == usize::MAX {
                        label[i] = start;
                        queue.push_back(n);
                    }
                }
            }
            if members.len() > best.len() {
                best = members;
            }
        }
        best.sort_by_key(|c| self.index(*c));
        best
    }

    /// Renders as MovingAI text with `.` for free and `@` for blocked cells.
    pub fn to_movingai(&self) -> String {
        let mut out = format!("type octile\nheight {}\nwidth {}\nmap\n", self.height, self.width);
        for row in self.blocked.chunks(self.width) {
            out.extend(row.iter().map(|&b| if b { '@' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

pub fn is_grid_size(n: usize) -> bool {
    n.is_power_of_two() && (16..=1024).contains(&n)
}

/// Parses MovingAI `.map` text. Only `.` and `G` are passable.
pub fn parse_movingai(text: &str, name: &str) -> Result<GridMap, MapError> {
    let err = |line: usize, message: String| MapError::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let mut height = None;
    let mut width = None;
    let mut saw_type = false;
    let mut last_line = 0;
    loop {
        let Some((no, line)) = lines.next() else {
            return Err(err(last_line + 1, "missing `map` line".into()));
        };
        last_line = no;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "map" {
            break;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err(no, format!("malformed header line {line:?}")))?;
        let value = value.trim();
        match key {
            "type" => {
                if saw_type {
                    return Err(err(no, "duplicate `type`".into()));
                }
                saw_type = true;
            }
            "height" | "width" => {
                let v: usize = value
                    .parse()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| err(no, format!("bad {key} {value:?}")))?;
                let slot = if key == "height" { &mut height } else { &mut width };
                if slot.replace(v).is_some() {
                    return Err(err(no, format!("duplicate `{key}`")));
                }
            }
            other => return Err(err(no, format!("unknown header key {other:?}"))),
        }
    }
    if !saw_type {
        return Err(err(last_line, "missing `type` header".into()));
    }
    let height = height.ok_or_else(|| err(last_line, "missing `height` header".into()))?;
    let width = width.ok_or_else(|| err(last_line, "missing `width` header".into()))?;

    let mut blocked = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (no, line) in lines {
        if rows == height {
            if line.trim().is_empty() {
                continue;
            }
            return Err(err(no, format!("extra row beyond height {height}")));
        }
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != width {
            return Err(err(no, format!("row has {} cells, expected {width}", chars.len())));
        }
        blocked.extend(chars.iter().map(|&c| !matches!(c, '.' | 'G')));
        rows += 1;
        last_line = no;
    }
    if rows != height {
        return Err(err(last_line + 1, format!("found {rows} rows, header says {height}")));
    }
    Ok(GridMap::new(width, height, blocked, name))
}

/// Downscales to `target`×`target`; a target cell is blocked iff any source
/// cell in its covering rectangle is blocked.
pub fn downscale(map: &GridMap, target: usize) -> Result<GridMap, MapError> {
    if !target.is_power_of_two() || target > map.width || target > map.height {
        return Err(MapError::Downscale {
            width: map.width,
            height: map.height,
            target,
        });
    }
    let span = |i: usize, src: usize| (i * src / target, ((i + 1) * src).div_ceil(target));
    let mut blocked = vec![false; target * target];
    for ty in 0..target {
        let (y0, y1) = span(ty, map.height);
        for tx in 0..target {
            let (x0, x1) = span(tx, map.width);
            blocked[ty * target + tx] =
                (y0..y1).any(|y| map.blocked[y * map.width + x0..y * map.width + x1].contains(&true));
        }
    }
    Ok(GridMap::new(target, target, blocked, map.name.clone()))
}

/// Procedural cave-like map: random fill followed by cellular-automaton
/// smoothing. Cells outside the largest free component are blocked so every
/// free cell is reachable.
pub fn synthetic_map(size: usize, fill: f64, seed_value: u64) -> GridMap {
    let mut rng = seed::rng(seed_value, &[seed::tag::MAP]);
    let mut blocked: Vec<bool> = (0..size * size).map(|_| rng.gen_bool(fill)).collect();
    let at = |b: &[bool], x: isize, y: isize| -> bool {
        if x < 0 || y < 0 || x >= size as isize || y >= size as isize {
            false
        } else {
            b[y as usize * size + x as usize]
        }
    };
    for _ in 0..4 {
        let prev = blocked.clone();
        for y in 0..size as isize {
            for x in 0..size as isize {
                let mut walls = 0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy) != (0, 0) && at(&prev, x + dx, y + dy) {
                            walls += 1;
                        }
                    }
                }
                let i = y as usize * size + x as usize;
                blocked[i] = walls >= 5 || (prev[i] && walls >= 4);
            }
        }
    }
    let mut map = GridMap::new(size, size, blocked, format!("synthetic-{size}-{seed_value}"));
    let keep = map.largest_component();
    let mut only = vec![true; size * size];
    for c in keep {
        only[map.index(c)] = false;
    }
    map.blocked = only;
    map
}

/// A map with a fixed start, ten candidate goals and a designated true goal.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    map: Arc<GridMap>,
    start: Cell,
    goals: Vec<Cell>,
    true_goal: usize,
    seed: Option<u64>,
}

impl Scenario {
    /// Validates all invariants, including reachability of every goal.
    pub fn new(map: Arc<GridMap>, start: Cell, goals: Vec<Cell>, true_goal: usize) -> Result<Self, MapError> {
        let bad = |m: String| Err(MapError::Scenario(m));
        if goals.len() != GOAL_COUNT {
            return bad(format!("need {GOAL_COUNT} goals, got {}", goals.len()));
        }
        if true_goal >= GOAL_COUNT {
            return bad(format!("true goal {true_goal} out of range"));
        }
        if !map.is_free(start) {
            return bad(format!("start {start} is not a free cell"));
        }
        let dist = bfs_reach(&map, start);
        for (i, &g) in goals.iter().enumerate() {
            if !map.is_free(g) {
                return bad(format!("goal {i} at {g} is not a free cell"));
            }
            if g == start {
                return bad(format!("goal {i} equals start"));
            }
            if goals[..i].contains(&g) {
                return bad(format!("goal {i} at {g} is duplicated"));
            }
            if !dist[map.index(g)] {
                return bad(format!("goal {i} at {g} unreachable from start"));
            }
        }
        Ok(Scenario {
            map,
            start,
            goals,
            true_goal,
            seed: None,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn shared_map(&self) -> Arc<GridMap> {
        Arc::clone(&self.map)
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goals(&self) -> &[Cell] {
        &self.goals
    }

    pub fn true_goal(&self) -> usize {
        self.true_goal
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.set("map", self.map.name());
        doc.set("start", self.start);
        for (i, g) in self.goals.iter().enumerate() {
            doc.set(&format!("goal{i}"), g);
        }
        doc.set("true_goal", self.true_goal);
        if let Some(s) = self.seed {
            doc.set("seed", s);
        }
        doc
    }

    /// Rebuilds a scenario from its key=value form against the named map.
    pub fn from_kv(doc: &KvDoc, map: Arc<GridMap>) -> Result<Self, MapError> {
        let field = |k: &str| {
            doc.get(k)
                .ok_or_else(|| MapError::Scenario(format!("missing key {k:?}")))
        };
        let cell = |k: &str| -> Result<Cell, MapError> { field(k)?.parse().map_err(MapError::Scenario) };
        if field("map")? != map.name() {
            return Err(MapError::Scenario(format!(
                "scenario names map {:?}, got {:?}",
                field("map")?,
                map.name()
            )));
        }
        let start = cell("start")?;
        let goals = (0..GOAL_COUNT)
            .map(|i| cell(&format!("goal{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let true_goal = field("true_goal")?
            .parse()
            .map_err(|_| MapError::Scenario("bad true_goal".into()))?;
        let mut sc = Scenario::new(map, start, goals, true_goal)?;
        if let Some(s) = doc.get("seed") {
            sc.seed = Some(s.parse().map_err(|_| MapError::Scenario("bad seed".into()))?);
        }
        Ok(sc)
    }
}

fn bfs_reach(map: &GridMap, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; map.width * map.height];
    let mut queue = VecDeque::from([start]);
    seen[map.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        for n in map.neighbors(c) {
            let i = map.index(n);
            if !seen[i] {
                seen[i] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

/// Samples a start and ten goals uniformly without replacement from the
/// largest free component; the true goal is uniform over the ten.
pub fn sample_scenario(map: Arc<GridMap>, rng_seed: u64) -> Result<Scenario, MapError> {
    let component = map.largest_component();
    let needed = GOAL_COUNT + 1;
    if component.len() < needed {
        return Err(MapError::ComponentTooSmall {
            found: component.len(),
            needed,
        });
    }
    let mut rng = seed::rng(rng_seed, &[seed::tag::SCENARIO]);
    let picks: Vec<Cell> = sample(&mut rng, component.len(), needed)
        .into_iter()
        .map(|i| component[i])
        .collect();
    let true_goal = rng.gen_range(0..GOAL_COUNT);
    let mut sc = Scenario::new(map, picks[0], picks[1..].to_vec(), true_goal)?;
    sc.seed = Some(rng_seed);
    Ok(sc)
}
