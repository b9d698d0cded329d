//! Five-channel stacked-trail bitmaps and their PPM rendering.

use std::collections::HashSet;

use thiserror::Error;

use crate::gridworld::{Cell, Scenario};

#[derive(Debug, Error, PartialEq)]
pub enum EncodeError {
    #[error("observation {0} lies outside the map")]
    OutOfBounds(Cell),
    #[error("observation {0} lies on a blocked cell")]
    Blocked(Cell),
    #[error("map must be square, got {width}x{height}")]
    NotSquare { width: usize, height: usize },
    #[error("channel index {0} out of range")]
    Channel(u8),
}

/// Channel order of the network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Channel {
    Obstacle = 0,
    Observation = 1,
    Start = 2,
    Goal = 3,
    Free = 4,
}

impl Channel {
    pub const COUNT: usize = 5;
    pub const ALL: [Channel; 5] = [
        Channel::Obstacle,
        Channel::Observation,
        Channel::Start,
        Channel::Goal,
        Channel::Free,
    ];

    pub fn from_index(i: u8) -> Option<Channel> {
        Channel::ALL.get(i as usize).copied()
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            Channel::Obstacle => [0x00, 0x00, 0x00],
            Channel::Observation => [0xff, 0xff, 0xff],
            Channel::Start => [0xff, 0x00, 0x00],
            Channel::Goal => [0x00, 0xff, 0x00],
            Channel::Free => [0x80, 0x80, 0x80],
        }
    }
}

/// Where goal markers sit in the precedence cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoalPrecedence {
    /// obstacle > observation > start > goal > free.
    #[default]
    Low,
    /// obstacle > goal > observation > start > free; goal markers stay
    /// visible under the trail.
    High,
}

/// N×N one-hot bitmap, stored as one channel index per cell (row-major).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrailBitmap {
    size: usize,
    cells: Vec<u8>,
}

impl TrailBitmap {
    pub fn from_indices(size: usize, cells: Vec<u8>) -> Result<Self, EncodeError> {
        assert_eq!(cells.len(), size * size, "bitmap buffer size");
        if let Some(&bad) = cells.iter().find(|&&c| c as usize >= Channel::COUNT) {
            return Err(EncodeError::Channel(bad));
        }
        Ok(TrailBitmap { size, cells })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn indices(&self) -> &[u8] {
        &self.cells
    }

    pub fn channel_at(&self, cell: Cell) -> Channel {
        Channel::from_index(self.cells[cell.y * self.size + cell.x]).expect("validated channel")
    }

    pub fn count(&self, channel: Channel) -> usize {
        self.cells.iter().filter(|&&c| c == channel as u8).count()
    }

    /// Dense `[5, N, N]` planes of 0/1 values.
    pub fn planes(&self) -> Vec<f64> {
        let area = self.size * self.size;
        let mut out = vec![0.0; Channel::COUNT * area];
        self.write_planes(&mut out);
        out
    }

    pub fn write_planes(&self, out: &mut [f64]) {
        let area = self.size * self.size;
        out.fill(0.0);
        for (i, &c) in self.cells.iter().enumerate() {
            out[c as usize * area + i] = 1.0;
        }
    }
}

pub fn encode(scenario: &Scenario, observations: &[Cell]) -> Result<TrailBitmap, EncodeError> {
    encode_with(scenario, observations, GoalPrecedence::Low)
}

/// Projects the observations and the scenario onto a bitmap. Repeated
/// observations collapse into one marked cell.
pub fn encode_with(
    scenario: &Scenario,
    observations: &[Cell],
    precedence: GoalPrecedence,
) -> Result<TrailBitmap, EncodeError> {
    let map = scenario.map();
    if map.width() != map.height() {
        return Err(EncodeError::NotSquare {
            width: map.width(),
            height: map.height(),
        });
    }
    for &o in observations {
        if !map.in_bounds(o) {
            return Err(EncodeError::OutOfBounds(o));
        }
        if map.is_blocked(o) {
            return Err(EncodeError::Blocked(o));
        }
    }
    let n = map.width();
    let mut cells = vec![Channel::Free as u8; n * n];
    // Paint lowest precedence first so later layers overwrite.
    let mut paint = |cell: Cell, ch: Channel| cells[cell.y * n + cell.x] = ch as u8;
    let goals = || scenario.goals().iter().copied();
    if precedence == GoalPrecedence::Low {
        goals().for_each(|g| paint(g, Channel::Goal));
    }
    paint(scenario.start(), Channel::Start);
    observations.iter().for_each(|&o| paint(o, Channel::Observation));
    if precedence == GoalPrecedence::High {
        goals().for_each(|g| paint(g, Channel::Goal));
    }
    for (i, &b) in map.blocked_cells().iter().enumerate() {
        if b {
            cells[i] = Channel::Obstacle as u8;
        }
    }
    Ok(TrailBitmap { size: n, cells })
}

/// Number of distinct observation cells.
pub fn unique_observations(observations: &[Cell]) -> usize {
    observations.iter().collect::<HashSet<_>>().len()
}

/// Binary PPM (P6): black walls, gray free, white trail, red start, green
/// goals.
pub fn render_ppm(bitmap: &TrailBitmap) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", bitmap.size, bitmap.size);
    let mut out = Vec::with_capacity(header.len() + 3 * bitmap.cells.len());
    out.extend_from_slice(header.as_bytes());
    for &c in &bitmap.cells {
        out.extend_from_slice(&Channel::from_index(c).expect("validated channel").rgb());
    }
    out
}
