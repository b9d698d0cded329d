//! Goal recognition on grid navigation maps with few-shot transfer learning.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`gridworld`] parses MovingAI `.map` files (or synthesizes maps),
//!    downscales them and samples scenarios made of a start and ten goals.
//! 2. [`planner`] produces noisy near-optimal paths with an A* search whose
//!    heuristic over-estimates at random, and truncates them to an
//!    observability prefix.
//! 3. [`encoder`] projects an observation prefix onto a five-channel bitmap.
//! 4. [`nn`] and [`recognizer`] train a seven-block convolutional network on
//!    one scenario, then adapt it to unseen scenarios from a handful of shots
//!    with the first blocks frozen.
//! 5. [`harness`] runs the frozen-block, shot-count and learning-rate sweeps
//!    and emits CSV/SVG reports and activation images.

pub mod dataset;
pub mod encoder;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod kv;
pub mod nn;
pub mod planner;
pub mod recognizer;
pub mod seed;

pub use dataset::{DatasetSpec, Example};
pub use encoder::{encode, Channel, TrailBitmap};
pub use error::{Error, Result};
pub use gridworld::{Cell, GridMap, Scenario};
pub use planner::{astar_noisy, truncate, NoisyHeuristicParams, Path};
pub use recognizer::{Network, TransferConfig};

/// Observability levels used for every stored example set.
pub const OBSERVABILITIES: [u8; 4] = [25, 50, 75, 100];

/// Number of candidate goals per scenario.
pub const GOAL_COUNT: usize = 10;
