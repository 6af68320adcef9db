//! Multi-agent box pushing with shared-pool-of-information exploration.
//!
//! Agents push a square box towards a goal while avoiding walls and
//! obstacles. Each agent learns its own Q-table; when exploring, agents
//! either pick uniformly at random or all consult the same distribution
//! selected by a shared per-step key, which keeps their pushes aligned
//! without any communication.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitness;
pub mod geom;
pub mod harness;
pub mod learn;
pub mod reward;
pub mod sense;
pub mod spi;
pub mod world;

pub use error::{Error, Result};
pub use fitness::{fitness_report, BmdSample, FitnessConfig, FitnessReport};
pub use geom::Vec2;
pub use learn::{train, EpisodeRecord, Mode, Outcome, QTable, TrainConfig, TrainingLog};
pub use reward::{RewardBreakdown, RewardWeights};
pub use sense::{DiscreteState, StateVector};
pub use spi::{Exploration, Key, Pdl, SpiMap};
pub use world::{ActionId, Dynamics, Pose, Scenario, StepOutcome, World, WorldState};
