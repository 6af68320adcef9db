//! Independent tabular Q-learners, one per agent, sharing a single reward.
//!
//! Exploitation is plain argmax. Only the exploration branch differs between
//! modes: uniform over the six actions, or a draw from the distribution the
//! shared key selects for this step.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::substream;
use crate::reward::{total_reward, RewardInputs, RewardWeights};
use crate::sense::{discretize, encode_state, goal_bearing, n_states, DiscreteState};
use crate::spi::{Key, SpiMap};
use crate::world::{ActionId, Dynamics, Scenario, World, N_ACTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spi,
    Random,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Spi => "spi",
            Mode::Random => "random",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spi" => Ok(Mode::Spi),
            "random" => Ok(Mode::Random),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize) -> Self {
        Self {
            n_states,
            values: vec![0.0; n_states * N_ACTIONS],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    fn check(&self, s: DiscreteState) -> Result<()> {
        if s.0 < self.n_states {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "state {} outside table of {} states",
                s.0, self.n_states
            )))
        }
    }

    pub fn row(&self, s: DiscreteState) -> &[f64] {
        &self.values[s.0 * N_ACTIONS..(s.0 + 1) * N_ACTIONS]
    }

    pub fn row_mut(&mut self, s: DiscreteState) -> &mut [f64] {
        &mut self.values[s.0 * N_ACTIONS..(s.0 + 1) * N_ACTIONS]
    }

    pub fn get(&self, s: DiscreteState, a: ActionId) -> f64 {
        self.row(s)[a.index()]
    }

    pub fn set(&mut self, s: DiscreteState, a: ActionId, v: f64) {
        self.row_mut(s)[a.index()] = v;
    }

    /// Greedy action; ties go to the lowest action id.
    pub fn greedy(&self, s: DiscreteState) -> ActionId {
        let row = self.row(s);
        let mut best = 0;
        for i in 1..N_ACTIONS {
            if row[i] > row[best] {
                best = i;
            }
        }
        ActionId::ALL[best]
    }

    pub fn max_value(&self, s: DiscreteState) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// What an exploring agent may consult.
#[derive(Debug, Clone, Copy)]
pub enum ExploreContext<'a> {
    Random,
    Spi { map: &'a SpiMap, key: Option<Key> },
}

pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    s: DiscreteState,
    epsilon: f64,
    explore: ExploreContext<'_>,
    rng: &mut R,
) -> Result<ActionId> {
    q.check(s)?;
    if let ExploreContext::Spi { key: None, .. } = explore {
        return Err(Error::ContractViolation(
            "spi exploration needs the current step's key".into(),
        ));
    }
    if !(rng.random::<f64>() < epsilon) {
        return Ok(q.greedy(s));
    }
    match explore {
        ExploreContext::Random => Ok(ActionId::ALL[rng.random_range(0..N_ACTIONS)]),
        ExploreContext::Spi { map, key: Some(k) } => Ok(map.lookup(k)?.sample(rng)),
        ExploreContext::Spi { key: None, .. } => unreachable!(),
    }
}

/// One-step temporal-difference update.
#[allow(clippy::too_many_arguments)]
pub fn q_update(
    q: &mut QTable,
    s: DiscreteState,
    a: ActionId,
    reward: f64,
    s_next: DiscreteState,
    terminal: bool,
    alpha: f64,
    gamma: f64,
) -> Result<()> {
    q.check(s)?;
    q.check(s_next)?;
    let bootstrap = if terminal { 0.0 } else { q.max_value(s_next) };
    let old = q.get(s, a);
    q.set(s, a, old + alpha * (reward + gamma * bootstrap - old));
    Ok(())
}

/// Linear decay from `start` to `end` over the first `decay_fraction` of
/// training, then flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.8,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize, episodes: usize) -> f64 {
        let horizon = (self.decay_fraction * episodes as f64).max(1.0);
        let t = (episode as f64 / horizon).min(1.0);
        self.start + (self.end - self.start) * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_agents: usize,
    pub episodes: usize,
    pub max_steps: u32,
    pub speed_factor: f64,
    pub mode: Mode,
    pub n_pdls: usize,
    pub cap: f64,
    pub margin: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub angle_bins: usize,
    pub weights: RewardWeights,
    pub dynamics: Dynamics,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_agents: 15,
            episodes: 1000,
            max_steps: 300,
            speed_factor: 1.0 / 3.0,
            mode: Mode::Spi,
            n_pdls: crate::spi::DEFAULT_N_PDLS,
            cap: crate::spi::DEFAULT_CAP,
            margin: crate::spi::DEFAULT_MARGIN,
            alpha: 0.1,
            gamma: 0.95,
            epsilon: EpsilonSchedule::default(),
            angle_bins: crate::sense::DEFAULT_ANGLE_BINS,
            weights: RewardWeights::default(),
            dynamics: Dynamics::default(),
            seed: 0,
        }
    }
}

fn unit_interval(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let lower_ok = if allow_zero { v >= 0.0 } else { v > 0.0 };
    if lower_ok && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name}={v} outside the unit interval")))
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(Error::invalid("n_agents must be at least 1"));
        }
        if self.episodes == 0 {
            return Err(Error::invalid("episodes must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        if self.angle_bins == 0 {
            return Err(Error::invalid("angle_bins must be at least 1"));
        }
        unit_interval("speed_factor", self.speed_factor, false)?;
        unit_interval("alpha", self.alpha, false)?;
        unit_interval("gamma", self.gamma, false)?;
        unit_interval("epsilon.start", self.epsilon.start, true)?;
        unit_interval("epsilon.end", self.epsilon.end, true)?;
        unit_interval("epsilon.decay_fraction", self.epsilon.decay_fraction, false)?;
        self.weights.validate()?;
        if self.mode == Mode::Spi && self.n_pdls <= self.n_agents {
            return Err(Error::invalid(format!(
                "map of {} PDLs must be larger than the {} agents",
                self.n_pdls, self.n_agents
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Outcome::Success),
            "collision" => Ok(Outcome::Collision),
            "timeout" => Ok(Outcome::Timeout),
            other => Err(Error::invalid(format!("unknown outcome {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_index: usize,
    pub outcome: Outcome,
    pub steps: u32,
    pub total_reward: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub config: TrainConfig,
    pub records: Vec<EpisodeRecord>,
    pub q_tables: Vec<QTable>,
}

/// Plays one episode from the scenario start, updating every agent's table
/// online. `map` must be present in SPI mode.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<R: Rng + ?Sized>(
    world: &World,
    agents: &mut [QTable],
    config: &TrainConfig,
    map: Option<&SpiMap>,
    epsilon: f64,
    episode_index: usize,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    if agents.is_empty() {
        return Err(Error::invalid("episode needs at least one agent"));
    }
    let map = match (config.mode, map) {
        (Mode::Spi, None) => {
            return Err(Error::ContractViolation("spi mode requires a map".into()))
        }
        (Mode::Spi, Some(m)) => Some(m),
        (Mode::Random, _) => None,
    };
    let scenario = &world.scenario;
    let mut state = world.initial_state();
    let mut s = discretize(&encode_state(scenario, &state.pose), config.angle_bins)?;
    let mut joint = vec![ActionId::ALL[0]; agents.len()];
    let mut total = 0.0;

    loop {
        let explore = match map {
            Some(m) => ExploreContext::Spi {
                map: m,
                key: Some(m.draw_key(rng)),
            },
            None => ExploreContext::Random,
        };
        for (slot, q) in joint.iter_mut().zip(agents.iter()) {
            *slot = select_action(q, s, epsilon, explore, rng)?;
        }
        let out = world.step(&state, &joint, config.speed_factor)?;
        let inputs = RewardInputs {
            d_old: (state.pose.position - scenario.goal.center).norm(),
            d_new: (out.state.pose.position - scenario.goal.center).norm(),
            alpha_old: goal_bearing(scenario, &state.pose),
            alpha_new: goal_bearing(scenario, &out.state.pose),
            collided: out.collided,
            reached_goal: out.reached_goal,
        };
        let r = total_reward(&inputs, &config.weights)?.total;
        total += r;
        let s_next = discretize(&encode_state(scenario, &out.state.pose), config.angle_bins)?;
        let terminal = out.terminal();
        for (q, &a) in agents.iter_mut().zip(&joint) {
            q_update(q, s, a, r, s_next, terminal, config.alpha, config.gamma)?;
        }
        state = out.state;
        s = s_next;
        if terminal {
            let outcome = if out.reached_goal {
                Outcome::Success
            } else if out.collided {
                Outcome::Collision
            } else {
                Outcome::Timeout
            };
            return Ok(EpisodeRecord {
                episode_index,
                outcome,
                steps: state.step_index,
                total_reward: total,
                epsilon,
            });
        }
    }
}

/// Substream reserved for map construction inside [`train`].
const MAP_SEED_SALT: u64 = 0x5b1_a5e5;

pub fn train(config: &TrainConfig, scenario: &Scenario) -> Result<TrainingLog> {
    config.validate()?;
    let mut scenario = scenario.clone();
    scenario.max_steps = config.max_steps;
    scenario.validate()?;
    let world = World::new(scenario, config.dynamics);
    let map = match config.mode {
        Mode::Spi => Some(SpiMap::build(
            config.n_pdls,
            config.cap,
            config.margin,
            config.seed ^ MAP_SEED_SALT,
        )?),
        Mode::Random => None,
    };
    let mut agents = vec![QTable::new(n_states(config.angle_bins)); config.n_agents];
    let mut records = Vec::with_capacity(config.episodes);
    for e in 0..config.episodes {
        let eps = config.epsilon.at(e, config.episodes);
        let mut rng = substream(config.seed, e as u64 + 1);
        records.push(run_episode(
            &world,
            &mut agents,
            config,
            map.as_ref(),
            eps,
            e,
            &mut rng,
        )?);
    }
    Ok(TrainingLog {
        config: *config,
        records,
        q_tables: agents,
    })
}
