//! Python bindings for `spi_core`.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spi_core::fitness::{report_from_samples, simulate_bmd};
use spi_core::learn::EpsilonSchedule;
use spi_core::reward::{self as rw, RewardInputs};
use spi_core::sense::{discretize, encode_state as encode};
use spi_core::{ActionId, Dynamics, Exploration, FitnessConfig, Mode, Pose, RewardWeights, TrainConfig, Vec2};

fn py_err(e: spi_core::Error) -> PyErr {
    match e {
        spi_core::Error::Io(e) => PyIOError::new_err(e.to_string()),
        spi_core::Error::GenerationStall { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn actions(ids: &[u8]) -> PyResult<Vec<ActionId>> {
    ids.iter().map(|&a| ActionId::new(a).map_err(py_err)).collect()
}

/// Arena layout: walls, obstacles, goal and box start.
#[pyclass(module = "spi_boxpush", from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: spi_core::Scenario,
}

#[pymethods]
impl Scenario {
    /// The default 800x600 arena.
    #[new]
    fn new() -> Self {
        Self {
            inner: spi_core::Scenario::default(),
        }
    }

    /// Unbounded empty arena with the box at the origin.
    #[staticmethod]
    fn open_field() -> Self {
        Self {
            inner: spi_core::Scenario::open_field(),
        }
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spi_core::Scenario::parse(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spi_core::Scenario::load(path).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn box_start(&self) -> (f64, f64) {
        (self.inner.box_start.x, self.inner.box_start.y)
    }

    #[getter]
    fn goal(&self) -> (f64, f64, f64) {
        let g = self.inner.goal;
        (g.center.x, g.center.y, g.radius)
    }

    fn add_obstacle(&mut self, x: f64, y: f64, radius: f64) {
        self.inner
            .obstacles
            .push(spi_core::geom::Disc::new(Vec2::new(x, y), radius));
    }

    fn set_goal(&mut self, x: f64, y: f64, radius: f64) {
        self.inner.goal = spi_core::geom::Disc::new(Vec2::new(x, y), radius);
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(arena={}x{}, walls={}, obstacles={})",
            self.inner.arena_width,
            self.inner.arena_height,
            self.inner.walls.len(),
            self.inner.obstacles.len()
        )
    }
}

/// Box pose and step counter.
#[pyclass(module = "spi_boxpush", get_all, from_py_object)]
#[derive(Clone)]
struct State {
    x: f64,
    y: f64,
    heading: f64,
    step_index: u32,
    terminated: bool,
}

impl From<spi_core::WorldState> for State {
    fn from(s: spi_core::WorldState) -> Self {
        Self {
            x: s.pose.position.x,
            y: s.pose.position.y,
            heading: s.pose.heading,
            step_index: s.step_index,
            terminated: s.terminated,
        }
    }
}

impl State {
    fn core(&self) -> spi_core::WorldState {
        spi_core::WorldState {
            pose: Pose::new(Vec2::new(self.x, self.y), self.heading),
            step_index: self.step_index,
            terminated: self.terminated,
        }
    }
}

#[pymethods]
impl State {
    fn __repr__(&self) -> String {
        format!(
            "State(x={:.3}, y={:.3}, heading={:.4}, step_index={}, terminated={})",
            self.x, self.y, self.heading, self.step_index, self.terminated
        )
    }
}

#[pyclass(module = "spi_boxpush")]
struct World {
    inner: spi_core::World,
}

#[pymethods]
impl World {
    #[new]
    #[pyo3(signature = (scenario, k_t = 1.0, k_r = 0.005))]
    fn new(scenario: &Scenario, k_t: f64, k_r: f64) -> Self {
        Self {
            inner: spi_core::World::new(scenario.inner.clone(), Dynamics { k_t, k_r }),
        }
    }

    fn initial_state(&self) -> State {
        self.inner.initial_state().into()
    }

    /// Applies one joint action (action ids 1..=6, one per agent). Returns
    /// `(state, info)` where `info` has displacement, rotation and flags.
    fn step<'py>(&self, py: Python<'py>, state: &State, joint: Vec<u8>, speed_factor: f64) -> PyResult<(State, Bound<'py, PyDict>)> {
        let out = self
            .inner
            .step(&state.core(), &actions(&joint)?, speed_factor)
            .map_err(py_err)?;
        let info = PyDict::new(py);
        info.set_item("displacement", (out.displacement.x, out.displacement.y))?;
        info.set_item("rotation_delta", out.rotation_delta)?;
        info.set_item("collided", out.collided)?;
        info.set_item("reached_goal", out.reached_goal)?;
        info.set_item("timed_out", out.timed_out)?;
        Ok((out.state.into(), info))
    }

    fn max_step_displacement(&self, n_agents: usize, speed_factor: f64) -> f64 {
        self.inner.max_step_displacement(n_agents, speed_factor)
    }
}

/// Nine-element sensor vector: eight octant bits then the scaled goal bearing.
#[pyfunction]
fn encode_state(scenario: &Scenario, x: f64, y: f64, heading: f64) -> Vec<f64> {
    encode(&scenario.inner, &Pose::new(Vec2::new(x, y), heading))
        .to_array()
        .to_vec()
}

/// Discrete state index of a pose.
#[pyfunction]
#[pyo3(signature = (scenario, x, y, heading, angle_bins = 8))]
fn state_index(scenario: &Scenario, x: f64, y: f64, heading: f64, angle_bins: usize) -> PyResult<usize> {
    let sv = encode(&scenario.inner, &Pose::new(Vec2::new(x, y), heading));
    Ok(discretize(&sv, angle_bins).map_err(py_err)?.0)
}

/// Indexed collection of action distributions shared by all agents.
#[pyclass(module = "spi_boxpush", from_py_object)]
#[derive(Clone)]
struct SpiMap {
    inner: spi_core::SpiMap,
}

#[pymethods]
impl SpiMap {
    #[staticmethod]
    #[pyo3(signature = (n_pdls = 4000, cap = 0.1, margin = 0.3, seed = 0))]
    fn build(n_pdls: usize, cap: f64, margin: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: spi_core::SpiMap::build(n_pdls, cap, margin, seed).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spi_core::SpiMap::load(path).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    fn check(&self) -> PyResult<()> {
        self.inner.check_structure().map_err(py_err)
    }

    fn pdl(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .pdls()
            .get(index)
            .map(|p| p.probs().to_vec())
            .ok_or_else(|| PyValueError::new_err(format!("index {index} out of range")))
    }

    #[getter]
    fn cap(&self) -> f64 {
        self.inner.cap
    }

    #[getter]
    fn margin(&self) -> f64 {
        self.inner.margin
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpiMap(n_pdls={}, cap={}, margin={}, seed={})",
            self.inner.len(),
            self.inner.cap,
            self.inner.margin,
            self.inner.seed
        )
    }
}

/// One-step fitness of random exploration (`map=None`) or of a map.
#[pyfunction]
#[pyo3(signature = (map = None, n_agents = 15, n_sims = 100_000, n_bins = None, speed_factor = 1.0, seed = 0))]
fn fitness_report<'py>(
    py: Python<'py>,
    map: Option<&SpiMap>,
    n_agents: usize,
    n_sims: usize,
    n_bins: Option<usize>,
    speed_factor: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = FitnessConfig {
        n_agents,
        n_sims,
        n_bins,
        speed_factor,
        ..Default::default()
    };
    let policy = match map {
        Some(m) => Exploration::Spi(&m.inner),
        None => Exploration::Random,
    };
    let r = py
        .detach(|| simulate_bmd(policy, &cfg, seed).and_then(|s| report_from_samples(&s, &cfg)))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("mode", policy.label())?;
    d.set_item("origin_avoidance", r.origin_avoidance)?;
    d.set_item("angular_spread", r.angular_spread)?;
    d.set_item("raw_cv", r.raw_cv)?;
    d.set_item("n_sims", r.n_sims)?;
    d.set_item("n_bins", r.n_bins)?;
    Ok(d)
}

/// Trains one run and returns per-episode records as dicts.
#[pyfunction]
#[pyo3(signature = (
    mode = "spi", episodes = 1000, speed_factor = 1.0 / 3.0, seed = 0, n_agents = 15,
    max_steps = 300, alpha = 0.1, gamma = 0.95, scenario = None,
))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    mode: &str,
    episodes: usize,
    speed_factor: f64,
    seed: u64,
    n_agents: usize,
    max_steps: u32,
    alpha: f64,
    gamma: f64,
    scenario: Option<&Scenario>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mode: Mode = mode.parse().map_err(py_err)?;
    let cfg = TrainConfig {
        mode,
        episodes,
        speed_factor,
        seed,
        n_agents,
        max_steps,
        alpha,
        gamma,
        epsilon: EpsilonSchedule::default(),
        ..Default::default()
    };
    let scenario = scenario.map(|s| s.inner.clone()).unwrap_or_default();
    let log = py.detach(|| spi_core::train(&cfg, &scenario)).map_err(py_err)?;
    log.records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("episode_index", r.episode_index)?;
            d.set_item("outcome", r.outcome.to_string())?;
            d.set_item("steps", r.steps)?;
            d.set_item("total_reward", r.total_reward)?;
            d.set_item("epsilon", r.epsilon)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn distance_reward(d_old: f64, d_new: f64) -> PyResult<f64> {
    rw::distance_reward(d_old, d_new).map_err(py_err)
}

#[pyfunction]
fn rotation_reward(alpha_old: f64, alpha_new: f64) -> f64 {
    rw::rotation_reward(alpha_old, alpha_new)
}

#[pyfunction]
fn collision_reward(collided: bool) -> f64 {
    rw::collision_reward(collided)
}

#[pyfunction]
fn goal_reward(reached: bool) -> f64 {
    rw::goal_reward(reached)
}

/// Weighted sum of the four reward terms.
#[pyfunction]
#[pyo3(signature = (d_old, d_new, alpha_old, alpha_new, collided = false, reached_goal = false, weights = (2.0, 1.0, 1.0, 1.0)))]
fn total_reward(
    d_old: f64,
    d_new: f64,
    alpha_old: f64,
    alpha_new: f64,
    collided: bool,
    reached_goal: bool,
    weights: (f64, f64, f64, f64),
) -> PyResult<f64> {
    let inputs = RewardInputs {
        d_old,
        d_new,
        alpha_old,
        alpha_new,
        collided,
        reached_goal,
    };
    let (w1, w2, w3, w4) = weights;
    let w = RewardWeights { w1, w2, w3, w4 };
    Ok(rw::total_reward(&inputs, &w).map_err(py_err)?.total)
}

#[pymodule]
fn spi_boxpush(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<State>()?;
    m.add_class::<World>()?;
    m.add_class::<SpiMap>()?;
    m.add_function(wrap_pyfunction!(encode_state, m)?)?;
    m.add_function(wrap_pyfunction!(state_index, m)?)?;
    m.add_function(wrap_pyfunction!(fitness_report, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(distance_reward, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_reward, m)?)?;
    m.add_function(wrap_pyfunction!(collision_reward, m)?)?;
    m.add_function(wrap_pyfunction!(goal_reward, m)?)?;
    m.add_function(wrap_pyfunction!(total_reward, m)?)?;
    Ok(())
}
