//! Arena geometry and box kinematics.
//!
//! Agents are not bodies: each one picks a region of the box and pushes. The
//! six regions sit around the square as follows:
//!
//! ```text
//!            5     6
//!          +-----+-----+
//!          |           |
//!        1 |     o---> | 4        x to the right, y up (box frame)
//!          |           |
//!          +-----+-----+
//!            2     3
//! ```
//!
//! Pairs (2, 3) and (5, 6) push in the same direction and only differ in
//! torque, so the six actions collapse onto four translation directions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Disc, OrientedSquare, Segment, Vec2};

pub const N_ACTIONS: usize = 6;

/// One of the six push regions, `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ActionId(u8);

impl ActionId {
    pub const ALL: [ActionId; N_ACTIONS] = [
        ActionId(1),
        ActionId(2),
        ActionId(3),
        ActionId(4),
        ActionId(5),
        ActionId(6),
    ];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=N_ACTIONS as u8).contains(&id) {
            Ok(ActionId(id))
        } else {
            Err(Error::invalid(format!("action id {id} outside 1..=6")))
        }
    }

    /// Builds an action from a zero-based column index.
    pub fn from_index(index: usize) -> Result<Self> {
        if index < N_ACTIONS {
            Ok(ActionId(index as u8 + 1))
        } else {
            Err(Error::invalid(format!("action index {index} outside 0..6")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based column index (`id - 1`).
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    /// The action pushing the opposite way (1<->4, 2<->5, 3<->6).
    pub fn opposite(self) -> ActionId {
        ActionId((self.0 + 2) % 6 + 1)
    }
}

impl TryFrom<u8> for ActionId {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        ActionId::new(v)
    }
}

impl From<ActionId> for u8 {
    fn from(a: ActionId) -> u8 {
        a.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Force geometry of a push region, in the box frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionForce {
    /// Unit push direction.
    pub direction: Vec2,
    /// Application point relative to the box centre.
    pub offset: Vec2,
}

impl RegionForce {
    pub fn torque(&self) -> f64 {
        self.offset.cross(self.direction)
    }
}

/// Fixed local-frame force for `action` on a box of side `side`.
pub fn region_force(action: ActionId, side: f64) -> RegionForce {
    let h = side / 2.0;
    let q = side / 4.0;
    let (direction, offset) = match action.get() {
        1 => (Vec2::new(1.0, 0.0), Vec2::new(-h, 0.0)),
        2 => (Vec2::new(0.0, 1.0), Vec2::new(-q, -h)),
        3 => (Vec2::new(0.0, 1.0), Vec2::new(q, -h)),
        4 => (Vec2::new(-1.0, 0.0), Vec2::new(h, 0.0)),
        5 => (Vec2::new(0.0, -1.0), Vec2::new(-q, h)),
        6 => (Vec2::new(0.0, -1.0), Vec2::new(q, h)),
        _ => unreachable!("ActionId is always within 1..=6"),
    };
    RegionForce { direction, offset }
}

/// Net local force and torque of a joint action.
pub fn net_force(joint: &[ActionId], side: f64) -> (Vec2, f64) {
    joint.iter().fold((Vec2::ZERO, 0.0), |(f, t), &a| {
        let rf = region_force(a, side);
        (f + rf.direction, t + rf.torque())
    })
}

/// Translation and rotation gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// Pixels per unit of net force.
    pub k_t: f64,
    /// Radians per unit of net torque.
    pub k_r: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self { k_t: 1.0, k_r: 0.005 }
    }
}

impl Dynamics {
    pub fn max_step_displacement(&self, n_agents: usize, speed_factor: f64) -> f64 {
        speed_factor * self.k_t * n_agents as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub arena_width: f64,
    pub arena_height: f64,
    pub walls: Vec<Segment>,
    pub obstacles: Vec<Disc>,
    pub goal: Disc,
    pub box_start: Vec2,
    pub box_heading_start: f64,
    pub box_side: f64,
    pub sensor_radius: f64,
    pub max_steps: u32,
}

pub const DEFAULT_BOX_SIDE: f64 = 40.0;
pub const DEFAULT_SENSOR_RADIUS: f64 = 150.0;
pub const DEFAULT_MAX_STEPS: u32 = 300;

fn border_walls(w: f64, h: f64) -> Vec<Segment> {
    let c = [
        Vec2::new(0.0, 0.0),
        Vec2::new(w, 0.0),
        Vec2::new(w, h),
        Vec2::new(0.0, h),
    ];
    (0..4).map(|i| Segment::new(c[i], c[(i + 1) % 4])).collect()
}

impl Default for Scenario {
    /// 800x600 bordered arena with one obstacle between the box and the goal.
    fn default() -> Self {
        Self {
            arena_width: 800.0,
            arena_height: 600.0,
            walls: border_walls(800.0, 600.0),
            obstacles: vec![Disc::new(Vec2::new(400.0, 300.0), 50.0)],
            goal: Disc::new(Vec2::new(650.0, 300.0), 30.0),
            box_start: Vec2::new(150.0, 300.0),
            box_heading_start: 0.0,
            box_side: DEFAULT_BOX_SIDE,
            sensor_radius: DEFAULT_SENSOR_RADIUS,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl Scenario {
    /// Wall-free, obstacle-free arena with the box at the origin and the goal
    /// far out of reach. Used for one-step movement sampling.
    pub fn open_field() -> Self {
        Self {
            arena_width: 1e9,
            arena_height: 1e9,
            walls: Vec::new(),
            obstacles: Vec::new(),
            goal: Disc::new(Vec2::new(1e9, 1e9), 1.0),
            box_start: Vec2::ZERO,
            box_heading_start: 0.0,
            box_side: DEFAULT_BOX_SIDE,
            sensor_radius: DEFAULT_SENSOR_RADIUS,
            max_steps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("arena_width", self.arena_width),
            ("arena_height", self.arena_height),
            ("box_side", self.box_side),
            ("goal radius", self.goal.radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.obstacles.iter().any(|o| !(o.radius > 0.0)) {
            return Err(Error::invalid("obstacle radius must be positive"));
        }
        if !(self.sensor_radius > self.box_side) {
            return Err(Error::invalid(format!(
                "sensor_radius {} must exceed box_side {}",
                self.sensor_radius, self.box_side
            )));
        }
        if self.max_steps < 1 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        for w in &self.walls {
            let d = w.distance_to_point(self.box_start);
            if d < self.box_side {
                return Err(Error::invalid(format!(
                    "box_start is {d:.3} px from a wall, needs at least {}",
                    self.box_side
                )));
            }
        }
        for o in &self.obstacles {
            let d = (o.center - self.box_start).norm() - o.radius;
            if d < self.box_side {
                return Err(Error::invalid(format!(
                    "box_start is {d:.3} px from an obstacle, needs at least {}",
                    self.box_side
                )));
            }
        }
        Ok(())
    }

    /// Parses the `key=value` scenario format. Repeated `wall` and `obstacle`
    /// keys accumulate; every other key may appear once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut width = None;
        let mut height = None;
        let mut goal = None;
        let mut box_start = None;
        let mut heading = None;
        let mut side = None;
        let mut sensor = None;
        let mut max_steps = None;
        let mut walls = Vec::new();
        let mut obstacles = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let nums = |n: usize| -> Result<Vec<f64>> {
                let parts = value
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::parse(line_no, format!("{key}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if parts.len() != n || parts.iter().any(|v| !v.is_finite()) {
                    return Err(Error::parse(
                        line_no,
                        format!("{key} expects {n} finite numbers"),
                    ));
                }
                Ok(parts)
            };
            let once = |slot_set: bool| -> Result<()> {
                if slot_set {
                    Err(Error::parse(line_no, format!("duplicate key {key}")))
                } else {
                    Ok(())
                }
            };
            match key {
                "arena_width" => {
                    once(width.is_some())?;
                    width = Some(nums(1)?[0]);
                }
                "arena_height" => {
                    once(height.is_some())?;
                    height = Some(nums(1)?[0]);
                }
                "box_heading_start" => {
                    once(heading.is_some())?;
                    heading = Some(nums(1)?[0]);
                }
                "box_side" => {
                    once(side.is_some())?;
                    side = Some(nums(1)?[0]);
                }
                "sensor_radius" => {
                    once(sensor.is_some())?;
                    sensor = Some(nums(1)?[0]);
                }
                "max_steps" => {
                    once(max_steps.is_some())?;
                    max_steps = Some(
                        value
                            .parse::<u32>()
                            .map_err(|e| Error::parse(line_no, format!("max_steps: {e}")))?,
                    );
                }
                "box_start" => {
                    once(box_start.is_some())?;
                    let v = nums(2)?;
                    box_start = Some(Vec2::new(v[0], v[1]));
                }
                "goal" => {
                    once(goal.is_some())?;
                    let v = nums(3)?;
                    goal = Some(Disc::new(Vec2::new(v[0], v[1]), v[2]));
                }
                "obstacle" => {
                    let v = nums(3)?;
                    obstacles.push(Disc::new(Vec2::new(v[0], v[1]), v[2]));
                }
                "wall" => {
                    let v = nums(4)?;
                    walls.push(Segment::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3])));
                }
                other => return Err(Error::parse(line_no, format!("unknown key {other:?}"))),
            }
        }

        let missing = |name: &str| Error::parse(0, format!("missing required key {name}"));
        let scenario = Scenario {
            arena_width: width.ok_or_else(|| missing("arena_width"))?,
            arena_height: height.ok_or_else(|| missing("arena_height"))?,
            walls,
            obstacles,
            goal: goal.ok_or_else(|| missing("goal"))?,
            box_start: box_start.ok_or_else(|| missing("box_start"))?,
            box_heading_start: heading.unwrap_or(0.0),
            box_side: side.unwrap_or(DEFAULT_BOX_SIDE),
            sensor_radius: sensor.unwrap_or(DEFAULT_SENSOR_RADIUS),
            max_steps: max_steps.unwrap_or(DEFAULT_MAX_STEPS),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        push(format!("arena_width={}", self.arena_width));
        push(format!("arena_height={}", self.arena_height));
        for w in &self.walls {
            push(format!("wall={},{},{},{}", w.a.x, w.a.y, w.b.x, w.b.y));
        }
        for o in &self.obstacles {
            push(format!("obstacle={},{},{}", o.center.x, o.center.y, o.radius));
        }
        push(format!(
            "goal={},{},{}",
            self.goal.center.x, self.goal.center.y, self.goal.radius
        ));
        push(format!("box_start={},{}", self.box_start.x, self.box_start.y));
        push(format!("box_heading_start={}", self.box_heading_start));
        push(format!("box_side={}", self.box_side));
        push(format!("sensor_radius={}", self.sensor_radius));
        push(format!("max_steps={}", self.max_steps));
        out
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::parse(s)
    }
}

/// Box position and heading (`[0, 2π)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn to_local(&self, p: Vec2) -> Vec2 {
        (p - self.position).rotate(-self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub pose: Pose,
    pub step_index: u32,
    pub terminated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: WorldState,
    pub displacement: Vec2,
    pub rotation_delta: f64,
    pub collided: bool,
    pub reached_goal: bool,
    pub timed_out: bool,
}

impl StepOutcome {
    pub fn terminal(&self) -> bool {
        self.collided || self.reached_goal || self.timed_out
    }
}

/// A scenario together with its dynamics constants.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub scenario: Scenario,
    pub dynamics: Dynamics,
}

impl World {
    pub fn new(scenario: Scenario, dynamics: Dynamics) -> Self {
        Self { scenario, dynamics }
    }

    pub fn initial_state(&self) -> WorldState {
        WorldState {
            pose: Pose::new(self.scenario.box_start, self.scenario.box_heading_start),
            step_index: 0,
            terminated: false,
        }
    }

    fn footprint(&self, pose: &Pose) -> OrientedSquare {
        OrientedSquare {
            center: pose.position,
            heading: pose.heading,
            side: self.scenario.box_side,
        }
    }

    pub fn detect_collision(&self, pose: &Pose) -> bool {
        let sq = self.footprint(pose);
        self.scenario.obstacles.iter().any(|o| sq.intersects_disc(o))
            || self.scenario.walls.iter().any(|w| sq.intersects_segment(w))
    }

    pub fn check_goal(&self, pose: &Pose) -> bool {
        self.footprint(pose).intersects_disc(&self.scenario.goal)
    }

    pub fn max_step_displacement(&self, n_agents: usize, speed_factor: f64) -> f64 {
        self.dynamics.max_step_displacement(n_agents, speed_factor)
    }

    /// Advances one step under the joint push of every agent.
    ///
    /// Forces are summed in the box frame and rotated into the world by the
    /// pre-step heading. Goal contact wins over collision when both occur.
    pub fn step(
        &self,
        state: &WorldState,
        joint: &[ActionId],
        speed_factor: f64,
    ) -> Result<StepOutcome> {
        if state.terminated {
            return Err(Error::ContractViolation(
                "step called on a terminated episode".into(),
            ));
        }
        if joint.is_empty() {
            return Err(Error::invalid("joint action has no agents"));
        }
        if !(speed_factor > 0.0 && speed_factor <= 1.0) {
            return Err(Error::invalid(format!(
                "speed_factor {speed_factor} outside (0, 1]"
            )));
        }
        let (force, torque) = net_force(joint, self.scenario.box_side);
        let displacement = force.rotate(state.pose.heading) * (speed_factor * self.dynamics.k_t);
        let rotation_delta = speed_factor * self.dynamics.k_r * torque;
        let pose = Pose::new(
            state.pose.position + displacement,
            state.pose.heading + rotation_delta,
        );
        let step_index = state.step_index + 1;
        let reached_goal = self.check_goal(&pose);
        let collided = !reached_goal && self.detect_collision(&pose);
        let timed_out = !reached_goal && !collided && step_index >= self.scenario.max_steps;
        Ok(StepOutcome {
            state: WorldState {
                pose,
                step_index,
                terminated: reached_goal || collided || timed_out,
            },
            displacement,
            rotation_delta,
            collided,
            reached_goal,
            timed_out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(id: u8) -> ActionId {
        ActionId::new(id).unwrap()
    }

    fn open_world() -> World {
        World::new(Scenario::open_field(), Dynamics::default())
    }

    #[test]
    fn action_ids_are_bounded() {
        assert!(ActionId::new(0).is_err());
        assert!(ActionId::new(7).is_err());
        assert_eq!(a(1).opposite(), a(4));
        assert_eq!(a(2).opposite(), a(5));
        assert_eq!(a(6).opposite(), a(3));
    }

    #[test]
    fn region_geometry() {
        let r1 = region_force(a(1), 40.0);
        assert_eq!(r1.direction, Vec2::new(1.0, 0.0));
        assert_eq!(r1.offset, Vec2::new(-20.0, 0.0));
        assert_eq!(r1.torque(), 0.0);

        let (r2, r3) = (region_force(a(2), 40.0), region_force(a(3), 40.0));
        assert_eq!(r2.direction, Vec2::new(0.0, 1.0));
        assert_eq!(r2.direction, r3.direction);
        assert_eq!(r2.offset.x, -r3.offset.x);
        assert_eq!(r2.torque(), -r3.torque());

        let (r5, r6) = (region_force(a(5), 40.0), region_force(a(6), 40.0));
        assert_eq!(r5.direction, Vec2::new(0.0, -1.0));
        assert_eq!(r5.direction, r6.direction);
        assert_eq!(r5.offset, Vec2::new(-10.0, 20.0));
        assert_eq!(r6.offset, Vec2::new(10.0, 20.0));

        let sum = ActionId::ALL
            .iter()
            .fold(Vec2::ZERO, |acc, &x| acc + region_force(x, 40.0).direction * (1.0 / 6.0));
        assert!(sum.norm() < 1e-15);
    }

    #[test]
    fn fifteen_aligned_pushers() {
        let w = open_world();
        let out = w.step(&w.initial_state(), &[a(1); 15], 1.0).unwrap();
        assert_eq!(out.displacement, Vec2::new(15.0, 0.0));
        assert_eq!(out.rotation_delta, 0.0);
        assert_eq!(out.displacement.norm(), w.max_step_displacement(15, 1.0));
    }

    #[test]
    fn opposed_off_axis_pushers_spin_in_place() {
        let w = open_world();
        let out = w.step(&w.initial_state(), &[a(2), a(6)], 1.0).unwrap();
        assert_eq!(out.displacement, Vec2::ZERO);
        assert!(out.rotation_delta != 0.0);
        // opposite regions cancel torque as well
        let out = w.step(&w.initial_state(), &[a(2), a(5)], 1.0).unwrap();
        assert_eq!(out.rotation_delta, 0.0);
    }

    #[test]
    fn eight_versus_seven() {
        let w = open_world();
        let mut joint = vec![a(1); 8];
        joint.extend([a(4); 7]);
        for sf in [1.0, 0.5, 1.0 / 3.0] {
            let out = w.step(&w.initial_state(), &joint, sf).unwrap();
            assert!((out.displacement.norm() - sf).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_follows_heading() {
        let mut s = Scenario::open_field();
        s.box_heading_start = std::f64::consts::FRAC_PI_2;
        let w = World::new(s, Dynamics::default());
        let out = w.step(&w.initial_state(), &[a(1)], 1.0).unwrap();
        assert!((out.displacement.x).abs() < 1e-12);
        assert!((out.displacement.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn terminated_state_is_rejected() {
        let w = open_world();
        let mut st = w.initial_state();
        st.terminated = true;
        assert!(matches!(
            w.step(&st, &[a(1)], 1.0),
            Err(Error::ContractViolation(_))
        ));
        assert!(w.step(&w.initial_state(), &[a(1)], 0.0).is_err());
        assert!(w.step(&w.initial_state(), &[a(1)], 1.5).is_err());
        assert!(w.step(&w.initial_state(), &[], 1.0).is_err());
    }

    #[test]
    fn collision_conventions() {
        let w = World::new(Scenario::default(), Dynamics::default());
        assert!(!w.detect_collision(&Pose::new(Vec2::new(200.0, 150.0), 0.3)));
        assert!(!w.check_goal(&w.initial_state().pose));
        // corner (20, 20) from centre touches a disc of radius 30 at (50, 20)
        let mut s = Scenario::open_field();
        s.obstacles.push(Disc::new(Vec2::new(50.0, 20.0), 30.0));
        let w = World::new(s, Dynamics::default());
        assert!(w.detect_collision(&Pose::new(Vec2::ZERO, 0.0)));
        // centre one pixel inside radius + half side along an axis
        let mut s = Scenario::open_field();
        s.obstacles.push(Disc::new(Vec2::new(0.0, 50.0 + 20.0 - 1.0), 50.0));
        let w = World::new(s, Dynamics::default());
        assert!(w.detect_collision(&Pose::new(Vec2::ZERO, 0.0)));
    }

    #[test]
    fn goal_contact_wins_and_tangency_counts() {
        let mut s = Scenario::open_field();
        s.goal = Disc::new(Vec2::new(50.0, 0.0), 30.0);
        s.obstacles.push(Disc::new(Vec2::new(0.0, 50.0), 30.0));
        let w = World::new(s, Dynamics::default());
        assert!(w.check_goal(&Pose::new(Vec2::ZERO, 0.0)));
        let out = w.step(&w.initial_state(), &[a(1), a(4)], 1.0).unwrap();
        assert!(out.reached_goal);
        assert!(!out.collided);
        assert!(out.state.terminated);
    }

    #[test]
    fn timeout_at_max_steps() {
        let mut s = Scenario::open_field();
        s.max_steps = 2;
        let w = World::new(s, Dynamics::default());
        let o1 = w.step(&w.initial_state(), &[a(1)], 1.0).unwrap();
        assert!(!o1.timed_out);
        let o2 = w.step(&o1.state, &[a(1)], 1.0).unwrap();
        assert!(o2.timed_out && o2.state.terminated);
        assert_eq!(o2.state.step_index, 2);
    }

    #[test]
    fn scenario_text_round_trip() {
        let s = Scenario::default();
        let parsed = Scenario::parse(&s.to_text()).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn scenario_parse_errors() {
        let base = Scenario::default().to_text();
        let err = Scenario::parse(&format!("{base}colour=red\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(Scenario::parse(&format!("{base}goal=1,2,3\n")).is_err());
        assert!(Scenario::parse("arena_width=800\n").is_err());
        assert!(Scenario::parse(&format!("{base}obstacle=160,300,10\n")).is_err());
        let bad_sensor = base.replace("sensor_radius=150", "sensor_radius=30");
        assert!(Scenario::parse(&bad_sensor).is_err());
        assert!(Scenario::parse(&base.replace("max_steps=300", "max_steps=0")).is_err());
    }
}
