//! The box-mounted sensor: eight occupancy octants plus the goal bearing.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Disc, Sector, Segment, Vec2};
use crate::world::{Pose, Scenario};

pub const N_OCTANTS: usize = 8;
pub const DEFAULT_ANGLE_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// `s1..s8`: true when an obstacle or wall reaches into the octant.
    pub occupancy: [bool; N_OCTANTS],
    /// `s9`: goal bearing scaled into `[-1, 1)`.
    pub goal_angle: f64,
}

impl StateVector {
    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (o, &bit) in out.iter_mut().zip(&self.occupancy) {
            *o = if bit { 1.0 } else { 0.0 };
        }
        out[8] = self.goal_angle;
        out
    }

    pub fn occupancy_mask(&self) -> u8 {
        self.occupancy
            .iter()
            .enumerate()
            .fold(0u8, |m, (k, &bit)| m | ((bit as u8) << k))
    }
}

/// Flat index into a Q-table row set, `mask * angle_bins + angle_bin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiscreteState(pub usize);

impl DiscreteState {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn decompose(self, angle_bins: usize) -> (u8, usize) {
        ((self.0 / angle_bins) as u8, self.0 % angle_bins)
    }
}

pub fn n_states(angle_bins: usize) -> usize {
    256 * angle_bins
}

/// Octant (1..=8) containing a nonzero vector; boundaries belong to the
/// higher octant.
pub fn octant_of(v: Vec2) -> Result<u8> {
    if v.x == 0.0 && v.y == 0.0 {
        return Err(Error::invalid("octant of the zero vector is undefined"));
    }
    let k = (v.angle() / FRAC_PI_4).floor() as usize;
    Ok((k % N_OCTANTS) as u8 + 1)
}

/// Bearing of the goal centre in the box frame, in `[0, 2π)`.
pub fn goal_bearing(scenario: &Scenario, pose: &Pose) -> f64 {
    pose.to_local(scenario.goal.center).angle()
}

/// Maps a bearing in radians to `s9 = (θ° - 180) / 180`.
pub fn scale_bearing(theta: f64) -> f64 {
    (theta.to_degrees() - 180.0) / 180.0
}

pub fn encode_state(scenario: &Scenario, pose: &Pose) -> StateVector {
    let obstacles: Vec<_> = scenario
        .obstacles
        .iter()
        .map(|o| Disc::new(pose.to_local(o.center), o.radius))
        .collect();
    let walls: Vec<_> = scenario
        .walls
        .iter()
        .map(|w| Segment::new(pose.to_local(w.a), pose.to_local(w.b)))
        .collect();

    let mut occupancy = [false; N_OCTANTS];
    for (k, bit) in occupancy.iter_mut().enumerate() {
        let sector = Sector {
            start: k as f64 * FRAC_PI_4,
            width: FRAC_PI_4,
            radius: scenario.sensor_radius,
        };
        *bit = obstacles.iter().any(|d| sector.intersects_disc(d))
            || walls.iter().any(|s| sector.intersects_segment(s));
    }
    StateVector {
        occupancy,
        goal_angle: scale_bearing(goal_bearing(scenario, pose)),
    }
}

pub fn discretize(sv: &StateVector, angle_bins: usize) -> Result<DiscreteState> {
    if angle_bins == 0 {
        return Err(Error::invalid("angle_bins must be at least 1"));
    }
    let t = ((sv.goal_angle + 1.0) / 2.0 * angle_bins as f64).floor();
    let bin = (t.max(0.0) as usize).min(angle_bins - 1);
    Ok(DiscreteState(
        sv.occupancy_mask() as usize * angle_bins + bin,
    ))
}
