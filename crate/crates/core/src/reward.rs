//! Per-step reward: distance, rotation, collision and goal terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DISTANCE_GAIN: f64 = 2.5;
pub const ROTATION_OFFSET: f64 = 0.98;
pub const COLLISION_PENALTY: f64 = -900.0;
pub const GOAL_BONUS: f64 = 900.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w1: 2.0,
            w2: 1.0,
            w3: 1.0,
            w4: 1.0,
        }
    }
}

impl RewardWeights {
    pub const UNIT: RewardWeights = RewardWeights {
        w1: 1.0,
        w2: 1.0,
        w3: 1.0,
        w4: 1.0,
    };

    /// All weights non-negative and the distance weight the largest.
    pub fn validate(&self) -> Result<()> {
        let ws = [self.w1, self.w2, self.w3, self.w4];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(format!("reward weights must be >= 0: {ws:?}")));
        }
        if ws[1..].iter().any(|&w| w > self.w1) {
            return Err(Error::invalid(format!(
                "distance weight w1 must be the largest: {ws:?}"
            )));
        }
        Ok(())
    }
}

pub fn distance_reward(d_old: f64, d_new: f64) -> Result<f64> {
    if d_old < 0.0 || d_new < 0.0 || d_old.is_nan() || d_new.is_nan() {
        return Err(Error::invalid(format!(
            "distances must be non-negative: ({d_old}, {d_new})"
        )));
    }
    Ok((d_old - d_new) * DISTANCE_GAIN)
}

pub fn rotation_reward(alpha_old: f64, alpha_new: f64) -> f64 {
    (alpha_new - alpha_old).cos() - ROTATION_OFFSET
}

pub fn collision_reward(collided: bool) -> f64 {
    if collided {
        COLLISION_PENALTY
    } else {
        0.0
    }
}

pub fn goal_reward(reached: bool) -> f64 {
    if reached {
        GOAL_BONUS
    } else {
        0.0
    }
}

/// What one step observed, before weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub d_old: f64,
    pub d_new: f64,
    pub alpha_old: f64,
    pub alpha_new: f64,
    pub collided: bool,
    pub reached_goal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_dis: f64,
    pub r_rot: f64,
    pub r_col: f64,
    pub r_goal: f64,
    pub total: f64,
}

pub fn total_reward(inputs: &RewardInputs, weights: &RewardWeights) -> Result<RewardBreakdown> {
    weights.validate()?;
    let r_dis = distance_reward(inputs.d_old, inputs.d_new)?;
    let r_rot = rotation_reward(inputs.alpha_old, inputs.alpha_new);
    let r_col = collision_reward(inputs.collided);
    let r_goal = goal_reward(inputs.reached_goal);
    Ok(RewardBreakdown {
        r_dis,
        r_rot,
        r_col,
        r_goal,
        total: weights.w1 * r_dis + weights.w2 * r_rot + weights.w3 * r_col + weights.w4 * r_goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn still(d: f64) -> RewardInputs {
        RewardInputs {
            d_old: d,
            d_new: d,
            alpha_old: 0.3,
            alpha_new: 0.3,
            collided: false,
            reached_goal: false,
        }
    }

    #[test]
    fn distance_terms() {
        assert_eq!(distance_reward(100.0, 90.0).unwrap(), 25.0);
        assert_eq!(distance_reward(90.0, 100.0).unwrap(), -25.0);
        assert_eq!(distance_reward(42.0, 42.0).unwrap(), 0.0);
        assert!(distance_reward(-1.0, 3.0).is_err());
    }

    #[test]
    fn rotation_terms() {
        assert_abs_diff_eq!(rotation_reward(1.0, 1.0), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rotation_reward(0.0, std::f64::consts::FRAC_PI_2),
            -0.98,
            epsilon = 1e-12
        );
        let zero_at = 0.98f64.acos();
        assert_abs_diff_eq!(zero_at.to_degrees(), 11.48, epsilon = 0.005);
        assert_abs_diff_eq!(rotation_reward(0.0, zero_at), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn event_terms() {
        assert_eq!(collision_reward(false), 0.0);
        assert_eq!(collision_reward(true), -900.0);
        assert_eq!(goal_reward(true), 900.0);
        assert_eq!(goal_reward(false), 0.0);
    }

    #[test]
    fn weighted_totals() {
        let r = total_reward(&still(50.0), &RewardWeights::UNIT).unwrap();
        assert_abs_diff_eq!(r.total, 0.02, epsilon = 1e-12);

        let mut inp = still(0.0);
        inp.d_old = 100.0;
        inp.d_new = 90.0;
        inp.collided = true;
        let r = total_reward(&inp, &RewardWeights::UNIT).unwrap();
        assert_abs_diff_eq!(r.total, -874.98, epsilon = 1e-9);

        // rotation term is 0.02 here, so weight it out to isolate the distance term
        let w = RewardWeights { w1: 2.0, w2: 0.0, w3: 1.0, w4: 1.0 };
        let mut inp = still(0.0);
        inp.d_old = 100.0;
        inp.d_new = 95.0;
        let r = total_reward(&inp, &w).unwrap();
        assert_abs_diff_eq!(r.total, 25.0, epsilon = 1e-12);
        let r = total_reward(&inp, &RewardWeights { w1: 2.0, w2: 1.0, w3: 1.0, w4: 1.0 }).unwrap();
        assert_abs_diff_eq!(r.total, 25.02, epsilon = 1e-12);
    }

    #[test]
    fn weight_validation() {
        assert!(RewardWeights::default().validate().is_ok());
        assert!(RewardWeights { w1: 1.0, w2: 2.0, w3: 0.0, w4: 0.0 }.validate().is_err());
        assert!(RewardWeights { w1: 1.0, w2: -0.1, w3: 0.0, w4: 0.0 }.validate().is_err());
    }
}
