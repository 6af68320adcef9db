//! One-step box movement distribution (BMD) and the two fitness scores.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::spi::Exploration;
use crate::world::{ActionId, Dynamics, Scenario, World, N_ACTIONS};

/// Simulations per RNG substream. Fixed so results do not depend on the
/// thread count.
const CHUNK: usize = 8192;

/// Relative slack on the near-origin threshold, keeping the comparison
/// independent of the force scale.
const NEAR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmdSample {
    pub x: f64,
    pub y: f64,
}

impl BmdSample {
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<Vec2> for BmdSample {
    fn from(v: Vec2) -> Self {
        Self { x: v.x, y: v.y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub n_agents: usize,
    pub n_sims: usize,
    /// Histogram bins for the angular test; `None` means one per agent.
    pub n_bins: Option<usize>,
    pub speed_factor: f64,
    pub dynamics: Dynamics,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            n_agents: 15,
            n_sims: 100_000,
            n_bins: None,
            speed_factor: 1.0,
            dynamics: Dynamics::default(),
        }
    }
}

impl FitnessConfig {
    pub fn bins(&self) -> usize {
        self.n_bins.unwrap_or(self.n_agents)
    }

    pub fn max_displacement(&self) -> f64 {
        self.dynamics.max_step_displacement(self.n_agents, self.speed_factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub origin_avoidance: f64,
    pub angular_spread: f64,
    pub raw_cv: f64,
    pub n_sims: usize,
    pub n_bins: usize,
}

/// Seeds substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fill_joint<R: Rng>(policy: Exploration<'_>, joint: &mut [ActionId], rng: &mut R) {
    match policy {
        Exploration::Random => {
            for a in joint.iter_mut() {
                *a = ActionId::ALL[rng.random_range(0..N_ACTIONS)];
            }
        }
        Exploration::Spi(map) => {
            let pdl = &map.pdls()[map.draw_key(rng).0];
            for a in joint.iter_mut() {
                *a = pdl.sample(rng);
            }
        }
    }
}

/// Runs `n_sims` independent one-step pushes from the origin of an empty
/// arena and records where the box ends up.
pub fn simulate_bmd(policy: Exploration<'_>, cfg: &FitnessConfig, seed: u64) -> Result<Vec<BmdSample>> {
    if cfg.n_sims == 0 {
        return Err(Error::invalid("n_sims must be at least 1"));
    }
    if cfg.n_agents == 0 {
        return Err(Error::invalid("n_agents must be at least 1"));
    }
    let world = World::new(Scenario::open_field(), cfg.dynamics);
    let origin = world.initial_state();
    let n_chunks = cfg.n_sims.div_ceil(CHUNK);
    let chunks: Result<Vec<Vec<BmdSample>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(cfg.n_sims - c * CHUNK);
            let mut rng = substream(seed, c as u64);
            let mut joint = vec![ActionId::ALL[0]; cfg.n_agents];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                fill_joint(policy, &mut joint, &mut rng);
                let step = world.step(&origin, &joint, cfg.speed_factor)?;
                out.push(step.displacement.into());
            }
            Ok(out)
        })
        .collect();
    Ok(chunks?.into_iter().flatten().collect())
}

/// True when the sample moved less than a third of the maximum displacement.
pub fn is_near_origin(sample: &BmdSample, max_disp: f64) -> bool {
    3.0 * sample.norm() < max_disp * (1.0 - NEAR_EPS)
}

/// `1 - near / total`.
pub fn origin_avoidance_score(samples: &[BmdSample], max_disp: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no BMD samples".into()));
    }
    if !(max_disp > 0.0) {
        return Err(Error::invalid(format!("max displacement must be positive, got {max_disp}")));
    }
    let near = samples.iter().filter(|s| is_near_origin(s, max_disp)).count();
    Ok(1.0 - near as f64 / samples.len() as f64)
}

/// Counts of sample bearings over `n_bins` equal arcs of `[0°, 360°)`.
/// Samples sitting at the origin are skipped.
pub fn direction_histogram(samples: &[BmdSample], n_bins: usize) -> Result<Vec<u64>> {
    if n_bins < 2 {
        return Err(Error::invalid("angular histogram needs at least 2 bins"));
    }
    let width = TAU / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for s in samples {
        if s.x == 0.0 && s.y == 0.0 {
            continue;
        }
        let bin = ((Vec2::new(s.x, s.y).angle() / width) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// Coefficient of variation (population standard deviation over mean).
pub fn coefficient_of_variation(counts: &[u64]) -> Option<f64> {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    if counts.is_empty() || mean == 0.0 {
        return None;
    }
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Some(var.sqrt() / mean)
}

/// Returns `(clamp(1 - CV, 0, 1), CV)` of the direction histogram.
pub fn angular_spread_score(samples: &[BmdSample], n_bins: usize) -> Result<(f64, f64)> {
    let counts = direction_histogram(samples, n_bins)?;
    let cv = coefficient_of_variation(&counts).ok_or(Error::UndefinedSpread)?;
    Ok(((1.0 - cv).clamp(0.0, 1.0), cv))
}

pub fn report_from_samples(samples: &[BmdSample], cfg: &FitnessConfig) -> Result<FitnessReport> {
    let origin_avoidance = origin_avoidance_score(samples, cfg.max_displacement())?;
    let (angular_spread, raw_cv) = angular_spread_score(samples, cfg.bins())?;
    Ok(FitnessReport {
        origin_avoidance,
        angular_spread,
        raw_cv,
        n_sims: samples.len(),
        n_bins: cfg.bins(),
    })
}

pub fn fitness_report(policy: Exploration<'_>, cfg: &FitnessConfig, seed: u64) -> Result<FitnessReport> {
    let samples = simulate_bmd(policy, cfg, seed)?;
    report_from_samples(&samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spi::{Pdl, SpiMap};
    use approx::assert_abs_diff_eq;

    fn s(x: f64, y: f64) -> BmdSample {
        BmdSample { x, y }
    }

    #[test]
    fn degenerate_map_pushes_straight() {
        let map = SpiMap::from_pdls(
            vec![Pdl::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()],
            0.0,
            0.0,
            0,
        )
        .unwrap();
        let cfg = FitnessConfig { n_sims: 500, speed_factor: 0.5, ..Default::default() };
        let samples = simulate_bmd(Exploration::Spi(&map), &cfg, 1).unwrap();
        assert!(samples.iter().all(|x| *x == s(7.5, 0.0)));
        let r = report_from_samples(&samples, &cfg).unwrap();
        assert_eq!(r.origin_avoidance, 1.0);
        assert_eq!(r.angular_spread, 0.0);
        assert_abs_diff_eq!(r.raw_cv, 14f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn origin_threshold_is_strict() {
        // exactly one third is not near
        assert!(!is_near_origin(&s(3.0, 4.0), 15.0));
        assert!(is_near_origin(&s(3.0, 3.9), 15.0));
        assert!(!is_near_origin(&s(1.0, 4.0 / 3.0), 5.0));
        assert!(is_near_origin(&s(0.0, 0.0), 15.0));
        assert_eq!(
            origin_avoidance_score(&[s(0.0, 0.0), s(10.0, 0.0)], 15.0).unwrap(),
            0.5
        );
        assert!(origin_avoidance_score(&[], 15.0).is_err());
        assert!(origin_avoidance_score(&[s(1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn one_hot_histogram_cv() {
        for n in [2usize, 4, 15] {
            let (score, cv) = angular_spread_score(&[s(1.0, 0.1); 10], n).unwrap();
            assert_abs_diff_eq!(cv, ((n - 1) as f64).sqrt(), epsilon = 1e-12);
            assert_eq!(score, 0.0);
        }
    }

    #[test]
    fn flat_histogram_scores_one() {
        let samples: Vec<_> = (0..12)
            .map(|k| {
                let a = (k as f64 + 0.5) * TAU / 12.0;
                s(a.cos(), a.sin())
            })
            .collect();
        let (score, cv) = angular_spread_score(&samples, 12).unwrap();
        assert_eq!(cv, 0.0);
        assert_eq!(score, 1.0);
    }

    #[test]
    fn origin_samples_skip_angles() {
        assert!(matches!(
            angular_spread_score(&[s(0.0, 0.0); 3], 4),
            Err(Error::UndefinedSpread)
        ));
        let h = direction_histogram(&[s(0.0, 0.0), s(-1.0, 0.0)], 4).unwrap();
        assert_eq!(h, vec![0, 0, 1, 0]);
        assert!(direction_histogram(&[s(1.0, 0.0)], 1).is_err());
    }

    #[test]
    fn single_sim_reports() {
        let cfg = FitnessConfig { n_sims: 1, ..Default::default() };
        for seed in 0..20 {
            match fitness_report(Exploration::Random, &cfg, seed) {
                Ok(r) => {
                    assert!(r.origin_avoidance == 0.0 || r.origin_avoidance == 1.0);
                    assert_eq!(r.angular_spread, 0.0);
                }
                Err(e) => assert!(matches!(e, Error::UndefinedSpread)),
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = FitnessConfig { n_sims: 20_000, ..Default::default() };
        let a = fitness_report(Exploration::Random, &cfg, 4).unwrap();
        let b = fitness_report(Exploration::Random, &cfg, 4).unwrap();
        assert_eq!(a, b);
        let c = fitness_report(Exploration::Random, &cfg, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_runs() {
        let cfg = FitnessConfig { n_sims: 0, ..Default::default() };
        assert!(simulate_bmd(Exploration::Random, &cfg, 0).is_err());
        let cfg = FitnessConfig { n_agents: 0, ..Default::default() };
        assert!(simulate_bmd(Exploration::Random, &cfg, 0).is_err());
    }
}
