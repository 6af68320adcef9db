mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use spi_core::fitness::{simulate_bmd, FitnessConfig};
use spi_core::harness::csvio::{rows_to_string, training_rows};
use spi_core::learn::{select_action, ExploreContext};
use spi_core::reward::{collision_reward, distance_reward, goal_reward, rotation_reward, total_reward, RewardInputs};
use spi_core::sense::{discretize, encode_state};
use spi_core::spi::{draw_key, sample_action};
use spi_core::{ActionId, DiscreteState, Exploration, Pdl, QTable, RewardWeights, Scenario, SpiMap, TrainConfig};

/// Asserts every observed frequency is within 3 sigma of its binomial mean.
fn within_three_sigma(counts: &[u64], probs: &[f64]) {
    let n: u64 = counts.iter().sum();
    for (i, (&c, &p)) in counts.iter().zip(probs).enumerate() {
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sd.max(1e-12),
            "action {}: {c} vs {mean:.1} +- {sd:.1}",
            i + 1
        );
    }
}

#[test]
fn key_draws_are_uniform() {
    let cells = 4000;
    let draws = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = vec![0u64; cells];
    for _ in 0..draws {
        counts[draw_key(cells, &mut rng).unwrap().0] += 1;
    }
    let expected = draws as f64 / cells as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2={chi2} p={p}");
}

#[test]
fn uniform_pdl_sampling_is_binomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts = [0u64; 6];
    for _ in 0..100_000 {
        counts[sample_action(&Pdl::uniform(), &mut rng).index()] += 1;
    }
    within_three_sigma(&counts, &[1.0 / 6.0; 6]);
}

#[test]
fn map_pdl_sampling_is_binomial() {
    let map = SpiMap::build(4, 0.1, 0.3, 5).unwrap();
    let pdl = &map.pdls()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0u64; 6];
    for _ in 0..100_000 {
        counts[sample_action(pdl, &mut rng).index()] += 1;
    }
    within_three_sigma(&counts, pdl.probs());
}

#[test]
fn full_exploration_random_mode_is_uniform() {
    let q = QTable::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0u64; 6];
    for _ in 0..100_000 {
        let a = select_action(&q, DiscreteState(1), 1.0, ExploreContext::Random, &mut rng).unwrap();
        counts[a.index()] += 1;
    }
    within_three_sigma(&counts, &[1.0 / 6.0; 6]);
}

#[test]
fn exact_enumeration_has_816_terms() {
    let (score, terms) = common::exact_random_origin_avoidance(15);
    assert_eq!(terms, 816);
    assert!((0.0..1.0).contains(&score));
    // two agents: only +x/-x or +y/-y pairs leave the box near the origin
    let (two, _) = common::exact_random_origin_avoidance(2);
    let near = 2.0 * (1.0 / 6.0) * (1.0 / 6.0) + 2.0 * (1.0 / 3.0) * (1.0 / 3.0);
    assert!((two - (1.0 - near)).abs() < 1e-15);
}

#[test]
fn random_monte_carlo_matches_enumeration_small_n() {
    for n in [3usize, 6, 9] {
        let cfg = FitnessConfig {
            n_agents: n,
            n_sims: 40_000,
            ..Default::default()
        };
        let samples = simulate_bmd(Exploration::Random, &cfg, n as u64).unwrap();
        let mc = spi_core::fitness::origin_avoidance_score(&samples, cfg.max_displacement()).unwrap();
        let (exact, _) = common::exact_random_origin_avoidance(n as u32);
        let sd = (exact * (1.0 - exact) / cfg.n_sims as f64).sqrt();
        assert!((mc - exact).abs() <= 3.0 * sd, "n={n}: {mc} vs {exact}");
    }
}

#[test]
fn fig3_state_vector() {
    let (s, pose) = common::fig3_scenario();
    let sv = encode_state(&s, &pose).to_array();
    assert_eq!(&sv[..8], &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
    assert!((sv[8] - (30.0 - 180.0) / 180.0).abs() < 1e-12);
    assert_eq!((sv[8] * 100.0).round() / 100.0, -0.83);
    // -0.83 falls in the first of 8 goal bins
    let d = discretize(&encode_state(&s, &pose), 8).unwrap();
    assert_eq!(d.decompose(8).1, 0);
}

#[test]
fn reward_worked_values() {
    assert!((distance_reward(100.0, 95.0).unwrap() - 12.5).abs() < 1e-12);
    assert!((rotation_reward(0.3, 0.3) - 0.02).abs() < 1e-12);
    assert!(rotation_reward(0.0, 11.48f64.to_radians()).abs() < 1e-3);
    assert_eq!(collision_reward(true), -900.0);
    assert_eq!(goal_reward(true), 900.0);
    let inputs = |d_new, collided| RewardInputs {
        d_old: 100.0,
        d_new,
        alpha_old: 0.5,
        alpha_new: 0.5,
        collided,
        reached_goal: false,
    };
    let r = total_reward(&inputs(95.0, false), &RewardWeights::default()).unwrap();
    assert!((RewardWeights::default().w1 * r.r_dis - 25.0).abs() < 1e-12);
    assert!((r.total - 25.02).abs() < 1e-12);
    let r = total_reward(&inputs(90.0, true), &RewardWeights::UNIT).unwrap();
    assert!((r.total - (25.0 + 0.02 - 900.0)).abs() < 1e-9);
}

#[test]
fn same_seed_gives_identical_csv() {
    let cfg = TrainConfig {
        episodes: 15,
        seed: 21,
        ..Default::default()
    };
    let a = rows_to_string(&training_rows(&spi_core::train(&cfg, &Scenario::default()).unwrap())).unwrap();
    let b = rows_to_string(&training_rows(&spi_core::train(&cfg, &Scenario::default()).unwrap())).unwrap();
    assert_eq!(a, b);
    let other = TrainConfig { seed: 22, ..cfg };
    let c = rows_to_string(&training_rows(&spi_core::train(&other, &Scenario::default()).unwrap())).unwrap();
    assert_ne!(a, c);
}

#[test]
fn action_ids_cover_six_regions() {
    assert_eq!(ActionId::ALL.len(), 6);
    assert!(ActionId::new(0).is_err() && ActionId::new(7).is_err());
}
