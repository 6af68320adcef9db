//! Aggregate statistics for SPI versus random training runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::csvio::{MetricRow, TrainingRow};
use crate::learn::{EpisodeRecord, Mode, TrainingLog};

pub const DEFAULT_WINDOW: usize = 100;
pub const STEP_BIN_WIDTH: u32 = 10;

/// Every run of one exploration mode under one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRuns {
    pub mode: Mode,
    pub speed_factor: f64,
    pub runs: Vec<Vec<EpisodeRecord>>,
}

impl ModeRuns {
    pub fn from_logs(logs: &[TrainingLog]) -> Result<Self> {
        let first = logs
            .first()
            .ok_or_else(|| Error::EmptyInput("no training logs".into()))?;
        for l in logs {
            if l.config.mode != first.config.mode || l.config.speed_factor != first.config.speed_factor {
                return Err(Error::invalid("logs of one side must share mode and speed factor"));
            }
        }
        Ok(Self {
            mode: first.config.mode,
            speed_factor: first.config.speed_factor,
            runs: logs.iter().map(|l| l.records.clone()).collect(),
        })
    }

    /// Groups persisted CSV rows, one slice per run.
    pub fn from_rows(runs: &[Vec<TrainingRow>]) -> Result<Self> {
        let first = runs
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::EmptyInput("no training rows".into()))?;
        let (mode, speed_factor) = (first.mode, first.speed_factor);
        let mut out = Vec::with_capacity(runs.len());
        for rows in runs {
            if rows.iter().any(|r| r.mode != mode || r.speed_factor != speed_factor) {
                return Err(Error::invalid("logs of one side must share mode and speed factor"));
            }
            let mut records: Vec<_> = rows.iter().map(TrainingRow::record).collect();
            records.sort_by_key(|r| r.episode_index);
            out.push(records);
        }
        Ok(Self {
            mode,
            speed_factor,
            runs: out,
        })
    }

    fn episodes(&self) -> Option<usize> {
        let n = self.runs.first()?.len();
        self.runs.iter().all(|r| r.len() == n).then_some(n)
    }
}

/// Per-mode aggregates, averaged over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub label: String,
    pub n_runs: usize,
    pub episodes: usize,
    pub window_success_rate: Vec<f64>,
    pub window_mean_reward: Vec<f64>,
    pub success_steps_first_half: Vec<u64>,
    pub success_steps_second_half: Vec<u64>,
    pub failure_steps_first_half: Vec<u64>,
    pub failure_steps_second_half: Vec<u64>,
    pub mean_success_steps_second_half: Option<f64>,
    pub mean_failure_steps_second_half: Option<f64>,
    pub final_success_rate: f64,
    pub final_mean_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub window: usize,
    pub bin_width: u32,
    pub spi: ModeSummary,
    pub random: ModeSummary,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn histogram(steps: impl Iterator<Item = u32>, n_bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; n_bins];
    for s in steps {
        let b = ((s / STEP_BIN_WIDTH) as usize).min(n_bins - 1);
        h[b] += 1;
    }
    h
}

fn summarize(side: &ModeRuns, episodes: usize, window: usize, n_bins: usize) -> ModeSummary {
    let n_windows = episodes.div_ceil(window);
    let mut rate = vec![0.0; n_windows];
    let mut reward = vec![0.0; n_windows];
    for (w, (rate, reward)) in rate.iter_mut().zip(reward.iter_mut()).enumerate() {
        let lo = w * window;
        let hi = (lo + window).min(episodes);
        let eps = side.runs.iter().flat_map(|r| &r[lo..hi]);
        *rate = mean(eps.clone().map(|e| e.outcome.is_success() as u8 as f64)).unwrap_or(0.0);
        *reward = mean(eps.map(|e| e.total_reward)).unwrap_or(0.0);
    }
    let half = episodes / 2;
    let first = || side.runs.iter().flat_map(move |r| &r[..half]);
    let second = || side.runs.iter().flat_map(move |r| &r[half..]);
    let succ = |e: &&EpisodeRecord| e.outcome.is_success();
    let fail = |e: &&EpisodeRecord| !e.outcome.is_success();

    ModeSummary {
        label: side.mode.to_string(),
        n_runs: side.runs.len(),
        episodes,
        success_steps_first_half: histogram(first().filter(succ).map(|e| e.steps), n_bins),
        success_steps_second_half: histogram(second().filter(succ).map(|e| e.steps), n_bins),
        failure_steps_first_half: histogram(first().filter(fail).map(|e| e.steps), n_bins),
        failure_steps_second_half: histogram(second().filter(fail).map(|e| e.steps), n_bins),
        mean_success_steps_second_half: mean(second().filter(succ).map(|e| e.steps as f64)),
        mean_failure_steps_second_half: mean(second().filter(fail).map(|e| e.steps as f64)),
        final_success_rate: *rate.last().unwrap_or(&0.0),
        final_mean_reward: *reward.last().unwrap_or(&0.0),
        window_success_rate: rate,
        window_mean_reward: reward,
    }
}

/// Windowed success rates, step distributions split at the half-way episode,
/// and reward curves for both sides. Both sides must share speed factor,
/// run count and episode count.
pub fn compare_modes(spi: &ModeRuns, random: &ModeRuns, window: usize) -> Result<SummaryStats> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if spi.runs.is_empty() || random.runs.is_empty() {
        return Err(Error::EmptyInput("both sides need at least one run".into()));
    }
    if spi.speed_factor != random.speed_factor {
        return Err(Error::invalid(format!(
            "speed factors differ: {} vs {}",
            spi.speed_factor, random.speed_factor
        )));
    }
    if spi.runs.len() != random.runs.len() {
        return Err(Error::invalid("sides have different numbers of runs"));
    }
    let episodes = match (spi.episodes(), random.episodes()) {
        (Some(a), Some(b)) if a == b && a > 0 => a,
        _ => return Err(Error::invalid("runs have mismatched episode counts")),
    };
    let max_steps = spi
        .runs
        .iter()
        .chain(&random.runs)
        .flatten()
        .map(|e| e.steps)
        .max()
        .unwrap_or(0);
    let n_bins = (max_steps / STEP_BIN_WIDTH) as usize + 1;
    Ok(SummaryStats {
        window,
        bin_width: STEP_BIN_WIDTH,
        spi: summarize(spi, episodes, window, n_bins),
        random: summarize(random, episodes, window, n_bins),
    })
}

impl SummaryStats {
    /// Flattens both summaries into long-format rows.
    pub fn to_rows(&self) -> Vec<MetricRow> {
        let mut rows = Vec::new();
        for side in [&self.spi, &self.random] {
            let mut push = |metric: &str, index: usize, value: f64| {
                rows.push(MetricRow {
                    metric: metric.to_string(),
                    mode: side.label.clone(),
                    index,
                    value,
                });
            };
            for (i, v) in side.window_success_rate.iter().enumerate() {
                push("window_success_rate", i, *v);
            }
            for (i, v) in side.window_mean_reward.iter().enumerate() {
                push("window_mean_reward", i, *v);
            }
            for (name, h) in [
                ("success_steps_first_half", &side.success_steps_first_half),
                ("success_steps_second_half", &side.success_steps_second_half),
                ("failure_steps_first_half", &side.failure_steps_first_half),
                ("failure_steps_second_half", &side.failure_steps_second_half),
            ] {
                for (i, c) in h.iter().enumerate() {
                    push(name, i, *c as f64);
                }
            }
            if let Some(v) = side.mean_success_steps_second_half {
                push("mean_success_steps_second_half", 0, v);
            }
            if let Some(v) = side.mean_failure_steps_second_half {
                push("mean_failure_steps_second_half", 0, v);
            }
            push("final_success_rate", 0, side.final_success_rate);
            push("final_mean_reward", 0, side.final_mean_reward);
        }
        rows
    }
}
