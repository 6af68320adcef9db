//! Flat-file formats for everything the harness emits.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{BmdSample, FitnessReport};
use crate::learn::{EpisodeRecord, Mode, Outcome, TrainingLog};

/// One row of a persisted training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub episode_index: usize,
    pub mode: Mode,
    pub speed_factor: f64,
    pub outcome: Outcome,
    pub steps: u32,
    pub total_reward: f64,
    pub epsilon: f64,
}

impl TrainingRow {
    pub fn record(&self) -> EpisodeRecord {
        EpisodeRecord {
            episode_index: self.episode_index,
            outcome: self.outcome,
            steps: self.steps,
            total_reward: self.total_reward,
            epsilon: self.epsilon,
        }
    }
}

pub fn training_rows(log: &TrainingLog) -> Vec<TrainingRow> {
    log.records
        .iter()
        .map(|r| TrainingRow {
            episode_index: r.episode_index,
            mode: log.config.mode,
            speed_factor: log.config.speed_factor,
            outcome: r.outcome,
            steps: r.steps,
            total_reward: r.total_reward,
            epsilon: r.epsilon,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRow {
    pub mode: String,
    pub n_agents: usize,
    pub n_sims: usize,
    pub n_bins: usize,
    pub speed_factor: f64,
    pub seed: u64,
    pub origin_avoidance: f64,
    pub angular_spread: f64,
    pub raw_cv: f64,
}

/// Row of the PDL-count sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdlSweepRow {
    pub n_pdls: usize,
    pub cap: f64,
    pub margin: f64,
    pub n_agents: usize,
    pub n_sims: usize,
    pub seed: u64,
    pub origin_avoidance: f64,
    pub angular_spread: f64,
    pub raw_cv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
}

/// Row of the cap/margin grid. Scores are empty for infeasible cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapMarginRow {
    pub cap: f64,
    pub margin: f64,
    pub status: CellStatus,
    pub n_sims: usize,
    pub origin_avoidance: Option<f64>,
    pub angular_spread: Option<f64>,
    pub raw_cv: Option<f64>,
}

impl CapMarginRow {
    pub fn report(&self) -> Option<(f64, f64)> {
        Some((self.origin_avoidance?, self.angular_spread?))
    }
}

/// Long-format summary metric: `metric, mode, index, value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub mode: String,
    pub index: usize,
    pub value: f64,
}

pub fn fitness_row(mode: &str, report: &FitnessReport, n_agents: usize, speed_factor: f64, seed: u64) -> FitnessRow {
    FitnessRow {
        mode: mode.to_string(),
        n_agents,
        n_sims: report.n_sims,
        n_bins: report.n_bins,
        speed_factor,
        seed,
        origin_avoidance: report.origin_avoidance,
        angular_spread: report.angular_spread,
        raw_cv: report.raw_cv,
    }
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
}

pub fn save_rows<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(rows, std::io::BufWriter::new(file))
}

/// Reads a headed CSV. Errors carry the 1-based line number; an input with
/// no data rows is an [`Error::EmptyInput`].
pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: T = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv has no data rows".into()));
    }
    Ok(rows)
}

pub fn load_rows<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_rows(std::io::BufReader::new(file))
}

pub fn save_samples(samples: &[BmdSample], path: impl AsRef<Path>) -> Result<()> {
    save_rows(samples, path)
}
