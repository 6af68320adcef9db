//! Parameter sweeps over map generation settings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{fitness_report, FitnessConfig};
use crate::harness::csvio::{CapMarginRow, CellStatus, PdlSweepRow};
use crate::spi::{is_feasible, Exploration, SpiMap};

pub const DEFAULT_PDL_COUNTS: [usize; 7] = [4, 52, 100, 252, 500, 1000, 4000];
pub const DEFAULT_CAPS: [f64; 4] = [0.05, 0.1, 0.2, 0.3];
pub const DEFAULT_MARGINS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
/// Simulation budget split across a cap/margin grid when no per-cell count is given.
pub const DEFAULT_SWEEP_BUDGET: usize = 100_000;

/// Tolerances used to turn qualitative trend claims into checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTolerances {
    /// Largest score gain still considered a plateau.
    pub plateau: f64,
    /// Allowed dip for a sequence to count as non-decreasing.
    pub monotone_slack: f64,
}

impl Default for TrendTolerances {
    fn default() -> Self {
        Self {
            plateau: 0.05,
            monotone_slack: 0.02,
        }
    }
}

/// Fitness of maps of increasing size; the same seed drives every cell.
pub fn sweep_pdl_count(
    counts: &[usize],
    cap: f64,
    margin: f64,
    fitness: &FitnessConfig,
    seed: u64,
) -> Result<Vec<PdlSweepRow>> {
    if counts.is_empty() {
        return Err(Error::invalid("no PDL counts to sweep"));
    }
    if let Some(bad) = counts.iter().find(|&&c| c == 0 || c % 4 != 0) {
        return Err(Error::invalid(format!("PDL count {bad} is not a positive multiple of 4")));
    }
    counts
        .par_iter()
        .map(|&n| {
            let map = SpiMap::build(n, cap, margin, seed)?;
            let r = fitness_report(Exploration::Spi(&map), fitness, seed)?;
            Ok(PdlSweepRow {
                n_pdls: n,
                cap,
                margin,
                n_agents: fitness.n_agents,
                n_sims: r.n_sims,
                seed,
                origin_avoidance: r.origin_avoidance,
                angular_spread: r.angular_spread,
                raw_cv: r.raw_cv,
            })
        })
        .collect()
}

/// Evaluates every (cap, margin) pair; infeasible pairs become skipped rows.
pub fn sweep_cap_margin(
    caps: &[f64],
    margins: &[f64],
    n_pdls: usize,
    fitness: &FitnessConfig,
    seed: u64,
) -> Result<Vec<CapMarginRow>> {
    if caps.is_empty() || margins.is_empty() {
        return Err(Error::invalid("cap and margin grids must be nonempty"));
    }
    let cells: Vec<(f64, f64)> = caps
        .iter()
        .flat_map(|&c| margins.iter().map(move |&m| (c, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(cap, margin)| {
            if !is_feasible(cap, margin) {
                return Ok(CapMarginRow {
                    cap,
                    margin,
                    status: CellStatus::Skipped,
                    n_sims: 0,
                    origin_avoidance: None,
                    angular_spread: None,
                    raw_cv: None,
                });
            }
            let map = SpiMap::build(n_pdls, cap, margin, seed)?;
            let r = fitness_report(Exploration::Spi(&map), fitness, seed)?;
            Ok(CapMarginRow {
                cap,
                margin,
                status: CellStatus::Ok,
                n_sims: r.n_sims,
                origin_avoidance: Some(r.origin_avoidance),
                angular_spread: Some(r.angular_spread),
                raw_cv: Some(r.raw_cv),
            })
        })
        .collect()
}

/// Per-cell simulation count when a total budget is split over the grid.
pub fn sims_per_cell(budget: usize, n_cells: usize) -> usize {
    (budget / n_cells.max(1)).max(1)
}

/// Score gain from `from` PDLs to `to` PDLs.
pub fn plateau_gain(rows: &[PdlSweepRow], from: usize, to: usize) -> Option<f64> {
    let score = |n| rows.iter().find(|r| r.n_pdls == n).map(|r| r.angular_spread);
    Some(score(to)? - score(from)?)
}

/// Whether `values` never drops by more than `slack` between neighbours.
pub fn non_decreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - slack)
}

/// Scores along the margin axis for one cap, in margin order.
pub fn margin_series(rows: &[CapMarginRow], cap: f64) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<_> = rows
        .iter()
        .filter(|r| r.cap == cap)
        .filter_map(|r| r.report().map(|(o, a)| (r.margin, o, a)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

pub fn cell(rows: &[CapMarginRow], cap: f64, margin: f64) -> Option<(f64, f64)> {
    rows.iter()
        .find(|r| r.cap == cap && r.margin == margin)
        .and_then(|r| r.report())
}
