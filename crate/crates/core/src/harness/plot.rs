//! SVG rendering of harness outputs.
//!
//! Every plot is rendered into memory first and only written once complete,
//! so a failed render never leaves a partial file behind.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::fitness::{direction_histogram, BmdSample};
use crate::harness::csvio::{CapMarginRow, MetricRow, PdlSweepRow, TrainingRow};

const SIZE: (u32, u32) = (800, 600);
/// Scatter plots keep at most this many points.
const MAX_SCATTER: usize = 20_000;

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn write_svg(dir: &Path, name: &str, svg: String) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, svg)?;
    Ok(path)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

/// Named series of `(x, y)` points drawn as lines with markers.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> Result<String> {
    if series.iter().all(|(_, pts)| pts.is_empty()) {
        return Err(Error::EmptyInput(format!("nothing to plot for {title}")));
    }
    let (x0, x1) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 24))
            .margin(15)
            .x_label_area_size(45)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(y_label)
            .draw()
            .map_err(plot_err)?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(plot_err)?
                .label(name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
            chart
                .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
                .map_err(plot_err)?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

/// Side-by-side bars for one or more count vectors sharing bin edges.
pub fn bar_chart(
    title: &str,
    x_label: &str,
    bin_width: f64,
    series: &[(String, Vec<u64>)],
) -> Result<String> {
    let n_bins = series.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    if n_bins == 0 {
        return Err(Error::EmptyInput(format!("nothing to plot for {title}")));
    }
    let y_max = series
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let k = series.len() as f64;
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 24))
            .margin(15)
            .x_label_area_size(45)
            .y_label_area_size(60)
            .build_cartesian_2d(0.0..n_bins as f64 * bin_width, 0.0..y_max * 1.05)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc("count")
            .draw()
            .map_err(plot_err)?;
        for (s, (name, counts)) in series.iter().enumerate() {
            let color = PALETTE[s % PALETTE.len()];
            let w = bin_width / k;
            chart
                .draw_series(counts.iter().enumerate().map(|(i, &c)| {
                    let x = i as f64 * bin_width + s as f64 * w;
                    Rectangle::new([(x, 0.0), (x + w, c as f64)], color.mix(0.7).filled())
                }))
                .map_err(plot_err)?
                .label(name.as_str())
                .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 15, y + 5)], color.filled()));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

pub fn scatter_chart(title: &str, samples: &[BmdSample]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to plot".into()));
    }
    let stride = samples.len().div_ceil(MAX_SCATTER);
    let r = samples.iter().map(|s| s.x.abs().max(s.y.abs())).fold(1.0, f64::max) * 1.1;
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (700, 700)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 24))
            .margin(15)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(-r..r, -r..r)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("dx (px)")
            .y_desc("dy (px)")
            .draw()
            .map_err(plot_err)?;
        chart
            .draw_series(
                samples
                    .iter()
                    .step_by(stride)
                    .map(|s| Circle::new((s.x, s.y), 2, PALETTE[0].mix(0.15).filled())),
            )
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

/// Scatter of BMD samples plus a histogram of their directions.
pub fn plot_bmd(samples: &[BmdSample], n_bins: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let scatter = scatter_chart("Box movement distribution", samples)?;
    let counts = direction_histogram(samples, n_bins)?;
    let hist = bar_chart(
        "Displacement directions",
        "direction (deg)",
        360.0 / n_bins as f64,
        &[("samples".to_string(), counts)],
    )?;
    Ok(vec![
        write_svg(out, "bmd_scatter.svg", scatter)?,
        write_svg(out, "bmd_directions.svg", hist)?,
    ])
}

pub fn plot_pdl_sweep(rows: &[PdlSweepRow], out: &Path) -> Result<Vec<PathBuf>> {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.n_pdls);
    let angular = rows.iter().map(|r| (r.n_pdls as f64, r.angular_spread)).collect();
    let origin = rows.iter().map(|r| (r.n_pdls as f64, r.origin_avoidance)).collect();
    let svg = line_chart(
        "Fitness vs number of PDLs",
        "PDLs",
        "score",
        &[("angular spread".into(), angular), ("origin avoidance".into(), origin)],
    )?;
    Ok(vec![write_svg(out, "sweep_pdl.svg", svg)?])
}

pub fn plot_cap_margin(rows: &[CapMarginRow], out: &Path) -> Result<Vec<PathBuf>> {
    let mut caps: Vec<f64> = rows.iter().map(|r| r.cap).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    let series = |pick: fn(&CapMarginRow) -> Option<f64>| -> Vec<(String, Vec<(f64, f64)>)> {
        caps.iter()
            .map(|&c| {
                let mut pts: Vec<_> = rows
                    .iter()
                    .filter(|r| r.cap == c)
                    .filter_map(|r| pick(r).map(|v| (r.margin, v)))
                    .collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                (format!("cap {c}"), pts)
            })
            .collect()
    };
    let origin = line_chart(
        "Origin avoidance vs margin",
        "margin",
        "origin avoidance",
        &series(|r| r.origin_avoidance),
    )?;
    let angular = line_chart(
        "Angular spread vs margin",
        "margin",
        "angular spread",
        &series(|r| r.angular_spread),
    )?;
    Ok(vec![
        write_svg(out, "capmargin_origin.svg", origin)?,
        write_svg(out, "capmargin_angular.svg", angular)?,
    ])
}

/// Windowed success rate and mean reward of one training log.
pub fn plot_training(rows: &[TrainingRow], window: usize, out: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    let window = window.max(1);
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.episode_index);
    let chunks: Vec<_> = rows.chunks(window).collect();
    let rate = chunks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = c.iter().filter(|r| r.outcome.is_success()).count();
            ((i * window) as f64, s as f64 / c.len() as f64)
        })
        .collect();
    let reward = chunks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = c.iter().map(|r| r.total_reward).sum::<f64>() / c.len() as f64;
            ((i * window) as f64, m)
        })
        .collect();
    let label = rows[0].mode.to_string();
    let a = line_chart("Success rate", "episode", "success rate", &[(label.clone(), rate)])?;
    let b = line_chart("Episode reward", "episode", "mean reward", &[(label, reward)])?;
    Ok(vec![
        write_svg(out, "train_success.svg", a)?,
        write_svg(out, "train_reward.svg", b)?,
    ])
}

/// Curves and step histograms from a `compare` summary.
pub fn plot_compare(rows: &[MetricRow], window: usize, out: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no summary rows".into()));
    }
    let mut modes: Vec<&str> = rows.iter().map(|r| r.mode.as_str()).collect();
    modes.sort();
    modes.dedup();
    let curve = |metric: &str| -> Vec<(String, Vec<(f64, f64)>)> {
        modes
            .iter()
            .map(|m| {
                let pts = rows
                    .iter()
                    .filter(|r| r.metric == metric && r.mode == *m)
                    .map(|r| ((r.index * window) as f64, r.value))
                    .collect();
                (m.to_string(), pts)
            })
            .collect()
    };
    let hist = |metric: &str| -> Vec<(String, Vec<u64>)> {
        modes
            .iter()
            .map(|m| {
                let mut counts: Vec<(usize, u64)> = rows
                    .iter()
                    .filter(|r| r.metric == metric && r.mode == *m)
                    .map(|r| (r.index, r.value as u64))
                    .collect();
                counts.sort();
                (m.to_string(), counts.into_iter().map(|c| c.1).collect())
            })
            .collect()
    };
    let mut paths = vec![
        write_svg(
            out,
            "compare_success.svg",
            line_chart("Success rate", "episode", "success rate", &curve("window_success_rate"))?,
        )?,
        write_svg(
            out,
            "compare_reward.svg",
            line_chart("Mean episode reward", "episode", "reward", &curve("window_mean_reward"))?,
        )?,
    ];
    for metric in [
        "success_steps_first_half",
        "success_steps_second_half",
        "failure_steps_first_half",
        "failure_steps_second_half",
    ] {
        let series = hist(metric);
        if series.iter().any(|(_, c)| !c.is_empty()) {
            let svg = bar_chart(&metric.replace('_', " "), "steps", 10.0, &series)?;
            paths.push(write_svg(out, &format!("compare_{metric}.svg"), svg)?);
        }
    }
    Ok(paths)
}
