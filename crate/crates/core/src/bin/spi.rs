use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spi_core::fitness::{report_from_samples, simulate_bmd};
use spi_core::harness::compare::{compare_modes, ModeRuns, DEFAULT_WINDOW};
use spi_core::harness::csvio::{self, CapMarginRow, MetricRow, PdlSweepRow, TrainingRow};
use spi_core::harness::sweep::{self, DEFAULT_CAPS, DEFAULT_MARGINS, DEFAULT_PDL_COUNTS, DEFAULT_SWEEP_BUDGET};
use spi_core::harness::{plot, write_manifest, ConfigFile};
use spi_core::spi::{DEFAULT_CAP, DEFAULT_MARGIN, DEFAULT_N_PDLS};
use spi_core::{train, BmdSample, Exploration, FitnessConfig, Mode, Scenario, SpiMap, TrainConfig};

#[derive(Parser)]
#[command(name = "spi", version, about = "Multi-agent box pushing with shared exploration maps")]
struct Cli {
    /// Master seed (default 0, or `seed` from --config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value settings file; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a map and write it to a file.
    BuildMap {
        #[arg(long)]
        n_pdls: Option<usize>,
        #[arg(long)]
        cap: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a saved map for valid distributions and quad structure.
    ValidateMap {
        #[arg(long)]
        map: PathBuf,
    },
    /// Print map metadata and some entries.
    InspectMap {
        #[arg(long)]
        map: PathBuf,
        /// Number of leading entries to print.
        #[arg(long, default_value_t = 8)]
        head: usize,
    },
    /// One-step box movement fitness of an exploration policy.
    Fitness(FitnessArgs),
    /// Fitness across map sizes.
    SweepPdl {
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<usize>>,
        #[arg(long)]
        cap: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fitness across a cap x margin grid.
    SweepCapmargin {
        #[arg(long, value_delimiter = ',')]
        caps: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        margins: Option<Vec<f64>>,
        #[arg(long)]
        n_pdls: Option<usize>,
        /// Simulations per cell; default splits a fixed budget over the grid.
        #[arg(long)]
        sims_per_cell: Option<usize>,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train Q-learning agents; writes one CSV per run.
    Train(TrainArgs),
    /// Summarize SPI against random training logs.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        spi: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        random: Vec<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render SVG figures from harness CSV output.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = 15)]
        bins: usize,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    speed_factor: Option<f64>,
}

#[derive(Args)]
struct FitnessArgs {
    /// Evaluate a saved map.
    #[arg(long, conflicts_with_all = ["random", "spi"])]
    map: Option<PathBuf>,
    /// Uniform random exploration.
    #[arg(long, conflicts_with = "spi")]
    random: bool,
    /// Build a map from n_pdls/cap/margin and evaluate it.
    #[arg(long)]
    spi: bool,
    #[arg(long)]
    n_pdls: Option<usize>,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[command(flatten)]
    sim: SimArgs,
    /// Directory for the raw sample CSV and manifest.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// CSV file for the single report row.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    speed_factor: Option<f64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    agents: Option<usize>,
    /// Scenario file; the built-in default arena otherwise.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PlotKind {
    Bmd,
    PdlSweep,
    CapMargin,
    Training,
    Compare,
}

struct Ctx {
    cfg: ConfigFile,
    seed: u64,
}

impl Ctx {
    fn fitness(&self, a: &SimArgs) -> anyhow::Result<FitnessConfig> {
        let d = FitnessConfig::default();
        Ok(FitnessConfig {
            n_agents: self.cfg.resolve(a.agents, "agents", d.n_agents)?,
            n_sims: self.cfg.resolve(a.sims, "sims", d.n_sims)?,
            n_bins: match a.bins {
                Some(b) => Some(b),
                None => self.cfg.get("bins")?,
            },
            speed_factor: self.cfg.resolve(a.speed_factor, "speed_factor", d.speed_factor)?,
            dynamics: d.dynamics,
        })
    }

    fn map_params(&self, n: Option<usize>, cap: Option<f64>, margin: Option<f64>) -> anyhow::Result<(usize, f64, f64)> {
        Ok((
            self.cfg.resolve(n, "n_pdls", DEFAULT_N_PDLS)?,
            self.cfg.resolve(cap, "cap", DEFAULT_CAP)?,
            self.cfg.resolve(margin, "margin", DEFAULT_MARGIN)?,
        ))
    }
}

fn kv(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn load_map(p: &Path) -> anyhow::Result<SpiMap> {
    SpiMap::load(p).with_context(|| format!("reading map {}", p.display()))
}

fn parent_dir(p: &Path) -> &Path {
    p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => ConfigFile::default(),
    };
    let seed = cfg.resolve(cli.seed, "seed", 0u64)?;
    let ctx = Ctx { cfg, seed };

    match cli.cmd {
        Cmd::BuildMap { n_pdls, cap, margin, out } => {
            let (n, cap, margin) = ctx.map_params(n_pdls, cap, margin)?;
            let map = SpiMap::build(n, cap, margin, seed)?;
            map.save(&out)?;
            println!("map n_pdls={n} cap={cap} margin={margin} seed={seed} path={}", out.display());
        }
        Cmd::ValidateMap { map } => {
            let m = load_map(&map)?;
            m.check_structure()?;
            println!("ok n_pdls={} cap={} margin={}", m.len(), m.cap, m.margin);
        }
        Cmd::InspectMap { map, head } => {
            let m = load_map(&map)?;
            println!("n_pdls={} cap={} margin={} seed={}", m.len(), m.cap, m.margin, m.seed);
            for (i, p) in m.pdls().iter().take(head).enumerate() {
                let probs: Vec<String> = p.probs().iter().map(|v| format!("{v:.4}")).collect();
                println!("{i}: {}", probs.join(" "));
            }
        }
        Cmd::Fitness(a) => fitness_cmd(&ctx, a)?,
        Cmd::SweepPdl { counts, cap, margin, sim, out } => {
            let counts = match counts {
                Some(c) => c,
                None => ctx.cfg.get_list("counts")?.unwrap_or(DEFAULT_PDL_COUNTS.to_vec()),
            };
            let (_, cap, margin) = ctx.map_params(None, cap, margin)?;
            let fc = ctx.fitness(&sim)?;
            let rows = sweep::sweep_pdl_count(&counts, cap, margin, &fc, seed)?;
            csvio::save_rows(&rows, &out)?;
            for r in &rows {
                println!(
                    "n_pdls={} origin_avoidance={:.4} angular_spread={:.4} raw_cv={:.4}",
                    r.n_pdls, r.origin_avoidance, r.angular_spread, r.raw_cv
                );
            }
            write_manifest(parent_dir(&out), "sweep-pdl", seed, &kv(&[
                ("counts", format!("{counts:?}")),
                ("cap", cap.to_string()),
                ("margin", margin.to_string()),
                ("sims", fc.n_sims.to_string()),
            ]))?;
        }
        Cmd::SweepCapmargin { caps, margins, n_pdls, sims_per_cell, agents, out } => {
            let caps = match caps {
                Some(c) => c,
                None => ctx.cfg.get_list("caps")?.unwrap_or(DEFAULT_CAPS.to_vec()),
            };
            let margins = match margins {
                Some(m) => m,
                None => ctx.cfg.get_list("margins")?.unwrap_or(DEFAULT_MARGINS.to_vec()),
            };
            let (n, _, _) = ctx.map_params(n_pdls, None, None)?;
            let default_sims = sweep::sims_per_cell(DEFAULT_SWEEP_BUDGET, caps.len() * margins.len());
            let fc = FitnessConfig {
                n_sims: ctx.cfg.resolve(sims_per_cell, "sims_per_cell", default_sims)?,
                n_agents: ctx.cfg.resolve(agents, "agents", 15)?,
                ..Default::default()
            };
            let rows = sweep::sweep_cap_margin(&caps, &margins, n, &fc, seed)?;
            csvio::save_rows(&rows, &out)?;
            for r in &rows {
                match r.report() {
                    Some((o, s)) => println!("cap={} margin={} origin_avoidance={o:.4} angular_spread={s:.4}", r.cap, r.margin),
                    None => println!("cap={} margin={} skipped", r.cap, r.margin),
                }
            }
            write_manifest(parent_dir(&out), "sweep-capmargin", seed, &kv(&[
                ("n_pdls", n.to_string()),
                ("sims_per_cell", fc.n_sims.to_string()),
            ]))?;
        }
        Cmd::Train(a) => train_cmd(&ctx, a)?,
        Cmd::Compare { spi, random, window, out } => {
            let window = ctx.cfg.resolve(window, "window", DEFAULT_WINDOW)?;
            let load = |paths: &[PathBuf]| -> anyhow::Result<ModeRuns> {
                let runs = paths
                    .iter()
                    .map(|p| csvio::load_rows::<TrainingRow>(p).with_context(|| format!("reading {}", p.display())))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                Ok(ModeRuns::from_rows(&runs)?)
            };
            let (s, r) = (load(&spi)?, load(&random)?);
            if s.mode != Mode::Spi || r.mode != Mode::Random {
                bail!(spi_core::Error::InvalidInput("--spi logs must be spi mode and --random logs random mode".into()));
            }
            let stats = compare_modes(&s, &r, window)?;
            for side in [&stats.spi, &stats.random] {
                println!(
                    "{} runs={} final_success_rate={:.4} final_mean_reward={:.2} mean_success_steps_second_half={}",
                    side.label,
                    side.n_runs,
                    side.final_success_rate,
                    side.final_mean_reward,
                    side.mean_success_steps_second_half.map_or("na".into(), |v| format!("{v:.2}")),
                );
            }
            if let Some(out) = out {
                csvio::save_rows(&stats.to_rows(), &out)?;
            }
        }
        Cmd::Plot { kind, input, out, window, bins } => {
            let files = match kind {
                PlotKind::Bmd => plot::plot_bmd(&csvio::load_rows::<BmdSample>(&input)?, bins, &out)?,
                PlotKind::PdlSweep => plot::plot_pdl_sweep(&csvio::load_rows::<PdlSweepRow>(&input)?, &out)?,
                PlotKind::CapMargin => plot::plot_cap_margin(&csvio::load_rows::<CapMarginRow>(&input)?, &out)?,
                PlotKind::Training => plot::plot_training(&csvio::load_rows::<TrainingRow>(&input)?, window, &out)?,
                PlotKind::Compare => plot::plot_compare(&csvio::load_rows::<MetricRow>(&input)?, window, &out)?,
            };
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn fitness_cmd(ctx: &Ctx, a: FitnessArgs) -> anyhow::Result<()> {
    let fc = ctx.fitness(&a.sim)?;
    let map = match (&a.map, a.random, a.spi) {
        (Some(p), _, _) => Some(load_map(p)?),
        (None, true, _) => None,
        (None, false, true) => {
            let (n, cap, margin) = ctx.map_params(a.n_pdls, a.cap, a.margin)?;
            Some(SpiMap::build(n, cap, margin, ctx.seed)?)
        }
        (None, false, false) => bail!(spi_core::Error::InvalidInput("choose one of --map, --random, --spi".into())),
    };
    let policy = match &map {
        Some(m) => Exploration::Spi(m),
        None => Exploration::Random,
    };
    let t0 = Instant::now();
    let samples = simulate_bmd(policy, &fc, ctx.seed)?;
    let report = report_from_samples(&samples, &fc)?;
    println!(
        "mode={} agents={} sims={} bins={} origin_avoidance={:.4} angular_spread={:.4} raw_cv={:.4} elapsed_s={:.2}",
        policy.label(),
        fc.n_agents,
        report.n_sims,
        report.n_bins,
        report.origin_avoidance,
        report.angular_spread,
        report.raw_cv,
        t0.elapsed().as_secs_f64()
    );
    let row = csvio::fitness_row(policy.label(), &report, fc.n_agents, fc.speed_factor, ctx.seed);
    if let Some(out) = &a.out {
        csvio::save_rows(&[row], out)?;
    }
    if let Some(dir) = &a.dump {
        std::fs::create_dir_all(dir)?;
        csvio::save_samples(&samples, dir.join("bmd_samples.csv"))?;
        let mut entries = kv(&[
            ("mode", policy.label().to_string()),
            ("agents", fc.n_agents.to_string()),
            ("sims", fc.n_sims.to_string()),
            ("bins", report.n_bins.to_string()),
            ("speed_factor", fc.speed_factor.to_string()),
        ]);
        if let Some(m) = &map {
            entries.extend(kv(&[
                ("n_pdls", m.len().to_string()),
                ("cap", m.cap.to_string()),
                ("margin", m.margin.to_string()),
            ]));
        }
        write_manifest(dir, "fitness", ctx.seed, &entries)?;
    }
    Ok(())
}

fn train_cmd(ctx: &Ctx, a: TrainArgs) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let d = TrainConfig::default();
    let mut base = TrainConfig {
        mode: cfg.resolve(a.mode, "mode", d.mode)?,
        speed_factor: cfg.resolve(a.speed_factor, "speed_factor", d.speed_factor)?,
        episodes: cfg.resolve(a.episodes, "episodes", d.episodes)?,
        max_steps: cfg.resolve(a.max_steps, "max_steps", d.max_steps)?,
        n_agents: cfg.resolve(a.agents, "agents", d.n_agents)?,
        n_pdls: cfg.resolve(None, "n_pdls", d.n_pdls)?,
        cap: cfg.resolve(None, "cap", d.cap)?,
        margin: cfg.resolve(None, "margin", d.margin)?,
        alpha: cfg.resolve(None, "alpha", d.alpha)?,
        gamma: cfg.resolve(None, "gamma", d.gamma)?,
        angle_bins: cfg.resolve(None, "angle_bins", d.angle_bins)?,
        seed: ctx.seed,
        ..d
    };
    base.epsilon.start = cfg.resolve(None, "epsilon_start", base.epsilon.start)?;
    base.epsilon.end = cfg.resolve(None, "epsilon_end", base.epsilon.end)?;
    base.epsilon.decay_fraction = cfg.resolve(None, "epsilon_decay", base.epsilon.decay_fraction)?;
    base.weights.w1 = cfg.resolve(None, "w1", base.weights.w1)?;
    base.weights.w2 = cfg.resolve(None, "w2", base.weights.w2)?;
    base.weights.w3 = cfg.resolve(None, "w3", base.weights.w3)?;
    base.weights.w4 = cfg.resolve(None, "w4", base.weights.w4)?;
    base.dynamics.k_t = cfg.resolve(None, "k_t", base.dynamics.k_t)?;
    base.dynamics.k_r = cfg.resolve(None, "k_r", base.dynamics.k_r)?;
    base.validate()?;
    let runs = cfg.resolve(a.runs, "runs", 1usize)?;
    if runs == 0 {
        bail!(spi_core::Error::InvalidInput("runs must be at least 1".into()));
    }
    let scenario_path = match &a.scenario {
        Some(p) => Some(p.clone()),
        None => cfg.get::<PathBuf>("scenario")?,
    };
    let scenario = match &scenario_path {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    std::fs::create_dir_all(&a.out)?;
    let results: Vec<_> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let config = TrainConfig { seed: ctx.seed + i, ..base };
            train(&config, &scenario).map(|log| (config.seed, log))
        })
        .collect::<Result<_, _>>()?;
    for (s, log) in &results {
        let path = a.out.join(format!("train_{}_seed{s}.csv", base.mode));
        csvio::save_rows(&csvio::training_rows(log), &path)?;
        let tail = log.records.len().min(DEFAULT_WINDOW);
        let last = &log.records[log.records.len() - tail..];
        let rate = last.iter().filter(|r| r.outcome.is_success()).count() as f64 / tail as f64;
        println!("seed={s} mode={} final_success_rate={rate:.3} path={}", base.mode, path.display());
    }
    write_manifest(&a.out, "train", ctx.seed, &kv(&[
        ("mode", base.mode.to_string()),
        ("speed_factor", base.speed_factor.to_string()),
        ("episodes", base.episodes.to_string()),
        ("max_steps", base.max_steps.to_string()),
        ("agents", base.n_agents.to_string()),
        ("runs", runs.to_string()),
        ("alpha", base.alpha.to_string()),
        ("gamma", base.gamma.to_string()),
        ("scenario", scenario_path.map_or("default".into(), |p| p.display().to_string())),
    ]))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<spi_core::Error>().map_or("error", |e| e.kind());
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error kind={kind} message={msg}");
            ExitCode::FAILURE
        }
    }
}
