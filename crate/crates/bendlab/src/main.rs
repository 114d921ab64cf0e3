//! `bendlab` — command-line front end for bendlet-transform experiments:
//! single coefficients, decay curves, slope fits, boundary-point
//! classification, the circles figure, and the structural self-test.
//!
//! Every command is deterministic given the config and seed; the thread
//! count (flag `--threads`, env `BENDLAB_THREADS`) changes wall time
//! only, never output bytes.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bendlab_core::geometry::{Cone, Point};
use bendlab_core::transform::QuadratureSpec;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "bendlab",
    version,
    about = "Bendlet transform laboratory: coefficients, decay sweeps, boundary classification"
)]
struct Cli {
    /// Experiment config JSON (defaults to the built-in disk fixture).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the anisotropy exponent α.
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Override the coarsest dyadic scale index.
    #[arg(long, global = true)]
    jmin: Option<u32>,
    /// Override the finest dyadic scale index.
    #[arg(long, global = true)]
    jmax: Option<u32>,
    /// Use grid quadrature with this oversampling factor.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Use adaptive quadrature with this tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores; env fallback BENDLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (commands with a single output) or directory
    /// (sweep-figure); default: stdout / config output dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rasterize analytic regions with 4×4 supersampling.
    #[arg(long, global = true)]
    supersample: bool,
    #[command(subcommand)]
    cmd: Command,
}

fn parse_point(text: &str) -> Result<Point, String> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y — got {text:?}"))?;
    let px: f64 = x.trim().parse().map_err(|e| format!("bad X {x:?}: {e}"))?;
    let py: f64 = y.trim().parse().map_err(|e| format!("bad Y {y:?}: {e}"))?;
    Ok((px, py))
}

fn parse_cone(text: &str) -> Result<Cone, String> {
    match text.trim() {
        "1" | "+1" => Ok(Cone::Horizontal),
        "-1" => Ok(Cone::Vertical),
        other => Err(format!("iota must be +1 or -1, got {other:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one transform coefficient and print it.
    Coeff {
        /// Scale a ∈ (0, 1].
        #[arg(long)]
        a: f64,
        /// Shear s ∈ [−1, 1].
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// Bending b.
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Translation "X,Y".
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        t: Point,
        /// Cone index: +1 horizontal, -1 vertical.
        #[arg(long, default_value = "1", value_parser = parse_cone, allow_hyphen_values = true)]
        iota: Cone,
    },
    /// Decay curve over the configured scales at one (s, b, t, ι), as CSV.
    Decay {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Translation "X,Y".
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        t: Point,
        /// Cone index: +1 horizontal, -1 vertical.
        #[arg(long, default_value = "1", value_parser = parse_cone, allow_hyphen_values = true)]
        iota: Cone,
    },
    /// Re-fit slopes from a decay CSV.
    Fit {
        /// Decay CSV produced by `decay` or `sweep-figure`.
        input: PathBuf,
    },
    /// Classify query points; emits a JSON array of results.
    Classify {
        /// Query point "X,Y"; repeatable.
        #[arg(long = "point", value_parser = parse_point, allow_hyphen_values = true)]
        points: Vec<Point>,
    },
    /// Reproduce the circles experiment: per-radius decay CSVs and a
    /// summary of recovered bending and curvature.
    SweepFigure,
    /// Run the structural invariant suite and print a pass/fail table.
    Selftest,
}

/// Merges CLI overrides into the loaded (or default) config.
fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(alpha) = cli.alpha {
        cfg.alpha = alpha;
    }
    if let Some(j) = cli.jmin {
        cfg.scales.j_min = j;
    }
    if let Some(j) = cli.jmax {
        cfg.scales.j_max = j;
    }
    match (cli.q, cli.tol) {
        (Some(_), Some(_)) => bail!("--q and --tol are mutually exclusive"),
        (Some(q), None) => cfg.quadrature = QuadratureSpec::ScaledGrid { q },
        (None, Some(tolerance)) => cfg.quadrature = QuadratureSpec::Adaptive { tolerance },
        (None, None) => {}
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cfg.scales.j_min >= cfg.scales.j_max {
        bail!(
            "scale range requires jmin < jmax, got {}..{}",
            cfg.scales.j_min,
            cfg.scales.j_max
        );
    }
    Ok(cfg)
}

/// Sizes the global worker pool: flag first, then BENDLAB_THREADS, then
/// one thread per core.
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BENDLAB_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .with_context(|| format!("BENDLAB_THREADS={v:?} is not a thread count"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing worker pool")?;
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    init_threads(cli.threads)?;
    let cfg = effective_config(&cli)?;
    let out = cli.out.as_deref();
    match &cli.cmd {
        Command::Coeff { a, s, b, t, iota } => {
            commands::cmd_coeff(&cfg, cli.supersample, *a, *s, *b, *t, *iota)
        }
        Command::Decay { s, b, t, iota } => {
            commands::cmd_decay(&cfg, cli.supersample, *s, *b, *t, *iota, out)
        }
        Command::Fit { input } => commands::cmd_fit(input, out),
        Command::Classify { points } => commands::cmd_classify(&cfg, cli.supersample, points, out),
        Command::SweepFigure => {
            let dir = out.map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone());
            commands::cmd_sweep_figure(&cfg, &dir)
        }
        Command::Selftest => commands::cmd_selftest(&cfg),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
