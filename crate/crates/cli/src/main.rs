use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use condens::experiments::{
    fit_rate, korobov_parameter, read_config, read_density, read_results, run_experiment, write_outputs, LatticeConfig,
};
use condens::numerics::trapezoid_points;
use condens::points::{
    baker_transform, mc_points, random_shift, rank1_lattice, rng_stream, sobol_lms_shift, GeneratingVector, PointKind,
    RandomizedPointSet,
};
use condens::quantile::run_quantile;
use serde_json::json;

#[derive(Parser)]
#[command(name = "condens", version, about = "Conditional density estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a randomized point set as CSV, one point per row.
    Points {
        #[arg(long)]
        kind: PointKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Korobov parameter `a`, or a JSON file `{"n": .., "z": [..]}`.
        #[arg(long)]
        gen: Option<String>,
    },
    /// Run the experiments in a config file and write results.csv plus density dumps.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Use the full-scale sizes and replication count.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refit rates from the IV column of a results.csv.
    Rate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Summarize a density dump.
    Density {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Quantile, confidence interval and expected shortfall for each config, as JSON.
    Quantile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        q: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
    /// Search a Korobov parameter and print it as a generating-vector entry.
    Korobov {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.6)]
        rho: f64,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Points { kind, n, dim, seed, gen } => points(kind, n, dim, seed, gen.as_deref()),
        Command::Run { config, full, out } => run(&config, full, out),
        Command::Rate { input } => rate(&input),
        Command::Density { input } => density(&input),
        Command::Quantile { config, q, level } => quantile(&config, q, level),
        Command::Korobov { n, dim, rho, order } => {
            let lattice = LatticeConfig { rho, max_order: order, ..LatticeConfig::default() };
            let a = korobov_parameter(n, dim, &lattice)?;
            println!("{}", serde_json::to_string(&GeneratingVector::korobov(n as u64, a)?)?);
            Ok(())
        }
    }
}

/// 17 significant digits in plain decimal notation.
fn plain(u: f64) -> String {
    if u == 0.0 || !u.is_finite() {
        return format!("{u}");
    }
    let digits = (16 - u.abs().log10().floor() as i32).max(0) as usize;
    format!("{u:.digits$}")
}

fn generator(gen: Option<&str>, n: usize, dim: usize) -> Result<Vec<u64>> {
    let g = match gen {
        Some(text) => match text.parse::<u64>() {
            Ok(a) => GeneratingVector::korobov(n as u64, a)?,
            Err(_) => {
                let body = std::fs::read_to_string(text).with_context(|| format!("reading {text}"))?;
                GeneratingVector::from_json(&body).with_context(|| format!("parsing {text}"))?
            }
        },
        None => GeneratingVector::korobov(n as u64, korobov_parameter(n, dim, &LatticeConfig::default())?)?,
    };
    if g.n != n as u64 {
        bail!("generating vector is for n = {}, but --n is {n}", g.n);
    }
    Ok(g.vector(dim)?)
}

fn point_set(kind: PointKind, n: usize, dim: usize, seed: u64, gen: Option<&str>) -> Result<RandomizedPointSet> {
    let mut stream = rng_stream(seed, 0);
    if gen.is_some() && !kind.is_lattice() {
        bail!("--gen applies to lattice point sets only");
    }
    Ok(match kind {
        PointKind::Mc => mc_points(n, dim, &mut stream)?,
        PointKind::SobolLms => sobol_lms_shift(n, dim, &mut stream)?,
        PointKind::LatticeShift | PointKind::LatticeShiftBaker => {
            if !n.is_power_of_two() {
                bail!("lattice sizes must be powers of 2, got {n}");
            }
            let z = if n < 8 || dim == 1 { vec![1; dim] } else { generator(gen, n, dim)? };
            let pts = random_shift(rank1_lattice(n, &z)?, &mut stream);
            if kind == PointKind::LatticeShiftBaker {
                baker_transform(pts)
            } else {
                pts
            }
        }
    })
}

fn points(kind: PointKind, n: usize, dim: usize, seed: u64, gen: Option<&str>) -> Result<()> {
    let pts = point_set(kind, n, dim, seed, gen)?;
    let mut out = BufWriter::new(std::io::stdout().lock());
    for p in pts.points() {
        let row: Vec<String> = p.iter().map(|&u| plain(u)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn run(config: &Path, full: bool, out: Option<PathBuf>) -> Result<()> {
    let mut configs = read_config(config)?;
    let dir = out.or_else(|| configs.iter().find_map(|c| c.output.clone())).unwrap_or_else(|| PathBuf::from("results"));
    let mut outputs = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter_mut().enumerate() {
        cfg.full |= full;
        let o = run_experiment(cfg).with_context(|| format!("experiment {} of {}", i + 1, config.display()))?;
        let fit = &o.curve.fit;
        eprintln!("{}: nu_hat {:.3}, e19 {:.2} ({})", o.label(), fit.nu, fit.e19, fit.e19_source.name());
        outputs.push(o);
    }
    write_outputs(&outputs, &dir)?;
    eprintln!("wrote {}", dir.join("results.csv").display());
    Ok(())
}

fn rate(input: &Path) -> Result<()> {
    let rows = read_results(input)?;
    type Key = (String, String, String, String, String);
    let mut groups: BTreeMap<Key, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        let key = (r.model, r.variant, r.estimator, r.pointset, r.metric);
        groups.entry(key).or_default().push((r.n, r.iv));
    }
    println!("model,variant,estimator,pointset,metric,nu_hat,k_hat,e19,e19_source");
    for ((model, variant, estimator, pointset, metric), pts) in groups {
        let (nu, k, e19, source) = match fit_rate(&pts) {
            Ok(f) => (f.nu, f.k, f.e19, f.e19_source.name()),
            Err(e) => {
                eprintln!("warning: {model} {variant} {estimator} {pointset}: {e}");
                (f64::NAN, f64::NAN, f64::NAN, "none")
            }
        };
        println!("{model},{variant},{estimator},{pointset},{metric},{nu:.4},{k:.6e},{e19:.3},{source}");
    }
    Ok(())
}

fn density(input: &Path) -> Result<()> {
    let rows = read_density(input)?;
    if rows.is_empty() {
        bail!("{} has no density rows", input.display());
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let fs: Vec<f64> = rows.iter().map(|r| r.fhat).collect();
    let summary = json!({
        "points": rows.len(),
        "x_min": xs.iter().copied().fold(f64::INFINITY, f64::min),
        "x_max": xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "mass": trapezoid_points(&xs, &fs),
        "fhat_max": fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "stderr_max": rows.iter().map(|r| r.stderr).fold(0.0, f64::max),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn quantile(config: &Path, q: f64, level: f64) -> Result<()> {
    let configs = read_config(config)?;
    let reports = configs.iter().map(|c| run_quantile(c, q, level)).collect::<condens::Result<Vec<_>>>()?;
    let text = match reports.as_slice() {
        [one] => serde_json::to_string_pretty(one)?,
        many => serde_json::to_string_pretty(many)?,
    };
    println!("{text}");
    Ok(())
}
