use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, LatticeConfig};
use super::grid::{build_grid, EvaluationGrid};
use super::io::{DensityRow, ResultRow};
use super::source::PointPlan;
use super::stats::{estimate_iv, estimate_mise, fit_rate, E19Source, Estimate, RateFit};
use crate::error::{Error, Result};
use crate::estimator::{
    combine, fit_combo_weights, kde_bandwidth, kde_grid, ratio_density, ComboWeights, Denominator, EstimatorKind,
    KdeSpec, RatioAccumulator,
};
use crate::models::DensityModel;
use crate::points::{rng_stream, PointKind, UniformStream};

const GRID_STREAM: u64 = u64::MAX;
const MAIN_SALT: u64 = 0;
const REFERENCE_SALT: u64 = 1;

/// Stream of replication `r` at size `n`; `salt` separates independent runs of one experiment.
pub fn rep_stream(seed: u64, salt: u64, n: usize, r: usize) -> UniformStream {
    rng_stream(seed, salt << 48 | (n.trailing_zeros() as u64) << 32 | r as u64)
}

/// What one batch of replications estimates.
#[derive(Clone, Debug)]
pub struct RunSpec<'a> {
    pub kind: EstimatorKind,
    pub variant: &'a str,
    pub pointset: PointKind,
    pub n: usize,
    pub n_r: usize,
    pub seed: u64,
    pub salt: u64,
    pub lattice: &'a LatticeConfig,
    pub bandwidth: Option<f64>,
}

/// Outcome of `n_r` independent replications at one size.
#[derive(Clone, Debug)]
pub struct Replications {
    /// Final per-replication estimates on the grid (`n_r × n_e`).
    pub estimates: Vec<Vec<f64>>,
    /// Grand-mean density and its standard error at each grid point.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Per-replication average denominator weight (1 for plain averages).
    pub denominators: Vec<f64>,
    pub rejected: u64,
    pub combo: Option<ComboWeights>,
}

struct RepOut {
    outputs: Vec<Vec<f64>>,
    weight: f64,
    rejected: u64,
}

/// Runs `spec.n_r` replications of one estimator on a fixed grid.
pub fn run_replications(model: &dyn DensityModel, spec: &RunSpec, grid: &EvaluationGrid) -> Result<Replications> {
    if spec.n_r == 0 {
        return Err(Error::invalid("at least one replication is needed"));
    }
    let n_e = grid.n_e();
    let nf = spec.n as f64;
    let (reps, denominator, outputs) = if spec.kind == EstimatorKind::Kde {
        let sampler = model.sampler()?;
        let plan = PointPlan::new(spec.pointset, sampler.dim(), spec.n, spec.lattice)?;
        let reps: Vec<RepOut> = (0..spec.n_r)
            .into_par_iter()
            .map(|r| {
                let mut xs = Vec::with_capacity(spec.n);
                plan.for_each(rep_stream(spec.seed, spec.salt, spec.n, r), &mut |u| {
                    if let Some(x) = sampler.sample(u) {
                        xs.push(x);
                    }
                })?;
                let rejected = (spec.n - xs.len()) as u64;
                xs.sort_by(f64::total_cmp);
                let h = match spec.bandwidth {
                    Some(h) => h,
                    None => kde_bandwidth(&xs)?,
                };
                let mut out = vec![0.0; n_e];
                kde_grid(&xs, KdeSpec::new(h)?, &grid.points, &mut out);
                Ok(RepOut { outputs: vec![out], weight: 1.0, rejected })
            })
            .collect::<Result<_>>()?;
        (reps, Denominator::One, 1)
    } else {
        let realizer = model.realizer(spec.kind, spec.variant)?;
        let plan = PointPlan::new(spec.pointset, realizer.dim(), spec.n, spec.lattice)?;
        let m = realizer.outputs();
        let denominator = realizer.denominator();
        let scale = match denominator {
            Denominator::Known(mean) => 1.0 / (nf * mean),
            _ => 1.0 / nf,
        };
        let reps: Vec<RepOut> = (0..spec.n_r)
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![vec![0.0; n_e]; m];
                let (mut weight, mut rejected) = (0.0, 0u64);
                plan.for_each(rep_stream(spec.seed, spec.salt, spec.n, r), &mut |u| {
                    let c = realizer.accumulate(u, &grid.points, &mut acc);
                    weight += c.weight;
                    rejected += c.rejected as u64;
                })?;
                realizer.finish(&mut acc);
                acc.iter_mut().flatten().for_each(|v| *v *= scale);
                Ok(RepOut { outputs: acc, weight: weight / nf, rejected })
            })
            .collect::<Result<_>>()?;
        (reps, denominator, m)
    };
    let rejected = reps.iter().map(|r| r.rejected).sum();
    if rejected > 0 {
        log::info!("{}: {rejected} rejected draws at n={}", model.name(), spec.n);
    }
    let denominators: Vec<f64> = reps.iter().map(|r| r.weight).collect();
    let mut combo = None;
    let estimates: Vec<Vec<f64>> = if outputs > 1 {
        let all: Vec<Vec<Vec<f64>>> = reps.into_iter().map(|r| r.outputs).collect();
        let w = fit_combo_weights(&all)?;
        let est = all.iter().map(|r| combine(&w, r)).collect();
        combo = Some(w);
        est
    } else if denominator == Denominator::Estimated {
        reps.iter()
            .map(|r| {
                if !(r.weight > 0.0) {
                    return Err(Error::Numerical("replication with zero ratio denominator".into()));
                }
                Ok(r.outputs[0].iter().map(|d| d / r.weight).collect())
            })
            .collect::<Result<_>>()?
    } else {
        reps.into_iter().map(|mut r| r.outputs.swap_remove(0)).collect()
    };
    let (mean, stderr) = if denominator == Denominator::Estimated && outputs == 1 {
        // Ratio of grand sums: rebuild the numerators D̄_r from the per-replication ratios.
        let mut acc = RatioAccumulator::new(None);
        for (e, &w) in estimates.iter().zip(&denominators) {
            acc.push(e.iter().map(|f| f * w).collect(), w);
        }
        (0..n_e)
            .map(|j| ratio_density(&acc, j).map(|(f, v)| (f, v.sqrt())))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip()
    } else {
        column_stats(&estimates, n_e)
    };
    Ok(Replications { estimates, mean, stderr, denominators, rejected, combo })
}

fn column_stats(rows: &[Vec<f64>], n_e: usize) -> (Vec<f64>, Vec<f64>) {
    let m = rows.len() as f64;
    (0..n_e)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / m;
            let se = if rows.len() < 2 {
                f64::NAN
            } else {
                (rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / (m - 1.0) / m).sqrt()
            };
            (mean, se)
        })
        .unzip()
}

/// Whether a curve holds integrated variances or MISE values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Iv,
    Mise,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Iv => "iv",
            Metric::Mise => "mise",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub rejected: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvCurve {
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
    pub fit: RateFit,
}

/// Combination weights fitted at one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboFit {
    pub n: usize,
    pub beta: Vec<f64>,
    pub singular: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub model: String,
    pub variant: String,
    pub estimator: EstimatorKind,
    pub pointset: PointKind,
    pub seed: u64,
    pub n_r: usize,
    pub grid: EvaluationGrid,
    pub curve: IvCurve,
    /// Grand-mean density at the largest size.
    pub density: Vec<DensityRow>,
    pub combo: Vec<ComboFit>,
}

impl ExperimentOutput {
    pub fn rows(&self) -> Vec<ResultRow> {
        let fit = &self.curve.fit;
        self.curve
            .points
            .iter()
            .map(|p| ResultRow {
                model: self.model.clone(),
                variant: self.variant.clone(),
                estimator: self.estimator.name().into(),
                pointset: self.pointset.name().into(),
                n: p.n,
                n_r: self.n_r,
                n_e: self.grid.n_e(),
                a: self.grid.a,
                b: self.grid.b,
                iv: p.value,
                iv_stderr: p.stderr,
                nu_hat: fit.nu,
                k_hat: fit.k,
                e19: fit.e19,
                seed: self.seed,
                metric: self.curve.metric.name().into(),
                e19_source: fit.e19_source.name().into(),
            })
            .collect()
    }

    /// File-name stem identifying the experiment.
    pub fn label(&self) -> String {
        let variant: String =
            self.variant.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
        format!("{}_{}_{}_{}", self.model, self.estimator, variant, self.pointset)
    }
}

/// The variant named in the config, or the model's default for the estimator.
pub fn resolve_variant(model: &dyn DensityModel, cfg: &ExperimentConfig) -> Result<String> {
    let options = model.variants(cfg.estimator);
    match (&cfg.variant, cfg.estimator) {
        (Some(v), EstimatorKind::Kde) if v != "plain" => {
            Err(Error::UnknownOption { field: "variant", value: v.clone(), options: "plain".into() })
        }
        (Some(v), _) => Ok(v.clone()),
        (None, _) => options
            .into_iter()
            .next()
            .ok_or_else(|| Error::Unsupported { model: model.name().into(), kind: cfg.estimator.name().into() }),
    }
}

/// Reference density on the grid for KDE MISE: the closed form when the
/// model has one, else the grand mean of a large CDE run.
pub fn reference_density(model: &dyn DensityModel, cfg: &ExperimentConfig, grid: &EvaluationGrid) -> Result<Vec<f64>> {
    if let Some(exact) = grid.points.iter().map(|&x| model.exact_density(x)).collect::<Option<Vec<f64>>>() {
        return Ok(exact);
    }
    let r = &cfg.reference;
    let variant = match &r.variant {
        Some(v) => v.clone(),
        None => model
            .cde_variants()
            .into_iter()
            .next()
            .ok_or_else(|| Error::Unsupported { model: model.name().into(), kind: "cde reference".into() })?,
    };
    log::info!("{}: reference CDE {variant} {} n={} n_r={}", model.name(), r.pointset, r.n, r.n_r);
    let spec = RunSpec {
        kind: EstimatorKind::Cde,
        variant: &variant,
        pointset: r.pointset,
        n: r.n,
        n_r: r.n_r,
        seed: cfg.seed,
        salt: REFERENCE_SALT,
        lattice: &cfg.lattice,
        bandwidth: None,
    };
    Ok(run_replications(model, &spec, grid)?.mean)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let model = model.as_ref();
    let variant = resolve_variant(model, cfg)?;
    let (a, b) = match cfg.interval {
        Some([a, b]) => (a, b),
        None => model.interval(),
    };
    let grid = build_grid(a, b, cfg.n_e, &mut rng_stream(cfg.seed, GRID_STREAM))?;
    let metric = if cfg.estimator == EstimatorKind::Kde { Metric::Mise } else { Metric::Iv };
    let reference = match metric {
        Metric::Mise => Some(reference_density(model, cfg, &grid)?),
        Metric::Iv => None,
    };
    let mut sizes = cfg.sizes();
    sizes.sort_unstable();
    sizes.dedup();
    let n_r = cfg.reps();
    let mut points = Vec::with_capacity(sizes.len());
    let mut combo = Vec::new();
    let mut last = None;
    for &n in &sizes {
        let spec = RunSpec {
            kind: cfg.estimator,
            variant: &variant,
            pointset: cfg.pointset,
            n,
            n_r,
            seed: cfg.seed,
            salt: MAIN_SALT,
            lattice: &cfg.lattice,
            bandwidth: cfg.bandwidth,
        };
        let reps = run_replications(model, &spec, &grid)?;
        let est: Estimate = match &reference {
            Some(f) => estimate_mise(&reps.estimates, &grid, f)?,
            None => estimate_iv(&reps.estimates, &grid)?.0,
        };
        log::info!(
            "{} {} {variant} {} n={n}: {}={:.6e} (se {:.2e})",
            model.name(),
            cfg.estimator,
            cfg.pointset,
            metric.name(),
            est.value,
            est.stderr
        );
        points.push(CurvePoint { n, value: est.value, stderr: est.stderr, rejected: reps.rejected });
        if let Some(w) = &reps.combo {
            combo.push(ComboFit { n, beta: w.beta.clone(), singular: w.singular });
        }
        last = Some(reps);
    }
    let pairs: Vec<(usize, f64)> = points.iter().map(|p| (p.n, p.value)).collect();
    let fit = fit_rate(&pairs).unwrap_or_else(|e| {
        log::warn!("no rate fit: {e}");
        let measured = pairs.iter().find(|p| p.0 == 1 << 19).map(|p| -p.1.log2());
        RateFit {
            nu: f64::NAN,
            k: f64::NAN,
            e19: measured.unwrap_or(f64::NAN),
            e19_source: if measured.is_some() { E19Source::Measured } else { E19Source::Extrapolated },
        }
    });
    let last = last.expect("validated configs list at least one size");
    let density = grid
        .points
        .iter()
        .zip(last.mean.iter().zip(&last.stderr))
        .map(|(&x, (&fhat, &stderr))| DensityRow { x, fhat, stderr })
        .collect();
    Ok(ExperimentOutput {
        model: model.name().into(),
        variant,
        estimator: cfg.estimator,
        pointset: cfg.pointset,
        seed: cfg.seed,
        n_r,
        grid,
        curve: IvCurve { metric, points, fit },
        density,
        combo,
    })
}
