//! Quantiles from the averaged conditional cdf, with CLT confidence
//! intervals that plug in the conditional density estimate, and the
//! empirical expected shortfall.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{ConditionalDensity, DynConditioning, EstimatorKind};
use crate::experiments::{rep_stream, resolve_variant, ExperimentConfig, PointPlan};
use crate::points::{PointKind, UniformStream};
use crate::special::norm_inv;

/// F̂(x) = (1/n) Σ F(x | G⁽ⁱ⁾) over stored conditional distributions.
pub struct CdfAverage<D> {
    densities: Vec<D>,
}

impl<D: ConditionalDensity> CdfAverage<D> {
    pub fn new(densities: Vec<D>) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::invalid("a cdf average needs at least one conditional distribution"));
        }
        Ok(CdfAverage { densities })
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn densities(&self) -> &[D] {
        &self.densities
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.densities.iter().map(|d| d.cdf(x)).sum::<f64>() / self.len() as f64
    }

    /// The CDE f̂(x).
    pub fn density(&self, x: f64) -> f64 {
        self.densities.iter().map(|d| d.density(x)).sum::<f64>() / self.len() as f64
    }
}

/// inf{x : F(x) ≥ q} for a non-decreasing `cdf`, by bisection on a bracket
/// grown from `[a, b]`, to tolerance 10⁻¹⁰(b − a).
pub fn quantile_of<F: Fn(f64) -> f64>(cdf: F, q: f64, a: f64, b: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("initial bracket needs finite a < b, got [{a}, {b}]")));
    }
    let tol = 1e-10 * (b - a);
    let (mut lo, mut hi) = (a, b);
    let mut step = b - a;
    let mut grown = 0;
    while cdf(lo) >= q {
        lo -= step;
        step *= 2.0;
        grown += 1;
        if grown > 64 {
            return Err(Error::Numerical(format!("cdf stays >= {q} down to {lo}")));
        }
    }
    step = b - a;
    while cdf(hi) < q {
        hi += step;
        step *= 2.0;
        grown += 1;
        if grown > 128 || !hi.is_finite() {
            return Err(Error::Numerical(format!("cdf stays below {q} up to {hi}")));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn quantile_from_cdf<D: ConditionalDensity>(avg: &CdfAverage<D>, q: f64, bracket: (f64, f64)) -> Result<f64> {
    quantile_of(|x| avg.cdf(x), q, bracket.0, bracket.1)
}

fn z_of(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    Ok(norm_inv(0.5 + 0.5 * level))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileCi {
    pub q: f64,
    pub xi: f64,
    pub lower: f64,
    pub upper: f64,
    /// f̂(ξ̂) from the conditional densities.
    pub density: f64,
    /// Var̂[F(ξ̂|G)] / f̂(ξ̂)².
    pub sigma2_cmc: f64,
    /// q(1 − q) / f̂(ξ̂)², the constant of the empirical quantile.
    pub sigma2_plain: f64,
    pub n: usize,
}

/// ξ̂ ± z·σ̂_cmc/√n with σ̂²_cmc = Var̂[F(ξ̂|G)]/f̂(ξ̂)².
pub fn quantile_ci<D: ConditionalDensity>(
    avg: &CdfAverage<D>,
    q: f64,
    level: f64,
    bracket: (f64, f64),
) -> Result<QuantileCi> {
    let z = z_of(level)?;
    let xi = quantile_from_cdf(avg, q, bracket)?;
    let f = avg.density(xi);
    if !(f > 0.0) {
        return Err(Error::Numerical(format!("density estimate at the quantile is {f}")));
    }
    let n = avg.len();
    let var_f = if n < 2 {
        f64::NAN
    } else {
        let vals: Vec<f64> = avg.densities().iter().map(|d| d.cdf(xi)).collect();
        let m = vals.iter().sum::<f64>() / n as f64;
        vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    };
    let sigma2_cmc = var_f / (f * f);
    let half = z * (sigma2_cmc / n as f64).sqrt();
    Ok(QuantileCi {
        q,
        xi,
        lower: xi - half,
        upper: xi + half,
        density: f,
        sigma2_cmc,
        sigma2_plain: q * (1.0 - q) / (f * f),
        n,
    })
}

/// The order statistic X_(⌈nq⌉).
pub fn empirical_quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical quantile of no samples"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("samples contain NaN"));
    }
    let mut s = samples.to_vec();
    let k = ((s.len() as f64 * q).ceil() as usize).clamp(1, s.len());
    let (_, v, _) = s.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shortfall {
    pub q: f64,
    pub xi: f64,
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    pub sigma2: f64,
    pub n: usize,
}

/// Empirical c_q = E[X | X > ξ_q]: ĉ = ξ̂ + Σ(X_i − ξ̂)⁺ / (n(1 − q)) with
/// ξ̂ = X_(⌈nq⌉), and a CLT interval with σ²_c = Var[(X − ξ_q)⁺]/(1 − q)².
pub fn expected_shortfall(samples: &[f64], q: f64, level: f64) -> Result<Shortfall> {
    let z = z_of(level)?;
    let xi = empirical_quantile(samples, q)?;
    let n = samples.len();
    let excess: Vec<f64> = samples.iter().map(|&x| (x - xi).max(0.0)).collect();
    let p = 1.0 - q;
    let mean = excess.iter().sum::<f64>() / n as f64;
    let c = xi + mean / p;
    let sigma2 = if n < 2 {
        f64::NAN
    } else {
        excess.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64 / (p * p)
    };
    let half = z * (sigma2 / n as f64).sqrt();
    Ok(Shortfall { q, xi, c, lower: c - half, upper: c + half, sigma2, n })
}

/// Quantile from `n_r` independent RQMC randomizations pooled into one cdf
/// average. The standard error comes from batching: the spread of the
/// per-randomization quantiles divided by √n_r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledQuantile {
    pub q: f64,
    pub xi: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub density: f64,
    pub batch_quantiles: Vec<f64>,
    pub variance_method: String,
}

pub fn pooled_quantile<D: ConditionalDensity>(
    batches: &[CdfAverage<D>],
    q: f64,
    level: f64,
    bracket: (f64, f64),
) -> Result<PooledQuantile> {
    let z = z_of(level)?;
    if batches.len() < 2 {
        return Err(Error::invalid("pooled quantile needs at least two randomizations"));
    }
    let total: usize = batches.iter().map(CdfAverage::len).sum();
    let pooled = |x: f64| batches.iter().map(|b| b.cdf(x) * b.len() as f64).sum::<f64>() / total as f64;
    let xi = quantile_of(pooled, q, bracket.0, bracket.1)?;
    let density = batches.iter().map(|b| b.density(xi) * b.len() as f64).sum::<f64>() / total as f64;
    let batch_quantiles: Vec<f64> = batches.iter().map(|b| quantile_from_cdf(b, q, bracket)).collect::<Result<_>>()?;
    let m = batch_quantiles.len() as f64;
    let mean = batch_quantiles.iter().sum::<f64>() / m;
    let var = batch_quantiles.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    let stderr = (var / m).sqrt();
    Ok(PooledQuantile {
        q,
        xi,
        stderr,
        lower: xi - z * stderr,
        upper: xi + z * stderr,
        density,
        batch_quantiles,
        variance_method: "batching".into(),
    })
}

/// Output of [`run_quantile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub model: String,
    pub variant: String,
    pub pointset: String,
    pub n: usize,
    pub q: f64,
    pub level: f64,
    pub xi: f64,
    pub lower: f64,
    pub upper: f64,
    pub density: f64,
    pub variance_method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_cmc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_plain: Option<f64>,
    /// Expected shortfall from plain MC samples, when the model exposes them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<Shortfall>,
}

fn realize_all(
    cond: &dyn DynConditioning,
    plan: &PointPlan,
    stream: UniformStream,
) -> Result<CdfAverage<Box<dyn ConditionalDensity>>> {
    let mut out = Vec::with_capacity(plan.n());
    plan.for_each(stream, &mut |u| {
        if let Some(d) = cond.realize_dyn(u) {
            out.push(d);
        }
    })?;
    CdfAverage::new(out)
}

/// Quantile, its interval and the expected shortfall for one experiment
/// config, at the config's largest size. MC uses one sample and the CMC CLT;
/// RQMC pools `n_r` randomizations with batching.
pub fn run_quantile(cfg: &ExperimentConfig, q: f64, level: f64) -> Result<QuantileReport> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let mut cde = cfg.clone();
    cde.estimator = EstimatorKind::Cde;
    let variant = resolve_variant(model.as_ref(), &cde)?;
    let cond = model.conditioning(&variant)?;
    let n = cfg.sizes().into_iter().max().expect("validated configs list a size");
    let bracket = match cfg.interval {
        Some([a, b]) => (a, b),
        None => model.interval(),
    };
    let plan = PointPlan::new(cfg.pointset, cond.dim(), n, &cfg.lattice)?;
    let shortfall = match model.sampler() {
        Ok(s) => {
            let mc = PointPlan::new(PointKind::Mc, s.dim(), n, &cfg.lattice)?;
            let mut xs = Vec::with_capacity(n);
            mc.for_each(rep_stream(cfg.seed, 3, n, 0), &mut |u| xs.extend(s.sample(u)))?;
            Some(expected_shortfall(&xs, q, level)?)
        }
        Err(_) => None,
    };
    let base = QuantileReport {
        model: model.name().into(),
        variant,
        pointset: cfg.pointset.name().into(),
        n,
        q,
        level,
        xi: f64::NAN,
        lower: f64::NAN,
        upper: f64::NAN,
        density: f64::NAN,
        variance_method: String::new(),
        sigma2_cmc: None,
        sigma2_plain: None,
        shortfall,
    };
    if cfg.pointset == PointKind::Mc {
        let avg = realize_all(cond.as_ref(), &plan, rep_stream(cfg.seed, 2, n, 0))?;
        let ci = quantile_ci(&avg, q, level, bracket)?;
        Ok(QuantileReport {
            xi: ci.xi,
            lower: ci.lower,
            upper: ci.upper,
            density: ci.density,
            variance_method: "cmc-clt".into(),
            sigma2_cmc: Some(ci.sigma2_cmc),
            sigma2_plain: Some(ci.sigma2_plain),
            ..base
        })
    } else {
        let batches = (0..cfg.reps())
            .map(|r| realize_all(cond.as_ref(), &plan, rep_stream(cfg.seed, 2, n, r)))
            .collect::<Result<Vec<_>>>()?;
        let p = pooled_quantile(&batches, q, level, bracket)?;
        Ok(QuantileReport {
            xi: p.xi,
            lower: p.lower,
            upper: p.upper,
            density: p.density,
            variance_method: p.variance_method,
            ..base
        })
    }
}
