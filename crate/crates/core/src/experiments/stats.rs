//! IV and MISE estimates over replications, and log-log rate fits.

use serde::{Deserialize, Serialize};

use super::grid::EvaluationGrid;
use crate::error::{Error, Result};

/// An integrated quantity with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

fn check_matrix(reps: &[Vec<f64>], grid: &EvaluationGrid, min_reps: usize) -> Result<()> {
    if reps.len() < min_reps {
        return Err(Error::invalid(format!("need at least {min_reps} replications, got {}", reps.len())));
    }
    if let Some(r) = reps.iter().find(|r| r.len() != grid.n_e()) {
        return Err(Error::invalid(format!("replication has {} values for {} grid points", r.len(), grid.n_e())));
    }
    Ok(())
}

/// ÎV = (b − a)/n_e · Σ_j s²_j, with s²_j the unbiased variance across
/// replications at e_j. Also returns the per-point variances. The standard
/// error is the delete-one jackknife over replications (NaN for n_r = 2).
pub fn estimate_iv(reps: &[Vec<f64>], grid: &EvaluationGrid) -> Result<(Estimate, Vec<f64>)> {
    check_matrix(reps, grid, 2)?;
    let m = reps.len() as f64;
    let n_e = grid.n_e();
    let mut means = vec![0.0; n_e];
    for r in reps {
        for (s, v) in means.iter_mut().zip(r) {
            *s += v;
        }
    }
    means.iter_mut().for_each(|s| *s /= m);
    let mut q = vec![0.0; n_e];
    for r in reps {
        for ((qj, v), mu) in q.iter_mut().zip(r).zip(&means) {
            let d = v - mu;
            *qj += d * d;
        }
    }
    let vars: Vec<f64> = q.iter().map(|qj| qj / (m - 1.0)).collect();
    let iv = grid.cell() * vars.iter().sum::<f64>();
    let stderr = if reps.len() < 3 {
        f64::NAN
    } else {
        // Leaving replication i out: Σ_{k≠i}(x_k − x̄_(i))² = Q − d_i² − d_i²/(m − 1).
        let loo: Vec<f64> = reps
            .iter()
            .map(|r| {
                let s: f64 = r
                    .iter()
                    .zip(&means)
                    .zip(&q)
                    .map(|((v, mu), qj)| {
                        let d = v - mu;
                        (qj - d * d * m / (m - 1.0)) / (m - 2.0)
                    })
                    .sum();
                grid.cell() * s
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / m;
        ((m - 1.0) / m * loo.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()).sqrt()
    };
    Ok((Estimate { value: iv, stderr }, vars))
}

/// MISE-hat = (b − a)/n_e · Σ_j mean_r (f̂_r(e_j) − f(e_j))², with the
/// standard error of the per-replication integrated squared errors.
pub fn estimate_mise(reps: &[Vec<f64>], grid: &EvaluationGrid, reference: &[f64]) -> Result<Estimate> {
    check_matrix(reps, grid, 1)?;
    if reference.len() != grid.n_e() {
        return Err(Error::invalid("reference density missing at some grid points"));
    }
    let ise: Vec<f64> = reps
        .iter()
        .map(|r| grid.cell() * r.iter().zip(reference).map(|(v, f)| (v - f) * (v - f)).sum::<f64>())
        .collect();
    let m = ise.len() as f64;
    let mean = ise.iter().sum::<f64>() / m;
    let stderr = if ise.len() < 2 {
        f64::NAN
    } else {
        (ise.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0) / m).sqrt()
    };
    Ok(Estimate { value: mean, stderr })
}

/// Whether e19 was measured at n = 2¹⁹ or read off the fitted line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum E19Source {
    Measured,
    Extrapolated,
}

impl E19Source {
    pub fn name(self) -> &'static str {
        match self {
            E19Source::Measured => "measured",
            E19Source::Extrapolated => "extrapolated",
        }
    }
}

/// Least-squares fit of log₂ v = log₂ K − ν log₂ n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub nu: f64,
    pub k: f64,
    pub e19: f64,
    pub e19_source: E19Source,
}

pub fn fit_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| n == 0 || !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("rate fit needs n > 0 and v > 0, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.log2()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m.max(1.0);
    let ybar = ys.iter().sum::<f64>() / m.max(1.0);
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if points.len() < 2 || !(sxx > 0.0) {
        return Err(Error::invalid("rate fit needs at least two distinct n"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let log_k = ybar - slope * xbar;
    let nu = -slope;
    let (e19, e19_source) = match points.iter().find(|&&(n, _)| n == 1 << 19) {
        Some(&(_, v)) => (-v.log2(), E19Source::Measured),
        None => (-(log_k - 19.0 * nu), E19Source::Extrapolated),
    };
    Ok(RateFit { nu, k: log_k.exp2(), e19, e19_source })
}
