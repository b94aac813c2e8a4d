use crate::error::{Error, Result};

/// Per-replication numerator averages D̄_r(x) on a grid and denominator averages N̄_r.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioAccumulator {
    pub numerators: Vec<Vec<f64>>,
    pub denominators: Vec<f64>,
    /// Known E[N]; when set the denominator is not estimated.
    pub known_mean: Option<f64>,
}

impl RatioAccumulator {
    pub fn new(known_mean: Option<f64>) -> Self {
        RatioAccumulator { known_mean, ..Default::default() }
    }

    pub fn push(&mut self, numerator: Vec<f64>, denominator: f64) {
        self.numerators.push(numerator);
        self.denominators.push(denominator);
    }

    pub fn reps(&self) -> usize {
        self.denominators.len()
    }
}

/// Grand-sum ratio Σ D̄_r(x) / Σ N̄_r at grid index `j`, with the delta-method
/// variance of that estimate (empirical plug-ins). With a known E[N] the
/// estimate is Σ D̄_r / (n_r E[N]) and its variance is the plain one.
pub fn ratio_density(acc: &RatioAccumulator, j: usize) -> Result<(f64, f64)> {
    let n_r = acc.reps();
    if n_r == 0 {
        return Err(Error::invalid("ratio estimator needs at least one replication"));
    }
    let d: Vec<f64> = acc
        .numerators
        .iter()
        .map(|v| v.get(j).copied().ok_or_else(|| Error::invalid(format!("grid index {j} out of range"))))
        .collect::<Result<_>>()?;
    let nr = n_r as f64;
    let d_mean = d.iter().sum::<f64>() / nr;
    let var_of = |xs: &[f64], m: f64| -> f64 {
        if n_r < 2 {
            f64::NAN
        } else {
            xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nr - 1.0)
        }
    };
    if let Some(en) = acc.known_mean {
        if !(en > 0.0) {
            return Err(Error::invalid("known denominator mean must be positive"));
        }
        return Ok((d_mean / en, var_of(&d, d_mean) / (nr * en * en)));
    }
    let n_mean = acc.denominators.iter().sum::<f64>() / nr;
    if !(n_mean > 0.0) {
        return Err(Error::Numerical("ratio estimator with zero denominator".into()));
    }
    let f = d_mean / n_mean;
    if n_r < 2 {
        return Ok((f, f64::NAN));
    }
    let var_d = var_of(&d, d_mean);
    let var_n = var_of(&acc.denominators, n_mean);
    let cov = d.iter().zip(&acc.denominators).map(|(a, b)| (a - d_mean) * (b - n_mean)).sum::<f64>() / (nr - 1.0);
    let var = (var_d + f * f * var_n - 2.0 * f * cov) / (nr * n_mean * n_mean);
    Ok((f, var.max(0.0)))
}
