//! Univariate laws used as model inputs, with pdf, cdf and inversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_inv, norm_pdf};

/// JSON form: `{"type": "normal", "mean": .., "sd": ..}`, `{"type": "lognormal",
/// "mu": .., "sigma": ..}`, `{"type": "expon", "mean": ..}`.
/// The normal is truncated to (0, ∞), as activity durations must be positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Law {
    Normal { mean: f64, sd: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Expon { mean: f64 },
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Law::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite() && norm_cdf(mean / sd) > 1e-12,
            Law::Lognormal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Law::Expon { mean } => mean > 0.0 && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid distribution parameters {self:?}")))
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Law::Normal { mean, sd } => norm_pdf((x - mean) / sd) / (sd * norm_cdf(mean / sd)),
            Law::Lognormal { mu, sigma } => norm_pdf((x.ln() - mu) / sigma) / (x * sigma),
            Law::Expon { mean } => (-x / mean).exp() / mean,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Law::Normal { mean, sd } => {
                // P(0 < Y ≤ x) / P(Y > 0), written with upper tails to stay accurate.
                let tail0 = norm_cdf(mean / sd);
                let tailx = norm_cdf((mean - x) / sd);
                ((tail0 - tailx) / tail0).clamp(0.0, 1.0)
            }
            Law::Lognormal { mu, sigma } => norm_cdf((x.ln() - mu) / sigma),
            Law::Expon { mean } => -(-x / mean).exp_m1(),
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match *self {
            Law::Normal { mean, sd } => {
                let tail0 = norm_cdf(mean / sd);
                // Upper tail of the truncated law equals (1-u)·P(Y > 0).
                (mean - sd * norm_inv((1.0 - u) * tail0)).max(f64::MIN_POSITIVE)
            }
            Law::Lognormal { mu, sigma } => (mu + sigma * norm_inv(u)).exp(),
            Law::Expon { mean } => -mean * (-u).ln_1p(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Normal { mean, sd } => {
                let a = -mean / sd;
                mean + sd * norm_pdf(a) / norm_cdf(-a)
            }
            Law::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Law::Expon { mean } => mean,
        }
    }
}
