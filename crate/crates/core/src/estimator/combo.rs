use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant coefficients of a convex combination of density estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboWeights {
    pub beta: Vec<f64>,
    /// True when the control-variate covariance was singular and β fell back to (1, 0, ..).
    pub singular: bool,
}

/// Fits β minimizing the summed-over-grid variance of Σ β_ℓ f̂_ℓ subject to
/// Σ β_ℓ = 1, by regressing f̂₀ on the control variates f̂₀ − f̂_ℓ.
///
/// `reps[r][l][j]` is estimator `l` at grid point `j` in replication `r`.
pub fn fit_combo_weights(reps: &[Vec<Vec<f64>>]) -> Result<ComboWeights> {
    let n_r = reps.len();
    if n_r < 2 {
        return Err(Error::invalid("combination weights need at least two replications"));
    }
    let m = reps[0].len();
    if m < 2 {
        return Err(Error::invalid("combination needs at least two estimators"));
    }
    let n_e = reps[0][0].len();
    if reps.iter().any(|r| r.len() != m || r.iter().any(|v| v.len() != n_e)) {
        return Err(Error::invalid("ragged replication matrix"));
    }
    let q = m - 1;
    let mut a = DMatrix::<f64>::zeros(q, q);
    let mut c = DVector::<f64>::zeros(q);
    let mut base_var = 0.0;
    let mut cv = vec![0.0; q];
    for j in 0..n_e {
        let mean0 = reps.iter().map(|r| r[0][j]).sum::<f64>() / n_r as f64;
        let mut means = vec![0.0; q];
        for r in reps {
            for l in 0..q {
                means[l] += (r[0][j] - r[l + 1][j]) / n_r as f64;
            }
        }
        for r in reps {
            let d0 = r[0][j] - mean0;
            for l in 0..q {
                cv[l] = r[0][j] - r[l + 1][j] - means[l];
            }
            base_var += d0 * d0;
            for l in 0..q {
                c[l] += d0 * cv[l];
                for k in 0..q {
                    a[(l, k)] += cv[l] * cv[k];
                }
            }
        }
    }
    let fallback = || {
        log::warn!("control-variate covariance is singular; using the first estimator alone");
        let mut beta = vec![0.0; m];
        beta[0] = 1.0;
        ComboWeights { beta, singular: true }
    };
    let eig = a.clone().symmetric_eigenvalues();
    let max_eig = eig.iter().cloned().fold(0.0_f64, f64::max);
    let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = base_var.max(max_eig);
    if !(scale > 0.0) || max_eig <= 1e-13 * scale || min_eig <= 1e-10 * max_eig {
        return Ok(fallback());
    }
    let Some(chol) = a.cholesky() else {
        return Ok(fallback());
    };
    let b = chol.solve(&c);
    let mut beta = Vec::with_capacity(m);
    beta.push(1.0 - b.sum());
    beta.extend(b.iter());
    Ok(ComboWeights { beta, singular: false })
}

/// Applies β to one replication's estimators.
pub fn combine(weights: &ComboWeights, rep: &[Vec<f64>]) -> Vec<f64> {
    let n_e = rep[0].len();
    let mut out = vec![0.0; n_e];
    for (b, est) in weights.beta.iter().zip(rep) {
        for (o, v) in out.iter_mut().zip(est) {
            *o += b * v;
        }
    }
    out
}
