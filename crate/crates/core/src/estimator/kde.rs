use crate::error::{Error, Result};
use crate::special::{norm_pdf, INV_SQRT_2PI};

/// Gaussian-kernel KDE with a fixed bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KdeSpec {
    h: f64,
}

impl KdeSpec {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
        }
        Ok(KdeSpec { h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

pub fn kde_estimate(samples: &[f64], spec: KdeSpec, x: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("kde_estimate needs at least one sample"));
    }
    let h = spec.h;
    let s: f64 = samples.iter().map(|&xi| norm_pdf((x - xi) / h)).sum();
    Ok(s / (samples.len() as f64 * h))
}

/// Silverman's rule h = 1.06·σ̂·n^(−1/5).
pub fn kde_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("bandwidth selection needs at least two samples"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::invalid("bandwidth selection on zero-variance samples"));
    }
    Ok(1.06 * var.sqrt() * (n as f64).powf(-0.2))
}

/// KDE on a grid from sorted samples; kernel terms beyond 8h are dropped.
pub fn kde_grid(sorted: &[f64], spec: KdeSpec, grid: &[f64], out: &mut [f64]) {
    let h = spec.h;
    let inv_h = 1.0 / h;
    let scale = INV_SQRT_2PI / (sorted.len() as f64 * h);
    for (o, &x) in out.iter_mut().zip(grid) {
        let lo = sorted.partition_point(|&v| v < x - 8.0 * h);
        let hi = sorted.partition_point(|&v| v <= x + 8.0 * h);
        let s: f64 = sorted[lo..hi]
            .iter()
            .map(|&v| {
                let t = (x - v) * inv_h;
                (-0.5 * t * t).exp()
            })
            .sum();
        *o = s * scale;
    }
}
