use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::UniformStream;

/// Stratified evaluation points: one uniform draw in each of `n_e` equal
/// strata of `[a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationGrid {
    pub a: f64,
    pub b: f64,
    pub points: Vec<f64>,
}

impl EvaluationGrid {
    pub fn n_e(&self) -> usize {
        self.points.len()
    }

    /// Weight (b − a)/n_e of each point in the integrated quantities.
    pub fn cell(&self) -> f64 {
        (self.b - self.a) / self.points.len() as f64
    }
}

pub fn build_grid(a: f64, b: f64, n_e: usize, stream: &mut UniformStream) -> Result<EvaluationGrid> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("evaluation interval needs finite a < b, got [{a}, {b}]")));
    }
    if n_e == 0 {
        return Err(Error::invalid("n_e must be at least 1"));
    }
    let w = (b - a) / n_e as f64;
    let points = (0..n_e)
        .map(|j| {
            let lo = a + j as f64 * w;
            let hi = if j + 1 == n_e { b } else { a + (j + 1) as f64 * w };
            // Keep the draw inside its stratum when rounding lands on the upper end.
            let e = lo + stream.uniform() * (hi - lo);
            if e >= hi {
                lo
            } else {
                e
            }
        })
        .collect();
    Ok(EvaluationGrid { a, b, points })
}
