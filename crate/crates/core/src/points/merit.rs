//! P₂ figure of merit for rank-1 lattices and a Korobov parameter search.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order-dependent weights γ_v = rho^|v| for projections of order up to `max_order`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeritWeights {
    pub rho: f64,
    pub max_order: usize,
}

impl MeritWeights {
    pub fn new(rho: f64, max_order: usize) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::invalid(format!("merit weight base must lie in (0, 1], got {rho}")));
        }
        if max_order == 0 {
            return Err(Error::invalid("merit max_order must be at least 1"));
        }
        Ok(MeritWeights { rho, max_order })
    }
}

/// 2π²B₂(k/n) for k = 0..n.
fn kernel_table(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let x = k as f64 / n as f64;
            2.0 * PI * PI * (x * x - x + 1.0 / 6.0)
        })
        .collect()
}

fn merit_with_table(table: &[f64], z: &[u64], w: &MeritWeights) -> f64 {
    let n = table.len() as u64;
    let order = w.max_order.min(z.len());
    let mut e = vec![0.0; order + 1];
    let mut total = 0.0;
    // For n = 2^k the wrapped product reduced by a mask is exact.
    let mask = n.is_power_of_two().then(|| n - 1);
    for i in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[0] = 1.0;
        for &zj in z {
            let k = match mask {
                Some(m) => i.wrapping_mul(zj) & m,
                None => ((i as u128 * zj as u128) % n as u128) as u64,
            };
            let t = table[k as usize];
            for k in (1..=order).rev() {
                e[k] += t * e[k - 1];
            }
        }
        let mut wk = 1.0;
        for ek in &e[1..] {
            wk *= w.rho;
            total += wk * ek;
        }
    }
    total / n as f64
}

/// Weighted P₂ criterion of the lattice with generating vector `z` (first `s` entries).
pub fn p_alpha_merit(z: &[u64], n: usize, s: usize, w: &MeritWeights) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("lattice size must be positive"));
    }
    if z.len() < s {
        return Err(Error::invalid(format!("generating vector has {} entries, {s} requested", z.len())));
    }
    Ok(merit_with_table(&kernel_table(n), &z[..s], w))
}

/// Exhaustive search over odd Korobov parameters 1 < a < n/2 minimizing the P₂ merit.
pub fn korobov_search(n: usize, s: usize, w: &MeritWeights) -> Result<u64> {
    korobov_search_limited(n, s, w, usize::MAX)
}

/// As [`korobov_search`], but scores at most `max_candidates` parameters,
/// evenly spaced over the odd values in (1, n/2).
pub fn korobov_search_limited(n: usize, s: usize, w: &MeritWeights, max_candidates: usize) -> Result<u64> {
    super::check_power_of_two(n)?;
    if n < 8 {
        return Err(Error::invalid(format!("Korobov search needs n >= 8, got {n}")));
    }
    if s == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if max_candidates == 0 {
        return Err(Error::invalid("Korobov search needs at least one candidate"));
    }
    let table = kernel_table(n);
    let all = (n as u64 / 2 - 2) / 2;
    let step = all.div_ceil(max_candidates as u64).max(1);
    let candidates: Vec<u64> = (0..all).step_by(step as usize).map(|k| 3 + 2 * k).collect();
    let scored: Vec<(u64, f64)> = candidates
        .par_iter()
        .map(|&a| {
            let z = super::korobov_vector(a, n as u64, s);
            (a, merit_with_table(&table, &z, w))
        })
        .collect();
    let mut best = scored[0];
    for &(a, m) in &scored[1..] {
        if m < best.1 {
            best = (a, m);
        }
    }
    log::debug!("korobov search n={n} s={s} ({} candidates): a={} merit={:.6e}", candidates.len(), best.0, best.1);
    Ok(best.0)
}
