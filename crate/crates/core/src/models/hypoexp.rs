//! Hypoexponential law: the sum of independent exponentials with rates Λ₁, …, Λ_c.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which two rates count as tied.
pub const TIE_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypoMethod {
    /// Product formula unless two rates are nearly tied.
    #[default]
    Auto,
    Product,
    Uniformization,
}

/// A hypoexponential law with its evaluation method fixed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypoexp {
    rates: Vec<f64>,
    /// Coefficients p_j of the product formula (empty under uniformization).
    p: Vec<f64>,
}

impl Hypoexp {
    pub fn new(rates: Vec<f64>, method: HypoMethod) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::invalid("hypoexponential law needs at least one rate"));
        }
        if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("rates must be positive and finite"));
        }
        let product = match method {
            HypoMethod::Product => true,
            HypoMethod::Uniformization => false,
            HypoMethod::Auto => min_relative_gap(&rates) >= TIE_GAP,
        };
        let p = if product { coefficients(&rates) } else { Vec::new() };
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("tied rates in the product formula".into()));
        }
        Ok(Hypoexp { rates, p })
    }

    pub fn uses_product(&self) -> bool {
        !self.p.is_empty()
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if self.rates.len() == 1 {
            return self.rates[0] * (-self.rates[0] * x).exp();
        }
        let v = if self.uses_product() {
            self.rates.iter().zip(&self.p).map(|(l, p)| l * p * (-l * x).exp()).sum()
        } else {
            uniformize(&self.rates, x).0
        };
        v.max(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let survival = if self.uses_product() {
            self.rates.iter().zip(&self.p).map(|(l, p)| p * (-l * x).exp()).sum()
        } else {
            uniformize(&self.rates, x).1
        };
        (1.0 - survival).clamp(0.0, 1.0)
    }
}

fn min_relative_gap(rates: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in rates.iter().enumerate() {
        for b in &rates[i + 1..] {
            gap = gap.min((a - b).abs() / a.max(*b));
        }
    }
    gap
}

fn coefficients(rates: &[f64]) -> Vec<f64> {
    (0..rates.len())
        .map(|j| rates.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &lk)| lk / (lk - rates[j])).product())
        .collect()
}

/// Density and survival function by uniformization of the pure-birth chain
/// 1 → 2 → ⋯ → c → absorbed, truncating the Poisson mixture at relative 10⁻¹².
fn uniformize(rates: &[f64], x: f64) -> (f64, f64) {
    let c = rates.len();
    let q = rates.iter().cloned().fold(0.0, f64::max);
    let qx = q * x;
    let mut state = vec![0.0; c];
    state[0] = 1.0;
    let (mut dens, mut surv, mut mass) = (0.0, 0.0, 0.0);
    let log_qx = qx.ln();
    for k in 0usize.. {
        let w = if qx == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-qx + k as f64 * log_qx - libm::lgamma(k as f64 + 1.0)).exp()
        };
        mass += w;
        dens += w * state[c - 1];
        surv += w * state.iter().sum::<f64>();
        if (k as f64 > qx && 1.0 - mass < 1e-13) || state.iter().all(|&v| v < 1e-300) {
            break;
        }
        for j in (0..c).rev() {
            let stay = 1.0 - rates[j] / q;
            let enter = if j > 0 { state[j - 1] * rates[j - 1] / q } else { 0.0 };
            state[j] = state[j] * stay + enter;
        }
    }
    (rates[c - 1] * dens, surv)
}

/// Density of the hypoexponential law at `x`, choosing the method automatically.
pub fn hypoexp_density(rates: &[f64], x: f64) -> Result<f64> {
    Ok(Hypoexp::new(rates.to_vec(), HypoMethod::Auto)?.density(x))
}

pub fn hypoexp_cdf(rates: &[f64], x: f64) -> Result<f64> {
    Ok(Hypoexp::new(rates.to_vec(), HypoMethod::Auto)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::adaptive_simpson;

    #[test]
    fn single_rate() {
        assert_eq!(hypoexp_density(&[13.0], 0.0).unwrap(), 13.0);
        assert!((hypoexp_cdf(&[13.0], 0.1).unwrap() - (1.0 - (-1.3f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn two_rates_match_convolution() {
        let h = Hypoexp::new(vec![2.0, 1.0], HypoMethod::Product).unwrap();
        assert_eq!(h.p, vec![-1.0, 2.0]);
        for x in [0.0f64, 0.1, 0.7, 3.0, 10.0] {
            let exact = 2.0 * ((-x).exp() - (-2.0 * x).exp());
            assert!((h.density(x) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn five_rates_normalized() {
        let h = Hypoexp::new(vec![13.0, 12.0, 11.0, 10.0, 9.0], HypoMethod::Auto).unwrap();
        let mass = adaptive_simpson(&|x| h.density(x), 0.0, 10.0, 1e-11);
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
        assert!((h.cdf(10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniformization_agrees_with_product() {
        for rates in [vec![2.0, 1.0], vec![13.0, 12.0, 11.0, 10.0, 9.0], vec![5.0, 5.0 * (1.0 - 1e-6), 1.0]] {
            let p = Hypoexp::new(rates.clone(), HypoMethod::Product).unwrap();
            let u = Hypoexp::new(rates, HypoMethod::Uniformization).unwrap();
            for x in [0.05, 0.3, 1.0, 4.0] {
                assert!((p.density(x) / u.density(x) - 1.0).abs() < 1e-6, "{x}");
                assert!((p.cdf(x) - u.cdf(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn near_ties_fall_back() {
        let h = Hypoexp::new(vec![3.0, 3.0 * (1.0 - 1e-10)], HypoMethod::Auto).unwrap();
        assert!(!h.uses_product());
        // Two equal rates give the Erlang(2, 3) law.
        let x = 0.4;
        assert!((h.density(x) - 9.0 * x * (-3.0 * x).exp()).abs() < 1e-8);
        assert!(Hypoexp::new(vec![3.0, 3.0], HypoMethod::Product).is_err());
        assert!(hypoexp_density(&[], 1.0).is_err());
    }
}
