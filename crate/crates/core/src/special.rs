//! Normal-distribution primitives shared by the models.

use statrs::function::erf::erfc_inv;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cdf, accurate in both tails.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile. `u` is clamped away from {0, 1} so point sets
/// containing the origin map to large finite values.
#[inline]
pub fn norm_inv(u: f64) -> f64 {
    let u = u.clamp(1e-300, 1.0 - f64::EPSILON / 2.0);
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u);
    // One Halley step against the accurate cdf cleans up the initial guess.
    let pdf = norm_pdf(x);
    if pdf < 1e-300 || !x.is_finite() {
        return x;
    }
    let e = if u < 0.5 { norm_cdf(x) - u } else { (1.0 - u) - norm_cdf(-x) };
    let r = e / pdf;
    x - r / (1.0 + 0.5 * x * r)
}

/// Lognormal (mu, sigma) parameters matching a given mean and coefficient of variation.
pub fn lognormal_from_mean_cv(mean: f64, cv: f64) -> (f64, f64) {
    let s2 = (1.0 + cv * cv).ln();
    (mean.ln() - 0.5 * s2, s2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_table_values() {
        assert_abs_diff_eq!(norm_pdf(0.0), 0.398942, epsilon = 1e-6);
        assert_abs_diff_eq!(norm_pdf(1.0), 0.241971, epsilon = 1e-6);
        assert_abs_diff_eq!(norm_cdf(1.959963984540054), 0.975, epsilon = 1e-14);
        assert_abs_diff_eq!(norm_inv(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_abs_diff_eq!(norm_inv(0.5), 0.0, epsilon = 1e-15);
        assert!(norm_inv(0.0).is_finite());
    }

    #[test]
    fn inverse_round_trip() {
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            assert_abs_diff_eq!(norm_cdf(norm_inv(u)), u, epsilon = 1e-13);
        }
    }

    #[test]
    fn lognormal_moment_matching() {
        let (mu, sigma) = lognormal_from_mean_cv(0.525, 0.044);
        assert_abs_diff_eq!(sigma * sigma, 0.0019341, epsilon = 1e-7);
        assert_abs_diff_eq!(mu, -0.645324, epsilon = 1e-6);
    }
}
