//! Small quadrature and root-finding helpers.

use crate::error::{Error, Result};

/// Composite trapezoid rule with `m` panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..m {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Trapezoid integral of tabulated values over sorted abscissae.
pub fn trapezoid_points(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left + right).abs() {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Start from fixed panels so narrow peaks are not missed by the first three samples.
    const PANELS: usize = 32;
    let w = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * w, if k + 1 == PANELS { b } else { a + (k + 1) as f64 * w });
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            step(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 30)
        })
        .sum()
}

/// Bisection for a non-decreasing `f` on `[lo, hi]` with `f(lo) <= target <= f(hi)`.
/// Returns the smallest x (to tolerance) with `f(x) >= target`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if !(f(lo) <= target && f(hi) >= target) {
        return Err(Error::Numerical(format!("target {target} not bracketed by [{lo}, {hi}]")));
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratures_integrate_gaussian() {
        let f = |x: f64| crate::special::norm_pdf(x);
        assert_abs_diff_eq!(trapezoid(f, -10.0, 10.0, 2000), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(adaptive_simpson(&f, -10.0, 10.0, 1e-12), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect_increasing(|x| x * x * x, 8.0, 0.0, 5.0, 1e-12, 200).unwrap();
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-11);
        assert!(bisect_increasing(|x| x, 10.0, 0.0, 1.0, 1e-9, 10).is_err());
    }
}
