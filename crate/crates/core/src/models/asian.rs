//! Average of a geometric random walk, X = (S₀/s)·Σ exp(Y_j) with
//! Y_j = Y_{j−1} + μ_j + σ_j Z_j.
//!
//! Two conditionings hide Z_s: `seq` draws the walk forward, `bridge` draws
//! Y_s first and fills in the rest by Brownian-bridge bisection, so the hidden
//! variable moves the whole path.

use serde::{Deserialize, Serialize};

use super::{unknown_variant, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, Realizer, Sampler};
use crate::points::Coordinates;
use crate::special::{norm_cdf, norm_inv, norm_pdf};

/// Bracket for the hidden standard normal when inverting γ.
pub const Z_BRACKET: f64 = 12.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsianParams {
    pub s0: f64,
    pub s: usize,
    /// Per-step drifts; a single value applies to every step.
    pub mu: Vec<f64>,
    /// Per-step volatilities; a single value applies to every step.
    pub sigma: Vec<f64>,
    pub strike: f64,
    /// Estimation interval is (strike, strike + width].
    pub width: f64,
    /// Newton iterations per grid point before the bracketed fallback.
    pub newton_iters: usize,
}

impl Default for AsianParams {
    fn default() -> Self {
        AsianParams {
            s0: 100.0,
            s: 12,
            mu: vec![0.00771966],
            sigma: vec![0.035033],
            strike: 101.0,
            width: 27.13,
            newton_iters: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Asian {
    p: AsianParams,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    /// Cumulative drifts μ̄_j and variances v̄_j, index 0 holds Y₀ = 0.
    mbar: Vec<f64>,
    vbar: Vec<f64>,
    /// Bridge fill-in order: (j, left, right).
    order: Vec<(usize, usize, usize)>,
    /// ∂Y_j/∂Z_s under the bridge, j = 1..s.
    slope: Vec<f64>,
    arithmetic: bool,
}

fn broadcast(v: &[f64], s: usize, what: &str) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; s]),
        n if n == s => Ok(v.to_vec()),
        n => Err(Error::invalid(format!("{what} has {n} entries; expected 1 or {s}"))),
    }
}

impl Asian {
    pub fn new(p: AsianParams) -> Result<Self> {
        if p.s == 0 {
            return Err(Error::invalid("number of observation dates must be positive"));
        }
        if !(p.s0 > 0.0 && p.s0.is_finite()) {
            return Err(Error::invalid("initial price must be positive"));
        }
        if !(p.width > 0.0 && p.strike.is_finite() && p.width.is_finite()) {
            return Err(Error::invalid("interval width must be positive"));
        }
        let mu = broadcast(&p.mu, p.s, "mu")?;
        let sigma = broadcast(&p.sigma, p.s, "sigma")?;
        if sigma.iter().any(|&v| !(v > 0.0 && v.is_finite())) || mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("volatilities must be positive and drifts finite"));
        }
        let mut mbar = vec![0.0; p.s + 1];
        let mut vbar = vec![0.0; p.s + 1];
        for j in 1..=p.s {
            mbar[j] = mbar[j - 1] + mu[j - 1];
            vbar[j] = vbar[j - 1] + sigma[j - 1] * sigma[j - 1];
        }
        let order = bridge_order(p.s);
        let sd = vbar[p.s].sqrt();
        let slope: Vec<f64> = (1..=p.s).map(|j| vbar[j] / vbar[p.s] * sd).collect();
        let arithmetic =
            slope.iter().enumerate().all(|(i, &c)| (c - (i + 1) as f64 * slope[0]).abs() <= 1e-12 * slope[p.s - 1]);
        Ok(Asian { p, mu, sigma, mbar, vbar, order, slope, arithmetic })
    }

    pub fn params(&self) -> &AsianParams {
        &self.p
    }

    /// Bridge path with Z_s = 0 from the s − 1 remaining normals (in fill-in order).
    pub fn bridge_gamma(&self, z: &[f64]) -> Gamma {
        let s = self.p.s;
        let mut y = vec![0.0; s + 1];
        y[s] = self.mbar[s];
        for (&(m, l, r), &zi) in self.order.iter().zip(z) {
            let (vl, vm, vr) = (self.vbar[l], self.vbar[m], self.vbar[r]);
            let w = (vm - vl) / (vr - vl);
            let drift = self.mbar[m] - self.mbar[l] + w * (y[r] - y[l] - (self.mbar[r] - self.mbar[l]));
            let sd = ((vm - vl) * (vr - vm) / (vr - vl)).sqrt();
            y[m] = y[l] + drift + sd * zi;
        }
        let scale = self.p.s0 / s as f64;
        Gamma {
            weights: y[1..].iter().map(|v| scale * v.exp()).collect(),
            slope: self.slope.clone(),
            arithmetic: self.arithmetic,
            iters: self.p.newton_iters,
        }
    }

    /// Forward walk from Z₁..Z_{s−1}; returns (Y_{s−1}, S₁ + ⋯ + S_{s−1}).
    fn forward(&self, u: &mut dyn Coordinates) -> (f64, f64) {
        let mut y = 0.0;
        let mut sum = 0.0;
        for j in 0..self.p.s - 1 {
            y += self.mu[j] + self.sigma[j] * norm_inv(u.next_coord());
            sum += self.p.s0 * y.exp();
        }
        (y, sum)
    }
}

/// Bisection order of a Brownian bridge on 0..=s with both ends known:
/// ⌊s/2⌋ first, then breadth-first midpoints.
fn bridge_order(s: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(s.saturating_sub(1));
    let mut queue = std::collections::VecDeque::from([(0usize, s)]);
    while let Some((l, r)) = queue.pop_front() {
        if r - l < 2 {
            continue;
        }
        let m = (l + r) / 2;
        out.push((m, l, r));
        queue.push_back((l, m));
        queue.push_back((m, r));
    }
    out
}

/// γ(z) = Σ w_j exp(c_j z), increasing in z.
#[derive(Clone, Debug, PartialEq)]
pub struct Gamma {
    weights: Vec<f64>,
    slope: Vec<f64>,
    arithmetic: bool,
    iters: usize,
}

impl Gamma {
    pub fn new(weights: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != slope.len() {
            return Err(Error::invalid("gamma needs matching non-empty weights and slopes"));
        }
        if weights.iter().chain(&slope).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("gamma weights and slopes must be positive"));
        }
        Ok(Gamma { weights, slope, arithmetic: false, iters: 5 })
    }

    /// (γ(z), γ′(z)).
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let (mut g, mut dg) = (0.0, 0.0);
        if self.arithmetic {
            let q = (z * self.slope[0]).exp();
            let mut p = 1.0;
            for (w, c) in self.weights.iter().zip(&self.slope) {
                p *= q;
                g += w * p;
                dg += w * c * p;
            }
        } else {
            for (w, c) in self.weights.iter().zip(&self.slope) {
                let t = w * (c * z).exp();
                g += t;
                dg += c * t;
            }
        }
        (g, dg)
    }

    fn root(&self, x: f64, z0: f64) -> Option<f64> {
        gamma_inverse_newton(|z| self.eval(z), x, z0, self.iters).ok()
    }
}

/// Solves γ(z) = x for increasing γ, given `f(z) = (γ(z), γ′(z))`.
///
/// Runs up to `iters` Newton steps from `z0`; if the residual is still above
/// 10⁻¹²·max(1, x), switches to safeguarded Newton on [−12, 12].
pub fn gamma_inverse_newton<F: Fn(f64) -> (f64, f64)>(f: F, x: f64, z0: f64, iters: usize) -> Result<f64> {
    let tol = 1e-12 * x.abs().max(1.0);
    let mut z = z0;
    // Newton until the step is negligible; γ is convex, so this converges
    // quadratically once it lands right of the root.
    for _ in 0..iters.max(1) {
        let (g, dg) = f(z);
        if !(dg > 0.0) || !z.is_finite() {
            break;
        }
        let step = (g - x) / dg;
        z -= step;
        if !(-Z_BRACKET..=Z_BRACKET).contains(&z) {
            break;
        }
        if step.abs() <= 1e-14 * z.abs().max(1.0) {
            break;
        }
    }
    if z.is_finite() && (-Z_BRACKET..=Z_BRACKET).contains(&z) && (f(z).0 - x).abs() <= tol {
        return Ok(z);
    }
    let (mut lo, mut hi) = (-Z_BRACKET, Z_BRACKET);
    if f(lo).0 > x || f(hi).0 < x {
        return Err(Error::Numerical(format!("{x} lies outside the range of gamma on [-12, 12]")));
    }
    z = z.clamp(lo, hi);
    for _ in 0..200 {
        let (g, dg) = f(z);
        if (g - x).abs() <= tol {
            return Ok(z);
        }
        if g < x {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - (g - x) / dg;
        z = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::Numerical(format!("gamma inversion did not converge at x = {x}")))
}

impl ConditionalDensity for Gamma {
    fn density(&self, x: f64) -> f64 {
        match self.root(x, 0.0) {
            Some(z) => norm_pdf(z) / self.eval(z).1,
            None => 0.0,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.root(x, 0.0) {
            Some(z) => norm_cdf(z),
            None if self.eval(0.0).0 > x => 0.0,
            None => 1.0,
        }
    }

    /// Warm-started sweep: solve at the first grid point above γ(0), then walk
    /// outwards reusing the previous root.
    fn add_density_grid(&self, grid: &[f64], out: &mut [f64]) {
        let mid = self.eval(0.0).0;
        let start = grid.partition_point(|&x| x < mid);
        let mut z0 = 0.0;
        for j in start..grid.len() {
            if let Some(z) = self.root(grid[j], z0) {
                out[j] += norm_pdf(z) / self.eval(z).1;
                z0 = z;
            }
        }
        z0 = 0.0;
        for j in (0..start).rev() {
            if let Some(z) = self.root(grid[j], z0) {
                out[j] += norm_pdf(z) / self.eval(z).1;
                z0 = z;
            }
        }
    }
}

/// Sequential conditional density: X ≤ x iff Z_s ≤ W(x).
#[derive(Clone, Copy, Debug)]
pub struct Sequential {
    s: f64,
    s0: f64,
    partial: f64,
    y: f64,
    mu: f64,
    sigma: f64,
}

impl Sequential {
    fn w(&self, x: f64) -> Option<(f64, f64)> {
        let room = self.s * x - self.partial;
        (room > 0.0).then(|| (((room / self.s0).ln() - self.y - self.mu) / self.sigma, room))
    }
}

impl ConditionalDensity for Sequential {
    fn density(&self, x: f64) -> f64 {
        match self.w(x) {
            Some((w, room)) => norm_pdf(w) * self.s / (room * self.sigma),
            None => 0.0,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.w(x).map_or(0.0, |(w, _)| norm_cdf(w))
    }
}

pub struct SeqConditioning(Asian);

impl Conditioning for SeqConditioning {
    type Density = Sequential;

    fn dim(&self) -> Dim {
        Dim::Finite(self.0.p.s - 1)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<Sequential> {
        let (y, partial) = self.0.forward(u);
        let last = self.0.p.s - 1;
        Some(Sequential {
            s: self.0.p.s as f64,
            s0: self.0.p.s0,
            partial,
            y,
            mu: self.0.mu[last],
            sigma: self.0.sigma[last],
        })
    }
}

pub struct BridgeConditioning(Asian);

impl Conditioning for BridgeConditioning {
    type Density = Gamma;

    fn dim(&self) -> Dim {
        Dim::Finite(self.0.p.s - 1)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<Gamma> {
        let z: Vec<f64> = (0..self.0.p.s - 1).map(|_| norm_inv(u.next_coord())).collect();
        Some(self.0.bridge_gamma(&z))
    }
}

impl Asian {
    pub fn sequential(&self) -> SeqConditioning {
        SeqConditioning(self.clone())
    }

    pub fn bridge(&self) -> BridgeConditioning {
        BridgeConditioning(self.clone())
    }
}

impl Sampler for Asian {
    fn dim(&self) -> Dim {
        Dim::Finite(self.p.s)
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        let (y, partial) = self.forward(u);
        let last = self.p.s - 1;
        let y = y + self.mu[last] + self.sigma[last] * norm_inv(u.next_coord());
        Some((partial + self.p.s0 * y.exp()) / self.p.s as f64)
    }
}

impl DensityModel for Asian {
    fn name(&self) -> &'static str {
        "asian"
    }

    fn interval(&self) -> (f64, f64) {
        (self.p.strike, self.p.strike + self.p.width)
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["seq".into(), "bridge".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        match variant {
            "seq" => Ok(Box::new(self.sequential())),
            "bridge" => Ok(Box::new(self.bridge())),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "seq" => Ok(Box::new(CdeRealizer(self.sequential()))),
            "bridge" => Ok(Box::new(CdeRealizer(self.bridge()))),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }
}
