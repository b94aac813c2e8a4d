//! Waiting times in a single-server FIFO queue with Poisson arrivals and
//! lognormal services (Lindley recurrence W_j = max(0, W_{j−1} + S_{j−1} − A_j)).
//!
//! Each term of the density estimator hides the previous customer's service
//! time, so term j contributes g(x + A_j − W_{j−1}) and a mass G(A_j − W_{j−1}) at 0.

use serde::{Deserialize, Serialize};

use super::{unknown_variant, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{Contribution, Denominator, Dim, DynConditioning, Realizer, Sampler};
use crate::points::Coordinates;
use crate::special::{norm_cdf, norm_inv, norm_pdf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueParams {
    pub lambda: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub tau: f64,
    /// Simulate regenerative cycles of the steady-state queue instead of days.
    pub regenerative: bool,
    /// Use E[N] = λτ for days instead of estimating it.
    pub known_mean: bool,
    pub interval: [f64; 2],
}

impl Default for QueueParams {
    fn default() -> Self {
        QueueParams {
            lambda: 1.0,
            mu: -0.7,
            sigma2: 0.4,
            tau: 60.0,
            regenerative: false,
            known_mean: true,
            interval: [0.0, 2.2],
        }
    }
}

/// One simulated day or cycle. `a[k]`, `s[k]`, `w[k]` belong to customer k+1;
/// for a cycle, the entry at index `n` is the first customer of the next
/// cycle (its service time is not drawn).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub a: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub n: usize,
}

impl Trajectory {
    /// Offsets c_j = A_j − W_{j−1} of the density terms g(x + c_j).
    pub fn offsets(&self, regenerative: bool) -> impl Iterator<Item = (usize, f64)> + '_ {
        let last = if regenerative { self.n + 1 } else { self.n };
        (2..=last).map(move |j| (j, self.a[j - 1] - self.w[j - 2]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Queue {
    p: QueueParams,
    sigma: f64,
}

impl Queue {
    pub fn new(p: QueueParams) -> Result<Self> {
        if !(p.lambda > 0.0 && p.lambda.is_finite()) {
            return Err(Error::invalid("arrival rate must be positive"));
        }
        if !(p.sigma2 > 0.0 && p.sigma2.is_finite()) {
            return Err(Error::invalid("service log-variance must be positive"));
        }
        if !p.regenerative && !(p.tau > 0.0 && p.tau.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        if p.regenerative && (p.mu + 0.5 * p.sigma2).exp() * p.lambda >= 1.0 {
            return Err(Error::invalid("regenerative simulation needs utilization below 1"));
        }
        if !(p.interval[0] >= 0.0 && p.interval[0] < p.interval[1]) {
            return Err(Error::invalid("queue interval must satisfy 0 <= a < b"));
        }
        Ok(Queue { sigma: p.sigma2.sqrt(), p })
    }

    pub fn params(&self) -> &QueueParams {
        &self.p
    }

    /// E[N] when known in closed form (Poisson arrivals over a day).
    pub fn known_mean(&self) -> Option<f64> {
        (!self.p.regenerative && self.p.known_mean).then_some(self.p.lambda * self.p.tau)
    }

    fn interarrival(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.p.lambda
    }

    pub fn service_pdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        norm_pdf((y.ln() - self.p.mu) / self.sigma) / (y * self.sigma)
    }

    pub fn service_cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        norm_cdf((y.ln() - self.p.mu) / self.sigma)
    }

    /// Simulates one day (coordinates A₁, S₁, A₂, S₂, ...) or one regenerative
    /// cycle (S₁, A₂, S₂, A₃, ...).
    pub fn simulate(&self, u: &mut dyn Coordinates) -> Trajectory {
        let mut t = Trajectory::default();
        let service = |t: &mut Trajectory, u: &mut dyn Coordinates| {
            let z = norm_inv(u.next_coord());
            t.z.push(z);
            t.s.push((self.p.mu + self.sigma * z).exp());
        };
        if self.p.regenerative {
            t.a.push(0.0);
            t.w.push(0.0);
            loop {
                service(&mut t, u);
                let a = self.interarrival(u.next_coord());
                let k = t.w.len();
                let w = (t.w[k - 1] + t.s[k - 1] - a).max(0.0);
                t.a.push(a);
                t.w.push(w);
                if w == 0.0 {
                    t.n = k;
                    return t;
                }
            }
        }
        let mut clock = 0.0;
        loop {
            let a = self.interarrival(u.next_coord());
            clock += a;
            if clock >= self.p.tau {
                t.n = t.w.len();
                return t;
            }
            let w = match t.w.last() {
                None => 0.0,
                Some(&prev) => (prev + t.s[t.s.len() - 1] - a).max(0.0),
            };
            t.a.push(a);
            t.w.push(w);
            service(&mut t, u);
        }
    }

    /// Σ_j g(x + c_j) for one trajectory.
    pub fn density_sum(&self, t: &Trajectory, x: f64) -> f64 {
        t.offsets(self.p.regenerative).map(|(_, c)| self.service_pdf(x + c)).sum()
    }

    /// Numerator of the mass at zero for one trajectory.
    pub fn zero_mass_sum(&self, t: &Trajectory) -> f64 {
        let first = if !self.p.regenerative && t.n >= 1 { 1.0 } else { 0.0 };
        first + t.offsets(self.p.regenerative).map(|(_, c)| self.service_cdf(c)).sum::<f64>()
    }

    /// GLR sum L(x) = Σ_j 1[W_j ≤ x]·Ψ_j for x > 0.
    pub fn glr_sum(&self, t: &Trajectory, x: f64) -> f64 {
        self.glr_terms(t).filter(|&(w, _)| w <= x).map(|(_, psi)| psi).sum()
    }

    fn glr_terms<'a>(&'a self, t: &'a Trajectory) -> impl Iterator<Item = (f64, f64)> + 'a {
        let sigma = self.sigma;
        t.offsets(self.p.regenerative).map(move |(j, _)| {
            let (s, z) = (t.s[j - 2], t.z[j - 2]);
            (t.w[j - 1], -(z + sigma) / (s * sigma))
        })
    }
}

struct QueueCde(Queue);

impl Realizer for QueueCde {
    fn dim(&self) -> Dim {
        Dim::Unbounded
    }

    fn denominator(&self) -> Denominator {
        match self.0.known_mean() {
            Some(m) => Denominator::Known(m),
            None => Denominator::Estimated,
        }
    }

    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution {
        let t = self.0.simulate(u);
        for (_, c) in t.offsets(self.0.p.regenerative) {
            // g(x + c) vanishes for x ≤ −c.
            let start = grid.partition_point(|&x| x + c <= 0.0);
            for (o, &x) in acc[0][start..].iter_mut().zip(&grid[start..]) {
                *o += self.0.service_pdf(x + c);
            }
        }
        Contribution { weight: t.n as f64, rejected: false }
    }
}

struct QueueGlr(Queue);

impl Realizer for QueueGlr {
    fn dim(&self) -> Dim {
        Dim::Unbounded
    }

    fn denominator(&self) -> Denominator {
        QueueCde(self.0.clone()).denominator()
    }

    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution {
        let t = self.0.simulate(u);
        for (w, psi) in self.0.glr_terms(&t) {
            let k = grid.partition_point(|&x| x < w);
            if k < grid.len() {
                acc[0][k] += psi;
            }
        }
        Contribution { weight: t.n as f64, rejected: false }
    }

    fn finish(&self, acc: &mut [Vec<f64>]) {
        crate::estimator::prefix_sum(&mut acc[0]);
    }
}

impl Sampler for Queue {
    fn dim(&self) -> Dim {
        Dim::Unbounded
    }

    /// Waiting time of one uniformly chosen customer is not a per-point
    /// output here, so the KDE is unsupported for this model.
    fn sample(&self, _u: &mut dyn Coordinates) -> Option<f64> {
        None
    }
}

impl DensityModel for Queue {
    fn name(&self) -> &'static str {
        "queue"
    }

    fn interval(&self) -> (f64, f64) {
        (self.p.interval[0], self.p.interval[1])
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["hide-service".into()]
    }

    fn glr_variants(&self) -> Vec<String> {
        vec!["psi-service".into()]
    }

    fn conditioning(&self, _variant: &str) -> Result<Box<dyn DynConditioning>> {
        Err(Error::Unsupported { model: self.name().into(), kind: "a per-sample conditional distribution".into() })
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "hide-service" => Ok(Box::new(QueueCde(self.clone()))),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn glrde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "psi-service" => Ok(Box::new(QueueGlr(self.clone()))),
            _ => Err(unknown_variant(variant, &self.glr_variants())),
        }
    }
}
