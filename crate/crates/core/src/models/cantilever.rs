//! Displacement of a cantilever beam, X = (κ/Y₁)·√(Y₂²/w⁴ + Y₃²/t⁴).

use serde::{Deserialize, Serialize};

use super::{parse_index, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{
    CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, GlrRealizer, GlrSampler, GlrTerm, Realizer,
    Sampler,
};
use crate::points::Coordinates;
use crate::special::{norm_cdf, norm_inv, norm_pdf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantileverParams {
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub mu: [f64; 3],
    pub sigma: [f64; 3],
    pub interval: [f64; 2],
}

impl Default for CantileverParams {
    fn default() -> Self {
        CantileverParams {
            length: 100.0,
            width: 4.0,
            thickness: 2.0,
            mu: [2.9e7, 500.0, 1000.0],
            sigma: [1.45e6, 100.0, 100.0],
            interval: [3.1707, 5.6675],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cantilever {
    p: CantileverParams,
    kappa: f64,
    w4: f64,
    t4: f64,
}

impl Cantilever {
    pub fn new(p: CantileverParams) -> Result<Self> {
        if !(p.length > 0.0 && p.width > 0.0 && p.thickness > 0.0) {
            return Err(Error::invalid("beam dimensions must be positive"));
        }
        if p.sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("input standard deviations must be positive"));
        }
        if !(p.interval[0] > 0.0 && p.interval[0] < p.interval[1]) {
            return Err(Error::invalid("cantilever interval must satisfy 0 < a < b"));
        }
        let kappa = 4.0 * p.length.powi(3) / (p.width * p.thickness);
        Ok(Cantilever { kappa, w4: p.width.powi(4), t4: p.thickness.powi(4), p })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The displacement h(Y).
    pub fn h(&self, y: [f64; 3]) -> f64 {
        self.kappa / y[0] * (y[1] * y[1] / self.w4 + y[2] * y[2] / self.t4).sqrt()
    }

    fn draw(&self, j: usize, u: f64) -> f64 {
        self.p.mu[j] + self.p.sigma[j] * norm_inv(u)
    }

    /// Ψ_j for the GLR estimator (j = 0, 1, 2), or `None` on a degenerate draw.
    pub fn psi(&self, j: usize, y: [f64; 3]) -> Option<f64> {
        let h = self.h(y);
        let z = |i: usize| (y[i] - self.p.mu[i]) / (self.p.sigma[i] * self.p.sigma[i]);
        let (a2, a3) = (y[1] * y[1] / self.w4, y[2] * y[2] / self.t4);
        let s = a2 + a3;
        let v = match j {
            0 => (y[0] * z(0) - 2.0) / h,
            1 => -(y[1] * z(1) * s + a3) / (h * a2),
            _ => -(y[2] * z(2) * s + a2) / (h * a3),
        };
        v.is_finite().then_some(v)
    }

    pub fn hide(&self, k: usize) -> Result<Hide> {
        if k > 2 {
            return Err(Error::invalid("cantilever hides Y1, Y2 or Y3"));
        }
        Ok(Hide { m: self.clone(), k })
    }
}

/// Realized conditional law of X when Y_k is hidden.
#[derive(Clone, Copy, Debug)]
pub struct BeamDensity {
    k: usize,
    /// Hiding Y₁: κ√S. Hiding Y₂/Y₃: (Y₁/κ)² and the other load term.
    c1: f64,
    c2: f64,
    mu: f64,
    sigma: f64,
    scale: f64,
}

impl BeamDensity {
    fn w(&self, x: f64) -> f64 {
        // W₂ = w⁴((xY₁/κ)² − Y₃²/t⁴); W₃ likewise with t⁴ and Y₂²/w⁴.
        self.scale * (x * x * self.c1 - self.c2)
    }
}

impl ConditionalDensity for BeamDensity {
    fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.k == 0 {
            let w1 = self.c1 / x;
            return norm_pdf((w1 - self.mu) / self.sigma) * w1 / (x * self.sigma);
        }
        let w = self.w(x);
        if w <= 0.0 {
            return 0.0;
        }
        let r = w.sqrt();
        (norm_pdf((r - self.mu) / self.sigma) + norm_pdf(-(r + self.mu) / self.sigma)) * self.scale * x * self.c1
            / (self.sigma * r)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.k == 0 {
            return norm_cdf(-(self.c1 / x - self.mu) / self.sigma);
        }
        let w = self.w(x);
        if w <= 0.0 {
            return 0.0;
        }
        let r = w.sqrt();
        (norm_cdf((r - self.mu) / self.sigma) - norm_cdf(-(r + self.mu) / self.sigma)).max(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct Hide {
    m: Cantilever,
    k: usize,
}

impl Hide {
    /// Conditional law given the full input vector (the hidden entry is ignored).
    pub fn given(&self, y: [f64; 3]) -> BeamDensity {
        let m = &self.m;
        let (mu, sigma) = (m.p.mu[self.k], m.p.sigma[self.k]);
        match self.k {
            0 => BeamDensity {
                k: 0,
                c1: m.kappa * (y[1] * y[1] / m.w4 + y[2] * y[2] / m.t4).sqrt(),
                c2: 0.0,
                mu,
                sigma,
                scale: 1.0,
            },
            1 => BeamDensity { k: 1, c1: (y[0] / m.kappa).powi(2), c2: y[2] * y[2] / m.t4, mu, sigma, scale: m.w4 },
            _ => BeamDensity { k: 2, c1: (y[0] / m.kappa).powi(2), c2: y[1] * y[1] / m.w4, mu, sigma, scale: m.t4 },
        }
    }
}

impl Conditioning for Hide {
    type Density = BeamDensity;

    fn dim(&self) -> Dim {
        Dim::Finite(2)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<BeamDensity> {
        let mut y = [0.0; 3];
        for (j, v) in y.iter_mut().enumerate() {
            if j != self.k {
                *v = self.m.draw(j, u.next_coord());
            }
        }
        if self.k != 0 && y[0] <= 0.0 {
            return None;
        }
        Some(self.given(y))
    }
}

struct Glr {
    m: Cantilever,
    j: usize,
}

impl GlrSampler for Glr {
    fn dim(&self) -> Dim {
        Dim::Finite(3)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<GlrTerm> {
        let y = [0, 1, 2].map(|j| self.m.draw(j, u.next_coord()));
        if y[0] <= 0.0 {
            return None;
        }
        Some(GlrTerm { threshold: self.m.h(y), psi: self.m.psi(self.j, y)? })
    }
}

impl Sampler for Cantilever {
    fn dim(&self) -> Dim {
        Dim::Finite(3)
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        let y = [0, 1, 2].map(|j| self.draw(j, u.next_coord()));
        (y[0] > 0.0).then(|| self.h(y))
    }
}

impl DensityModel for Cantilever {
    fn name(&self) -> &'static str {
        "cantilever"
    }

    fn interval(&self) -> (f64, f64) {
        (self.p.interval[0], self.p.interval[1])
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["g-1".into(), "g-2".into(), "g-3".into()]
    }

    fn glr_variants(&self) -> Vec<String> {
        vec!["psi-1".into(), "psi-2".into(), "psi-3".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        Ok(Box::new(self.hide(parse_index(self.name(), variant, "g-", 3)?)?))
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        Ok(Box::new(CdeRealizer(self.hide(parse_index(self.name(), variant, "g-", 3)?)?)))
    }

    fn glrde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        let j = parse_index(self.name(), variant, "psi-", 3)?;
        Ok(Box::new(GlrRealizer(Glr { m: self.clone(), j })))
    }

    fn combo_hidden(&self, variant: &str) -> Option<(usize, usize)> {
        parse_index(self.name(), variant, "g-", 3).ok().map(|k| (k, 3))
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }
}
