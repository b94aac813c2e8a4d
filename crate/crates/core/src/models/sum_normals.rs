//! X = (a₁Z₁ + ⋯ + a_dZ_d)/σ with σ² = Σa_j², so X is standard normal.

use super::{parse_index, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{
    CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, GlrRealizer, GlrSampler, GlrTerm, Realizer,
    Sampler,
};
use crate::points::Coordinates;
use crate::special::{norm_cdf, norm_inv, norm_pdf, INV_SQRT_2PI};

#[derive(Clone, Debug, PartialEq)]
pub struct SumNormals {
    a: Vec<f64>,
    sigma: f64,
    interval: (f64, f64),
}

impl SumNormals {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::invalid("sum of normals needs at least two terms"));
        }
        if a.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::invalid("sum-of-normals coefficients must be finite and non-zero"));
        }
        let sigma = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(SumNormals { a, sigma, interval: (-2.0, 2.0) })
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.interval = (a, b);
        self
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    /// Conditioning that hides Z_k (0-based).
    pub fn hide(&self, k: usize) -> Result<HideOne> {
        if k >= self.d() {
            return Err(Error::invalid(format!("hidden index {} out of range 1..={}", k + 1, self.d())));
        }
        Ok(HideOne { model: self.clone(), k })
    }

    /// Exact per-sample variance of f(x|G₋ₖ) (0-based k).
    pub fn exact_variance(&self, k: usize, x: f64) -> f64 {
        let s2 = self.a[k].abs() / self.sigma;
        let s1sq = 1.0 - s2 * s2;
        let first =
            INV_SQRT_2PI / (s2 * (1.0 + s1sq).sqrt()) * norm_pdf(std::f64::consts::SQRT_2 * x / (1.0 + s1sq).sqrt());
        (first - norm_pdf(x).powi(2)).max(0.0)
    }
}

/// Realized f(·|G₋ₖ): a normal density in x with center S/σ and scale |a_k|/σ.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedNormal {
    partial: f64,
    sigma: f64,
    ak: f64,
}

impl ConditionalDensity for ShiftedNormal {
    fn density(&self, x: f64) -> f64 {
        norm_pdf((x * self.sigma - self.partial) / self.ak) * self.sigma / self.ak
    }
    fn cdf(&self, x: f64) -> f64 {
        norm_cdf((x * self.sigma - self.partial) / self.ak)
    }
}

#[derive(Clone, Debug)]
pub struct HideOne {
    model: SumNormals,
    k: usize,
}

impl HideOne {
    pub fn density_from(&self, z: &[f64]) -> ShiftedNormal {
        let partial =
            self.model.a.iter().enumerate().filter(|&(j, _)| j != self.k).zip(z).map(|((_, a), z)| a * z).sum();
        ShiftedNormal { partial, sigma: self.model.sigma, ak: self.model.a[self.k].abs() }
    }
}

impl Conditioning for HideOne {
    type Density = ShiftedNormal;

    fn dim(&self) -> Dim {
        Dim::Finite(self.model.d() - 1)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<ShiftedNormal> {
        let mut partial = 0.0;
        for (j, a) in self.model.a.iter().enumerate() {
            if j != self.k {
                partial += a * norm_inv(u.next_coord());
            }
        }
        Some(ShiftedNormal { partial, sigma: self.model.sigma, ak: self.model.a[self.k].abs() })
    }
}

struct Glr {
    model: SumNormals,
    j: usize,
}

impl GlrSampler for Glr {
    fn dim(&self) -> Dim {
        Dim::Finite(self.model.d())
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<GlrTerm> {
        let mut x = 0.0;
        let mut zj = 0.0;
        for (i, a) in self.model.a.iter().enumerate() {
            let z = norm_inv(u.next_coord());
            if i == self.j {
                zj = z;
            }
            x += a * z;
        }
        Some(GlrTerm { threshold: x / self.model.sigma, psi: -zj * self.model.sigma / self.model.a[self.j] })
    }
}

impl Sampler for SumNormals {
    fn dim(&self) -> Dim {
        Dim::Finite(self.d())
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        Some(self.a.iter().map(|a| a * norm_inv(u.next_coord())).sum::<f64>() / self.sigma)
    }
}

impl DensityModel for SumNormals {
    fn name(&self) -> &'static str {
        "sum-normals"
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn cde_variants(&self) -> Vec<String> {
        (1..=self.d()).map(|k| format!("g-{k}")).collect()
    }

    fn glr_variants(&self) -> Vec<String> {
        (1..=self.d()).map(|k| format!("psi-{k}")).collect()
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        Ok(Box::new(self.hide(parse_index(self.name(), variant, "g-", self.d())?)?))
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        Ok(Box::new(CdeRealizer(self.hide(parse_index(self.name(), variant, "g-", self.d())?)?)))
    }

    fn glrde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        let j = parse_index(self.name(), variant, "psi-", self.d())?;
        Ok(Box::new(GlrRealizer(Glr { model: self.clone(), j })))
    }

    fn combo_hidden(&self, variant: &str) -> Option<(usize, usize)> {
        parse_index(self.name(), variant, "g-", self.d()).ok().map(|k| (k, self.d()))
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }

    fn exact_density(&self, x: f64) -> Option<f64> {
        Some(norm_pdf(x))
    }
}
