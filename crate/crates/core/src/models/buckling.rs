//! Buckling strength of a steel plate,
//! X = V₁·V₂·V₃ with Λ = (Y₁/Y₂)√(Y₃/Y₄), V₁ = 2.1/Λ − 0.9/Λ²,
//! V₂ = 1 − 2Y₆Y₂/Y₁ and V₃ = 1 − 3Y₅/(4Λ).

use serde::{Deserialize, Serialize};

use super::{parse_index, unknown_variant, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{
    CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, GlrRealizer, GlrSampler, GlrTerm, Realizer,
    Sampler,
};
use crate::points::Coordinates;
use crate::special::{lognormal_from_mean_cv, norm_cdf, norm_inv, norm_pdf};

/// An input given by its mean and coefficient of variation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Input {
    Normal { mean: f64, cv: f64 },
    Lognormal { mean: f64, cv: f64 },
}

impl Input {
    fn validate(&self) -> Result<()> {
        let (Input::Normal { mean, cv } | Input::Lognormal { mean, cv }) = *self;
        if mean > 0.0 && mean.is_finite() && cv > 0.0 && cv.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("input {self:?} needs positive mean and cv")))
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match *self {
            Input::Normal { mean, cv } => mean + mean * cv * norm_inv(u),
            Input::Lognormal { mean, cv } => {
                let (mu, s) = lognormal_from_mean_cv(mean, cv);
                (mu + s * norm_inv(u)).exp()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BucklingParams {
    pub inputs: [Input; 6],
    pub interval: [f64; 2],
}

impl Default for BucklingParams {
    fn default() -> Self {
        use Input::{Lognormal, Normal};
        BucklingParams {
            inputs: [
                Normal { mean: 23.808, cv: 0.028 },
                Lognormal { mean: 0.525, cv: 0.044 },
                Lognormal { mean: 44.2, cv: 0.1235 },
                Normal { mean: 28623.0, cv: 0.076 },
                Normal { mean: 0.35, cv: 0.05 },
                Normal { mean: 5.25, cv: 0.07 },
            ],
            interval: [0.5169, 0.6511],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Buckling {
    p: BucklingParams,
    /// (mean, sd) of Y₅ and Y₆.
    n5: (f64, f64),
    n6: (f64, f64),
}

/// Intermediate quantities of one draw.
#[derive(Clone, Copy, Debug)]
struct Terms {
    lambda: f64,
    v1: f64,
    ratio: f64,
}

impl Buckling {
    pub fn new(p: BucklingParams) -> Result<Self> {
        for i in &p.inputs {
            i.validate()?;
        }
        let normal = |i: Input, name: &str| match i {
            Input::Normal { mean, cv } => Ok((mean, mean * cv)),
            _ => Err(Error::invalid(format!("{name} must be normal for the conditional densities"))),
        };
        if !(p.interval[0] < p.interval[1]) {
            return Err(Error::invalid("buckling interval must satisfy a < b"));
        }
        Ok(Buckling { n5: normal(p.inputs[4], "Y5")?, n6: normal(p.inputs[5], "Y6")?, p })
    }

    /// Λ, V₁ and Y₁/Y₂, or `None` when Λ is undefined or V₁ ≤ 0.
    fn terms(y: &[f64; 6]) -> Option<Terms> {
        if !(y[0] > 0.0 && y[1] > 0.0 && y[2] > 0.0 && y[3] > 0.0) {
            return None;
        }
        let lambda = y[0] / y[1] * (y[2] / y[3]).sqrt();
        let v1 = 2.1 / lambda - 0.9 / (lambda * lambda);
        (v1 > 0.0).then_some(Terms { lambda, v1, ratio: y[0] / y[1] })
    }

    pub fn h(&self, y: &[f64; 6]) -> Option<f64> {
        let t = Self::terms(y)?;
        Some(t.v1 * (1.0 - 2.0 * y[5] / t.ratio) * (1.0 - 0.75 * y[4] / t.lambda))
    }

    fn draw(&self, skip: Option<usize>, u: &mut dyn Coordinates) -> [f64; 6] {
        let mut y = [0.0; 6];
        for (j, v) in y.iter_mut().enumerate() {
            if Some(j) != skip {
                *v = self.p.inputs[j].inverse(u.next_coord());
            }
        }
        y
    }

    pub fn hide(&self, k: usize) -> Result<Hide> {
        match k {
            4 | 5 => Ok(Hide { m: self.clone(), k }),
            _ => Err(Error::invalid("buckling hides Y5 or Y6")),
        }
    }

    /// Conditional law with Y_k hidden (k = 4 or 5, 0-based), given the others.
    pub fn given(&self, k: usize, y: &[f64; 6]) -> Option<PlateDensity> {
        let t = Self::terms(y)?;
        // X = C·(1 − Y_k/b) for C > 0, so X ≤ x iff Y_k ≥ b(1 − x/C).
        let (c, b, law) = if k == 4 {
            (t.v1 * (1.0 - 2.0 * y[5] / t.ratio), 4.0 * t.lambda / 3.0, self.n5)
        } else {
            (t.v1 * (1.0 - 0.75 * y[4] / t.lambda), t.ratio / 2.0, self.n6)
        };
        (c > 0.0).then_some(PlateDensity { c, b, mean: law.0, sd: law.1 })
    }
}

/// f(x|G) = f_k(b(1 − x/C))·b/C for a normal hidden input.
#[derive(Clone, Copy, Debug)]
pub struct PlateDensity {
    c: f64,
    b: f64,
    mean: f64,
    sd: f64,
}

impl ConditionalDensity for PlateDensity {
    fn density(&self, x: f64) -> f64 {
        let t = self.b * (1.0 - x / self.c);
        norm_pdf((t - self.mean) / self.sd) * self.b / (self.c * self.sd)
    }

    fn cdf(&self, x: f64) -> f64 {
        let t = self.b * (1.0 - x / self.c);
        norm_cdf((self.mean - t) / self.sd)
    }
}

#[derive(Clone, Debug)]
pub struct Hide {
    m: Buckling,
    k: usize,
}

impl Conditioning for Hide {
    type Density = PlateDensity;

    fn dim(&self) -> Dim {
        Dim::Finite(5)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<PlateDensity> {
        let y = self.m.draw(Some(self.k), u);
        self.m.given(self.k, &y)
    }
}

struct Glr6(Buckling);

impl GlrSampler for Glr6 {
    fn dim(&self) -> Dim {
        Dim::Finite(6)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<GlrTerm> {
        let y = self.0.draw(None, u);
        let t = Buckling::terms(&y)?;
        let c = t.v1 * (1.0 - 0.75 * y[4] / t.lambda);
        let (mu6, sd6) = self.0.n6;
        let psi = y[0] * (y[5] - mu6) / (2.0 * c * y[1] * sd6 * sd6);
        let x = self.0.h(&y)?;
        (c != 0.0 && psi.is_finite()).then_some(GlrTerm { threshold: x, psi })
    }
}

impl Sampler for Buckling {
    fn dim(&self) -> Dim {
        Dim::Finite(6)
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        self.h(&self.draw(None, u))
    }
}

impl DensityModel for Buckling {
    fn name(&self) -> &'static str {
        "buckling"
    }

    fn interval(&self) -> (f64, f64) {
        (self.p.interval[0], self.p.interval[1])
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["g-5".into(), "g-6".into()]
    }

    fn glr_variants(&self) -> Vec<String> {
        vec!["psi-6".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        Ok(Box::new(self.hide(self.variant_index(variant)?)?))
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        Ok(Box::new(CdeRealizer(self.hide(self.variant_index(variant)?)?)))
    }

    fn glrde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "psi-6" => Ok(Box::new(GlrRealizer(Glr6(self.clone())))),
            _ => Err(unknown_variant(variant, &self.glr_variants())),
        }
    }

    fn combo_hidden(&self, variant: &str) -> Option<(usize, usize)> {
        self.variant_index(variant).ok().map(|k| (k, 6))
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }
}

impl Buckling {
    fn variant_index(&self, variant: &str) -> Result<usize> {
        match parse_index(self.name(), variant, "g-", 6) {
            Ok(k @ (4 | 5)) => Ok(k),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trapezoid;
    use crate::points::{rng_stream, SliceCursor};

    fn model() -> Buckling {
        Buckling::new(BucklingParams::default()).unwrap()
    }

    #[test]
    fn lognormal_conversion() {
        let (mu, s) = lognormal_from_mean_cv(0.525, 0.044);
        assert!((s * s - 0.0019341).abs() < 1e-7);
        assert!((mu + 0.645324).abs() < 1e-6);
    }

    #[test]
    fn mean_input_value() {
        let m = model();
        let y = [23.808, 0.525, 44.2, 28623.0, 0.35, 5.25];
        let x = m.h(&y).unwrap();
        assert!(x > 0.5169 && x < 0.6511, "{x}");
        // Each conditional density places Y_k back at its drawn value.
        for k in [4, 5] {
            let d = m.given(k, &y).unwrap();
            assert!((d.cdf(x) - norm_cdf(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_densities_integrate() {
        let m = model();
        let mut s = rng_stream(5, 0);
        for k in [4, 5] {
            let c = m.hide(k).unwrap();
            for _ in 0..10 {
                let d = c.realize(&mut s).unwrap();
                let mass = trapezoid(|x| d.density(x), -1.0, 2.0, 60_000);
                assert!((mass - 1.0).abs() < 1e-3, "{mass}");
                let x = 0.58;
                let fd = (d.cdf(x + 1e-6) - d.cdf(x - 1e-6)) / 2e-6;
                assert!((fd - d.density(x)).abs() <= 1e-4 * d.density(x).max(1e-3));
            }
        }
    }

    #[test]
    fn glr_sign_matches_finite_difference() {
        let m = model();
        let g = Glr6(m.clone());
        let u = [0.5, 0.5, 0.5, 0.5, 0.5, 0.9];
        let t = g.realize(&mut SliceCursor::new(&u)).unwrap();
        // X decreases in Y₆, and Y₆ above its mean gives Ψ₆ > 0.
        assert!(t.psi > 0.0);
        let mut y = [23.808, 0.525, 44.2, 28623.0, 0.35, 5.25];
        let x0 = m.h(&y).unwrap();
        y[5] += 1e-6;
        assert!(m.h(&y).unwrap() < x0);
    }

    #[test]
    fn only_hidden_five_and_six() {
        let m = model();
        assert!(m.cde("g-1").is_err());
        assert!(m.cde("g-5").is_ok());
        assert_eq!(m.combo_hidden("g-6"), Some((5, 6)));
    }
}
