//! X = Y₁ + Y₂ with Y₁ ~ U(0, 1) and Y₂ ~ U(0, ε).

use super::{parse_index, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, Realizer, Sampler};
use crate::points::Coordinates;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumUniforms {
    eps: f64,
}

impl SumUniforms {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        Ok(SumUniforms { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Exact one-sample IV over [0, 1 + ε] when hiding Y_k (k = 1 or 2).
    pub fn exact_iv(&self, hide: usize) -> Result<f64> {
        let e = self.eps;
        match hide {
            1 => Ok(e / 3.0),
            2 => Ok(1.0 / e - 1.0 + e / 3.0),
            _ => Err(Error::invalid(format!("hide must be 1 or 2, got {hide}"))),
        }
    }

    pub fn hide(&self, k: usize) -> Result<Hide> {
        match k {
            1 | 2 => Ok(Hide { eps: self.eps, k }),
            _ => Err(Error::invalid(format!("hide must be 1 or 2, got {k}"))),
        }
    }

    fn density(&self, x: f64) -> f64 {
        let e = self.eps;
        if x <= 0.0 || x >= 1.0 + e {
            0.0
        } else if x < e {
            x / e
        } else if x <= 1.0 {
            1.0
        } else {
            (1.0 + e - x) / e
        }
    }
}

/// Uniform density on [lo, lo + width].
#[derive(Clone, Copy, Debug)]
pub struct Box1 {
    lo: f64,
    width: f64,
}

impl ConditionalDensity for Box1 {
    fn density(&self, x: f64) -> f64 {
        if x >= self.lo && x <= self.lo + self.width {
            1.0 / self.width
        } else {
            0.0
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / self.width).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Hide {
    eps: f64,
    k: usize,
}

impl Hide {
    /// Conditional law given the retained term's value.
    pub fn given(&self, other: f64) -> Box1 {
        match self.k {
            1 => Box1 { lo: other, width: 1.0 },
            _ => Box1 { lo: other, width: self.eps },
        }
    }
}

impl Conditioning for Hide {
    type Density = Box1;

    fn dim(&self) -> Dim {
        Dim::Finite(1)
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<Box1> {
        let v = u.next_coord();
        Some(match self.k {
            1 => self.given(self.eps * v),
            _ => self.given(v),
        })
    }
}

impl Sampler for SumUniforms {
    fn dim(&self) -> Dim {
        Dim::Finite(2)
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        let y1 = u.next_coord();
        Some(y1 + self.eps * u.next_coord())
    }
}

impl DensityModel for SumUniforms {
    fn name(&self) -> &'static str {
        "sum-uniforms"
    }

    fn interval(&self) -> (f64, f64) {
        (0.0, 1.0 + self.eps)
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["g-1".into(), "g-2".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        Ok(Box::new(self.hide(parse_index(self.name(), variant, "g-", 2)? + 1)?))
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        Ok(Box::new(CdeRealizer(self.hide(parse_index(self.name(), variant, "g-", 2)? + 1)?)))
    }

    fn combo_hidden(&self, variant: &str) -> Option<(usize, usize)> {
        parse_index(self.name(), variant, "g-", 2).ok().map(|k| (k, 2))
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(*self))
    }

    fn exact_density(&self, x: f64) -> Option<f64> {
        Some(self.density(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trapezoid;

    #[test]
    fn exact_ivs() {
        let m = SumUniforms::new(0.75).unwrap();
        assert!((m.exact_iv(1).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.exact_iv(2).unwrap() - 0.583333333333).abs() < 1e-10);
        assert!(SumUniforms::new(1.0).is_err());
        assert!(m.exact_iv(3).is_err());
    }

    #[test]
    fn indicator_inside_support() {
        let m = SumUniforms::new(0.75).unwrap();
        assert_eq!(m.hide(1).unwrap().given(0.2).density(0.5), 1.0);
        assert_eq!(m.hide(2).unwrap().given(0.2).density(0.5), 1.0 / 0.75);
        assert_eq!(m.hide(2).unwrap().given(0.2).density(0.1), 0.0);
    }

    #[test]
    fn exact_density_integrates_to_one() {
        let m = SumUniforms::new(0.3).unwrap();
        let total = trapezoid(|x| m.density(x), 0.0, 1.3, 13_000);
        assert!((total - 1.0).abs() < 1e-6);
    }
}
