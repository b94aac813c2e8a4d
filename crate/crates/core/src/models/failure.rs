//! Failure time of a coherent system of components with independent
//! exponential lifetimes. Given the failure order π, the failure time is
//! hypoexponential with rates Λ₁ > Λ₂ > ⋯ > Λ_C.

use serde::{Deserialize, Serialize};

use super::hypoexp::{HypoMethod, Hypoexp};
use super::san::DEFAULT_ENDS;
use super::{unknown_variant, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, Realizer, Sampler};
use crate::points::{rng_stream, Coordinates};

/// Structure function Φ. For `network`, component j is link `links[j]` and
/// the system works while node 0 and node `nodes − 1` are connected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Structure {
    Series { d: usize },
    Parallel { d: usize },
    Network { nodes: usize, links: Vec<(usize, usize)> },
}

impl Structure {
    pub fn thirteen_link() -> Self {
        Structure::Network { nodes: 9, links: DEFAULT_ENDS.to_vec() }
    }

    pub fn components(&self) -> usize {
        match self {
            Structure::Series { d } | Structure::Parallel { d } => *d,
            Structure::Network { links, .. } => links.len(),
        }
    }

    /// Φ(up): whether the system works.
    pub fn works(&self, up: &[bool]) -> bool {
        match self {
            Structure::Series { .. } => up.iter().all(|&u| u),
            Structure::Parallel { .. } => up.iter().any(|&u| u),
            Structure::Network { nodes, links } => {
                let mut seen = vec![false; *nodes];
                let mut stack = vec![0];
                seen[0] = true;
                while let Some(v) = stack.pop() {
                    for (&(a, b), _) in links.iter().zip(up).filter(|(_, &u)| u) {
                        let w = if a == v {
                            b
                        } else if b == v {
                            a
                        } else {
                            continue;
                        };
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                seen[nodes - 1]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.components();
        if d == 0 || d > 64 {
            return Err(Error::invalid("system needs between 1 and 64 components"));
        }
        if let Structure::Network { nodes, links } = self {
            if *nodes < 2 || links.iter().any(|&(a, b)| a >= *nodes || b >= *nodes || a == b) {
                return Err(Error::invalid("network links must join distinct nodes in range"));
            }
        }
        if !self.works(&vec![true; d]) || self.works(&vec![false; d]) {
            return Err(Error::invalid("structure must work with all components up and fail with all down"));
        }
        // Spot-check monotonicity on random comparable pairs.
        let mut s = rng_stream(0x6d6f6e6f, 0);
        for _ in 0..256 {
            let lo: Vec<bool> = (0..d).map(|_| s.uniform() < 0.5).collect();
            let hi: Vec<bool> = lo.iter().map(|&b| b || s.uniform() < 0.5).collect();
            if self.works(&lo) && !self.works(&hi) {
                return Err(Error::invalid("structure function is not monotone"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FailureSpec {
    /// Failure rates; a single value applies to every component.
    pub rates: Vec<f64>,
    pub structure: Structure,
    pub interval: [f64; 2],
    pub method: HypoMethod,
}

impl Default for FailureSpec {
    fn default() -> Self {
        FailureSpec {
            rates: vec![1.0],
            structure: Structure::thirteen_link(),
            interval: [0.0, 1.8],
            method: HypoMethod::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    spec: FailureSpec,
    rates: Vec<f64>,
}

/// Failure order, critical number and the rates of the C inter-failure times.
#[derive(Clone, Debug, PartialEq)]
pub struct FailureOrder {
    pub pi: Vec<usize>,
    pub critical: usize,
    pub rates: Vec<f64>,
}

impl Failure {
    pub fn new(spec: FailureSpec) -> Result<Self> {
        spec.structure.validate()?;
        let d = spec.structure.components();
        let rates = match spec.rates.len() {
            1 => vec![spec.rates[0]; d],
            n if n == d => spec.rates.clone(),
            n => return Err(Error::invalid(format!("{n} rates given for {d} components"))),
        };
        if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("failure rates must be positive"));
        }
        if !(spec.interval[0] >= 0.0 && spec.interval[0] < spec.interval[1]) {
            return Err(Error::invalid("failure-time interval must satisfy 0 <= a < b"));
        }
        Ok(Failure { spec, rates })
    }

    pub fn structure(&self) -> &Structure {
        &self.spec.structure
    }

    /// Samples lifetimes by inversion and returns them.
    fn lifetimes(&self, u: &mut dyn Coordinates) -> Vec<f64> {
        self.rates.iter().map(|r| -(-u.next_coord()).ln_1p() / r).collect()
    }

    /// Failure order of a set of lifetimes (ties broken by index).
    pub fn order(&self, life: &[f64]) -> Vec<usize> {
        let mut pi: Vec<usize> = (0..life.len()).collect();
        pi.sort_by(|&a, &b| life[a].total_cmp(&life[b]).then(a.cmp(&b)));
        pi
    }

    /// Number of failures, in order π, at which the system first fails.
    pub fn critical(&self, pi: &[usize]) -> usize {
        let mut up = vec![true; pi.len()];
        for (c, &j) in pi.iter().enumerate() {
            up[j] = false;
            if !self.spec.structure.works(&up) {
                return c + 1;
            }
        }
        pi.len()
    }

    /// Same as [`Failure::critical`], by repairing components in reverse order.
    pub fn critical_reverse(&self, pi: &[usize]) -> usize {
        let mut up = vec![false; pi.len()];
        for (k, &j) in pi.iter().enumerate().rev() {
            up[j] = true;
            if self.spec.structure.works(&up) {
                return k + 1;
            }
        }
        1
    }

    pub fn failure_order(&self, pi: Vec<usize>) -> FailureOrder {
        let critical = self.critical(&pi);
        let mut rates = Vec::with_capacity(critical);
        let mut total: f64 = self.rates.iter().sum();
        for &j in &pi[..critical] {
            rates.push(total);
            total -= self.rates[j];
        }
        FailureOrder { pi, critical, rates }
    }
}

/// Conditional law of the failure time given π.
#[derive(Clone, Debug)]
pub struct FailureDensity(pub Hypoexp);

impl ConditionalDensity for FailureDensity {
    fn density(&self, x: f64) -> f64 {
        self.0.density(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }
}

pub struct OrderConditioning(Failure);

impl Conditioning for OrderConditioning {
    type Density = FailureDensity;

    fn dim(&self) -> Dim {
        Dim::Finite(self.0.rates.len())
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<FailureDensity> {
        let life = self.0.lifetimes(u);
        let f = self.0.failure_order(self.0.order(&life));
        Hypoexp::new(f.rates, self.0.spec.method).ok().map(FailureDensity)
    }
}

impl Sampler for Failure {
    fn dim(&self) -> Dim {
        Dim::Finite(self.rates.len())
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        let life = self.lifetimes(u);
        let pi = self.order(&life);
        Some(life[pi[self.critical(&pi) - 1]])
    }
}

impl DensityModel for Failure {
    fn name(&self) -> &'static str {
        "failure"
    }

    fn interval(&self) -> (f64, f64) {
        (self.spec.interval[0], self.spec.interval[1])
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["order".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        match variant {
            "order" => Ok(Box::new(OrderConditioning(self.clone()))),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "order" => Ok(Box::new(CdeRealizer(OrderConditioning(self.clone())))),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }

    /// Closed forms for the series (minimum) and parallel (maximum) systems.
    fn exact_density(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        match self.spec.structure {
            Structure::Series { .. } => {
                let total: f64 = self.rates.iter().sum();
                Some(total * (-total * x).exp())
            }
            Structure::Parallel { .. } => Some(
                (0..self.rates.len())
                    .map(|i| {
                        let others: f64 =
                            (0..self.rates.len()).filter(|&k| k != i).map(|k| -(-self.rates[k] * x).exp_m1()).product();
                        self.rates[i] * (-self.rates[i] * x).exp() * others
                    })
                    .sum(),
            ),
            Structure::Network { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(structure: Structure) -> Failure {
        Failure::new(FailureSpec { structure, ..Default::default() }).unwrap()
    }

    #[test]
    fn series_and_parallel() {
        let mut s = rng_stream(1, 0);
        let ser = system(Structure::Series { d: 5 });
        let par = system(Structure::Parallel { d: 5 });
        for _ in 0..50 {
            let life = ser.lifetimes(&mut s);
            assert_eq!(ser.critical(&ser.order(&life)), 1);
            assert_eq!(par.critical(&par.order(&life)), 5);
        }
    }

    #[test]
    fn network_rates_count_down() {
        let m = system(Structure::thirteen_link());
        let mut s = rng_stream(2, 0);
        for _ in 0..200 {
            let life = m.lifetimes(&mut s);
            let f = m.failure_order(m.order(&life));
            assert!(f.critical >= 1 && f.critical <= 13);
            for (j, r) in f.rates.iter().enumerate() {
                assert_eq!(*r, 13.0 - j as f64);
            }
            assert_eq!(m.critical_reverse(&f.pi), f.critical);
        }
    }

    #[test]
    fn invalid_structures() {
        assert!(Failure::new(FailureSpec { structure: Structure::Series { d: 0 }, ..Default::default() }).is_err());
        let cut_off = Structure::Network { nodes: 3, links: vec![(0, 1)] };
        assert!(Failure::new(FailureSpec { structure: cut_off, ..Default::default() }).is_err());
        let spec = FailureSpec { rates: vec![1.0, 2.0], ..Default::default() };
        assert!(Failure::new(spec).is_err());
    }

    #[test]
    fn sample_is_critical_failure_time() {
        let m = system(Structure::Parallel { d: 3 });
        let pts = [0.2, 0.9, 0.5];
        let x = m.sample(&mut crate::points::SliceCursor::new(&pts)).unwrap();
        assert!((x - (-(0.1f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_integrate_to_one() {
        use crate::numerics::adaptive_simpson;
        for structure in [Structure::Series { d: 3 }, Structure::Parallel { d: 3 }] {
            let f = Failure::new(FailureSpec {
                rates: vec![1.0, 2.0, 3.0],
                structure,
                interval: [0.0, 3.0],
                ..Default::default()
            })
            .unwrap();
            let mass = adaptive_simpson(&|x| f.exact_density(x).unwrap(), 0.0, 40.0, 1e-12);
            assert!((mass - 1.0).abs() < 1e-9, "{mass}");
        }
        assert!(Failure::new(FailureSpec::default()).unwrap().exact_density(1.0).is_none());
    }
}
