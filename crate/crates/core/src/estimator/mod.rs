//! Model-independent estimators: conditional density averaging, kernel
//! density estimation, GLR density estimation, control-variate combinations
//! and ratio estimators.

mod combo;
mod glr;
mod kde;
mod ratio;

pub use combo::{combine, fit_combo_weights, ComboWeights};
pub use glr::{glrde_estimate, GlrTerm};
pub use kde::{kde_bandwidth, kde_estimate, kde_grid, KdeSpec};
pub use ratio::{ratio_density, RatioAccumulator};

use crate::error::{Error, Result};
use crate::points::Coordinates;

/// Number of uniforms a model consumes per sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Finite(usize),
    Unbounded,
}

impl Dim {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dim::Finite(s) => Some(s),
            Dim::Unbounded => None,
        }
    }
}

/// A realized conditional distribution F(·|G) with its density.
pub trait ConditionalDensity {
    fn density(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    /// Adds the density at each point of a sorted grid to `out`.
    fn add_density_grid(&self, grid: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(grid) {
            *o += self.density(x);
        }
    }
}

/// A conditioning scheme: maps one point to a realized conditional distribution.
/// `None` marks a rejected draw (an event of negligible probability).
pub trait Conditioning: Send + Sync {
    type Density: ConditionalDensity;
    fn dim(&self) -> Dim;
    fn realize(&self, u: &mut dyn Coordinates) -> Option<Self::Density>;
}

/// Object-safe form of [`Conditioning`], for callers that pick a conditioning at run time.
pub trait DynConditioning: Send + Sync {
    fn dim(&self) -> Dim;
    fn realize_dyn(&self, u: &mut dyn Coordinates) -> Option<Box<dyn ConditionalDensity>>;
}

impl<C> DynConditioning for C
where
    C: Conditioning,
    C::Density: 'static,
{
    fn dim(&self) -> Dim {
        Conditioning::dim(self)
    }

    fn realize_dyn(&self, u: &mut dyn Coordinates) -> Option<Box<dyn ConditionalDensity>> {
        self.realize(u).map(|d| Box::new(d) as Box<dyn ConditionalDensity>)
    }
}

impl ConditionalDensity for Box<dyn ConditionalDensity> {
    fn density(&self, x: f64) -> f64 {
        (**self).density(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn add_density_grid(&self, grid: &[f64], out: &mut [f64]) {
        (**self).add_density_grid(grid, out)
    }
}

/// A model that yields one GLR term per point.
pub trait GlrSampler: Send + Sync {
    fn dim(&self) -> Dim;
    fn realize(&self, u: &mut dyn Coordinates) -> Option<GlrTerm>;
}

/// A model that yields plain output samples X (for the KDE).
pub trait Sampler: Send + Sync {
    fn dim(&self) -> Dim;
    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64>;
}

/// How per-sample sums are normalized into a density estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Denominator {
    /// Plain average over samples.
    One,
    /// Divide by a known mean of the per-sample weight.
    Known(f64),
    /// Ratio of grand sums, with delta-method variance.
    Estimated,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Contribution {
    /// Denominator weight of the sample (1 for plain averages).
    pub weight: f64,
    pub rejected: bool,
}

impl Contribution {
    pub const UNIT: Contribution = Contribution { weight: 1.0, rejected: false };
    pub const REJECTED: Contribution = Contribution { weight: 1.0, rejected: true };
}

/// Object-safe per-sample estimator used by the experiment harness.
///
/// `accumulate` adds a sample's contribution at each (sorted) grid point to
/// `acc[k]` for each of the `outputs()` estimators; `finish` post-processes
/// the per-replication sums once all samples are in.
pub trait Realizer: Send + Sync {
    fn dim(&self) -> Dim;
    fn outputs(&self) -> usize {
        1
    }
    fn denominator(&self) -> Denominator {
        Denominator::One
    }
    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution;
    fn finish(&self, _acc: &mut [Vec<f64>]) {}
}

/// CDE realizer: adds f(x|G) for each sample.
pub struct CdeRealizer<C>(pub C);

impl<C: Conditioning> Realizer for CdeRealizer<C> {
    fn dim(&self) -> Dim {
        self.0.dim()
    }

    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution {
        match self.0.realize(u) {
            Some(d) => {
                d.add_density_grid(grid, &mut acc[0]);
                Contribution::UNIT
            }
            None => Contribution::REJECTED,
        }
    }
}

/// GLRDE realizer. Accumulates Ψ into a difference array (the indicator
/// 1[X ≤ x] is a suffix of the sorted grid) and prefix-sums at the end.
pub struct GlrRealizer<G>(pub G);

impl<G: GlrSampler> Realizer for GlrRealizer<G> {
    fn dim(&self) -> Dim {
        self.0.dim()
    }

    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution {
        match self.0.realize(u) {
            Some(t) => {
                let k = grid.partition_point(|&x| x < t.threshold);
                if k < grid.len() {
                    acc[0][k] += t.psi;
                }
                Contribution::UNIT
            }
            None => Contribution::REJECTED,
        }
    }

    fn finish(&self, acc: &mut [Vec<f64>]) {
        prefix_sum(&mut acc[0]);
    }
}

/// Several CDEs computed from one full sample. Part `l` hides coordinate
/// `hidden[l]` of the full point and reads the others in order.
pub struct ComboRealizer {
    parts: Vec<(Box<dyn DynConditioning>, usize)>,
    full_dim: usize,
}

impl ComboRealizer {
    pub fn new(parts: Vec<(Box<dyn DynConditioning>, usize)>, full_dim: usize) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::invalid("a combination needs at least two conditionings"));
        }
        if full_dim > 32 {
            return Err(Error::invalid("combination supports at most 32 coordinates"));
        }
        for (c, h) in &parts {
            if *h >= full_dim || c.dim() != Dim::Finite(full_dim - 1) {
                return Err(Error::invalid("combination part does not hide exactly one coordinate"));
            }
        }
        Ok(ComboRealizer { parts, full_dim })
    }
}

impl Realizer for ComboRealizer {
    fn dim(&self) -> Dim {
        Dim::Finite(self.full_dim)
    }

    fn outputs(&self) -> usize {
        self.parts.len()
    }

    fn accumulate(&self, u: &mut dyn Coordinates, grid: &[f64], acc: &mut [Vec<f64>]) -> Contribution {
        let mut point = [0.0; 32];
        let point = &mut point[..self.full_dim];
        for v in point.iter_mut() {
            *v = u.next_coord();
        }
        let mut rejected = false;
        for ((c, hidden), out) in self.parts.iter().zip(acc.iter_mut()) {
            let mut cur = SkipCursor::new(point, *hidden);
            match c.realize_dyn(&mut cur) {
                Some(d) => d.add_density_grid(grid, out),
                None => rejected = true,
            }
        }
        Contribution { weight: 1.0, rejected }
    }
}

/// Reads a materialized point, skipping one coordinate.
pub struct SkipCursor<'a> {
    point: &'a [f64],
    skip: usize,
    pos: usize,
}

impl<'a> SkipCursor<'a> {
    pub fn new(point: &'a [f64], skip: usize) -> Self {
        SkipCursor { point, skip, pos: 0 }
    }
}

impl Coordinates for SkipCursor<'_> {
    fn next_coord(&mut self) -> f64 {
        if self.pos == self.skip {
            self.pos += 1;
        }
        let v = self.point[self.pos];
        self.pos += 1;
        v
    }
}

/// Estimator families run by the experiment harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "cde")]
    Cde,
    #[serde(rename = "kde")]
    Kde,
    #[serde(rename = "glrde")]
    Glrde,
    #[serde(rename = "cde-combo")]
    CdeCombo,
}

impl EstimatorKind {
    pub const NAMES: [&'static str; 4] = ["cde", "kde", "glrde", "cde-combo"];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Cde => "cde",
            EstimatorKind::Kde => "kde",
            EstimatorKind::Glrde => "glrde",
            EstimatorKind::CdeCombo => "cde-combo",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .position(|&n| n == s)
            .map(|i| [EstimatorKind::Cde, EstimatorKind::Kde, EstimatorKind::Glrde, EstimatorKind::CdeCombo][i])
            .ok_or_else(|| Error::unknown("estimator", s, &Self::NAMES))
    }
}

pub(crate) fn prefix_sum(v: &mut [f64]) {
    let mut run = 0.0;
    for x in v.iter_mut() {
        run += *x;
        *x = run;
    }
}

/// Average of the realized conditional densities at `x`.
pub fn cde_average<D: ConditionalDensity>(densities: &[D], x: f64) -> Result<f64> {
    if densities.is_empty() {
        return Err(Error::invalid("cde_average needs at least one density"));
    }
    Ok(densities.iter().map(|d| d.density(x)).sum::<f64>() / densities.len() as f64)
}

/// Average of the realized conditional cdfs at `x`.
pub fn cdf_average<D: ConditionalDensity>(densities: &[D], x: f64) -> Result<f64> {
    if densities.is_empty() {
        return Err(Error::invalid("cdf_average needs at least one density"));
    }
    Ok(densities.iter().map(|d| d.cdf(x)).sum::<f64>() / densities.len() as f64)
}
