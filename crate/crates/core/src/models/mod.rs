//! Simulation models. Each maps a point of the unit cube to a conditional
//! density (one per named conditioning variant), and optionally to GLR terms
//! or plain output samples.

pub mod asian;
pub mod buckling;
pub mod cantilever;
pub mod dist;
pub mod failure;
pub mod hypoexp;
pub mod queue;
pub mod san;
pub mod sum_normals;
pub mod sum_uniforms;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{ComboRealizer, DynConditioning, EstimatorKind, Realizer, Sampler};

pub use asian::{Asian, AsianParams};
pub use buckling::{Buckling, BucklingParams};
pub use cantilever::{Cantilever, CantileverParams};
pub use dist::Law;
pub use failure::{Failure, FailureSpec, Structure};
pub use hypoexp::{hypoexp_cdf, hypoexp_density, HypoMethod, Hypoexp};
pub use queue::{Queue, QueueParams, Trajectory};
pub use san::{San, SanGraph};
pub use sum_normals::SumNormals;
pub use sum_uniforms::SumUniforms;

/// A model usable by the experiment harness.
pub trait DensityModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn interval(&self) -> (f64, f64);
    fn cde_variants(&self) -> Vec<String>;

    fn glr_variants(&self) -> Vec<String> {
        Vec::new()
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>>;
    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>>;

    fn glrde(&self, _variant: &str) -> Result<Box<dyn Realizer>> {
        Err(Error::Unsupported { model: self.name().into(), kind: "glrde".into() })
    }

    /// For a combinable CDE variant: (hidden coordinate, full dimension).
    fn combo_hidden(&self, _variant: &str) -> Option<(usize, usize)> {
        None
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Err(Error::Unsupported { model: self.name().into(), kind: "kde".into() })
    }

    fn exact_density(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Builds the per-sample realizer for an estimator. For `cde-combo` the
    /// variant is `all` or a `+`-separated list of CDE variants.
    fn realizer(&self, kind: EstimatorKind, variant: &str) -> Result<Box<dyn Realizer>> {
        match kind {
            EstimatorKind::Cde => self.cde(variant),
            EstimatorKind::Glrde => self.glrde(variant),
            EstimatorKind::Kde => Err(Error::invalid("the KDE consumes plain samples; use sampler()")),
            EstimatorKind::CdeCombo => {
                let names: Vec<String> = if variant == "all" {
                    self.cde_variants().into_iter().filter(|v| self.combo_hidden(v).is_some()).collect()
                } else {
                    variant.split('+').map(str::to_string).collect()
                };
                let mut parts = Vec::with_capacity(names.len());
                let mut full = None;
                for v in &names {
                    let (hidden, d) = self.combo_hidden(v).ok_or_else(|| Error::Unsupported {
                        model: self.name().into(),
                        kind: format!("combination with variant `{v}`"),
                    })?;
                    if full.is_some_and(|f| f != d) {
                        return Err(Error::invalid("combined variants disagree on the model dimension"));
                    }
                    full = Some(d);
                    parts.push((self.conditioning(v)?, hidden));
                }
                Ok(Box::new(ComboRealizer::new(parts, full.unwrap_or(0))?))
            }
        }
    }

    /// Variant names valid for an estimator.
    fn variants(&self, kind: EstimatorKind) -> Vec<String> {
        match kind {
            EstimatorKind::Cde => self.cde_variants(),
            EstimatorKind::Glrde => self.glr_variants(),
            EstimatorKind::Kde => vec!["plain".into()],
            EstimatorKind::CdeCombo => vec!["all".into()],
        }
    }
}

/// Parses `{prefix}{k}` with 1 ≤ k ≤ d and returns k − 1.
pub(crate) fn parse_index(_model: &str, variant: &str, prefix: &str, d: usize) -> Result<usize> {
    variant
        .strip_prefix(prefix)
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| (1..=d).contains(&k))
        .map(|k| k - 1)
        .ok_or_else(|| Error::UnknownOption {
            field: "variant",
            value: variant.into(),
            options: (1..=d).map(|k| format!("{prefix}{k}")).collect::<Vec<_>>().join(", "),
        })
}

pub(crate) fn unknown_variant(variant: &str, options: &[String]) -> Error {
    Error::UnknownOption { field: "variant", value: variant.into(), options: options.join(", ") }
}

fn default_eps() -> f64 {
    0.75
}

/// Model section of an experiment config, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    SumNormals {
        a: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<[f64; 2]>,
    },
    SumUniforms {
        #[serde(default = "default_eps")]
        eps: f64,
    },
    Cantilever(CantileverParams),
    San(SanGraph),
    Queue(QueueParams),
    Asian(AsianParams),
    Buckling(BucklingParams),
    Failure(FailureSpec),
}

impl ModelConfig {
    pub const KINDS: [&'static str; 8] =
        ["sum-normals", "sum-uniforms", "cantilever", "san", "queue", "asian", "buckling", "failure"];

    pub fn build(&self) -> Result<Box<dyn DensityModel>> {
        Ok(match self {
            ModelConfig::SumNormals { a, interval } => {
                let m = SumNormals::new(a.clone())?;
                Box::new(match interval {
                    Some([lo, hi]) if lo < hi => m.with_interval(*lo, *hi),
                    Some(_) => return Err(Error::invalid("interval must satisfy a < b")),
                    None => m,
                })
            }
            ModelConfig::SumUniforms { eps } => Box::new(SumUniforms::new(*eps)?),
            ModelConfig::Cantilever(p) => Box::new(Cantilever::new(p.clone())?),
            ModelConfig::San(g) => Box::new(San::new(g.clone())?),
            ModelConfig::Queue(p) => Box::new(Queue::new(p.clone())?),
            ModelConfig::Asian(p) => Box::new(Asian::new(p.clone())?),
            ModelConfig::Buckling(p) => Box::new(Buckling::new(p.clone())?),
            ModelConfig::Failure(s) => Box::new(Failure::new(s.clone())?),
        })
    }
}
