use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorKind;
use crate::models::ModelConfig;
use crate::points::{GeneratingVector, MeritWeights, PointKind};

pub const DESK_SIZES: [usize; 6] = [1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14, 1 << 15];
pub const FULL_SIZES: [usize; 6] = [1 << 14, 1 << 15, 1 << 16, 1 << 17, 1 << 18, 1 << 19];
pub const DESK_REPS: usize = 50;
pub const FULL_REPS: usize = 100;

/// Lattice parameters: explicit generators per size, else a Korobov search
/// under the P₂ criterion with weights rho^|v| on projections up to `max_order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub table: Vec<GeneratingVector>,
    pub rho: f64,
    pub max_order: usize,
    /// Dimension used to score Korobov candidates for unbounded-dimension models.
    pub search_dim: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { table: Vec::new(), rho: 0.6, max_order: 3, search_dim: 32 }
    }
}

impl LatticeConfig {
    pub fn weights(&self) -> Result<MeritWeights> {
        MeritWeights::new(self.rho, self.max_order)
    }

    pub fn lookup(&self, n: usize) -> Option<&GeneratingVector> {
        self.table.iter().find(|g| g.n == n as u64)
    }
}

/// CDE run used as the reference density for KDE MISE when the model has no closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    /// CDE variant; the model's first one when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub pointset: PointKind,
    pub n: usize,
    pub n_r: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig { variant: None, pointset: PointKind::LatticeShiftBaker, n: 1 << 18, n_r: 10 }
    }
}

fn default_n_e() -> usize {
    128
}

fn default_seed() -> u64 {
    1
}

fn default_pointset() -> PointKind {
    PointKind::Mc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Conditioning or GLR variant; `all` or `a+b` for combinations. Defaults to the model's first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub estimator: EstimatorKind,
    #[serde(default = "default_pointset")]
    pub pointset: PointKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    /// Full-scale sizes and replication count when `n` / `n_r` are not given.
    #[serde(default)]
    pub full: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(default = "default_n_e")]
    pub n_e: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    /// Fixed KDE bandwidth; Silverman's rule per replication when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, estimator: EstimatorKind) -> Self {
        ExperimentConfig {
            model,
            variant: None,
            estimator,
            pointset: PointKind::Mc,
            n: None,
            full: false,
            n_r: None,
            n_e: default_n_e(),
            seed: default_seed(),
            interval: None,
            lattice: LatticeConfig::default(),
            bandwidth: None,
            reference: ReferenceConfig::default(),
            output: None,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        match &self.n {
            Some(n) => n.clone(),
            None if self.full => FULL_SIZES.to_vec(),
            None => DESK_SIZES.to_vec(),
        }
    }

    pub fn reps(&self) -> usize {
        self.n_r.unwrap_or(if self.full { FULL_REPS } else { DESK_REPS })
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = self.sizes();
        if sizes.is_empty() {
            return Err(Error::invalid("`n` must list at least one size"));
        }
        if let Some(bad) = sizes.iter().find(|n| !n.is_power_of_two()) {
            return Err(Error::invalid(format!("`n` entries must be powers of 2, got {bad}")));
        }
        if self.reps() < 2 {
            return Err(Error::invalid(format!("`n_r` must be at least 2, got {}", self.reps())));
        }
        if self.n_e == 0 {
            return Err(Error::invalid("`n_e` must be at least 1"));
        }
        if let Some([a, b]) = self.interval {
            if !(a < b) {
                return Err(Error::invalid(format!("`interval` needs a < b, got [{a}, {b}]")));
            }
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid(format!("`bandwidth` must be positive, got {h}")));
            }
        }
        for g in &self.lattice.table {
            g.validate()?;
        }
        self.lattice.weights()?;
        if self.lattice.search_dim == 0 {
            return Err(Error::invalid("`lattice.search_dim` must be at least 1"));
        }
        if self.reference.n == 0 || !self.reference.n.is_power_of_two() || self.reference.n_r == 0 {
            return Err(Error::invalid("`reference` needs a power-of-2 `n` and `n_r` >= 1"));
        }
        let model = self.model.build()?;
        let variant = super::run::resolve_variant(model.as_ref(), self)?;
        match self.estimator {
            EstimatorKind::Kde => model.sampler().map(drop),
            kind => model.realizer(kind, &variant).map(drop),
        }
    }
}

/// Parses one config object or an array of them.
pub fn parse_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    let configs: Vec<ExperimentConfig> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text)?
    } else {
        vec![serde_json::from_str(text)?]
    };
    if configs.is_empty() {
        return Err(Error::invalid("config array is empty"));
    }
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

pub fn read_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_configs(&text)
}
