use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lattice::{baker, shift_mod1};
use super::UniformStream;
use crate::error::{Error, Result};

/// The four sampling schemes compared throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointKind {
    #[serde(rename = "mc")]
    Mc,
    #[serde(rename = "lat-s")]
    LatticeShift,
    #[serde(rename = "lat-s-b")]
    LatticeShiftBaker,
    #[serde(rename = "sobol-lms")]
    SobolLms,
}

impl PointKind {
    pub const NAMES: [&'static str; 4] = ["mc", "lat-s", "lat-s-b", "sobol-lms"];

    pub fn name(self) -> &'static str {
        match self {
            PointKind::Mc => "mc",
            PointKind::LatticeShift => "lat-s",
            PointKind::LatticeShiftBaker => "lat-s-b",
            PointKind::SobolLms => "sobol-lms",
        }
    }

    pub fn is_lattice(self) -> bool {
        matches!(self, PointKind::LatticeShift | PointKind::LatticeShiftBaker)
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(PointKind::Mc),
            "lat-s" => Ok(PointKind::LatticeShift),
            "lat-s-b" => Ok(PointKind::LatticeShiftBaker),
            "sobol-lms" => Ok(PointKind::SobolLms),
            other => Err(Error::unknown("point set kind", other, &Self::NAMES)),
        }
    }
}

/// Structural parameters of a point set.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    None,
    Lattice { z: Vec<u64> },
    Sobol { dims: usize },
}

/// How a structural point set was randomized, kept so points can be re-derived.
#[derive(Clone, Debug, PartialEq)]
pub enum Randomization {
    None,
    Mc { seed: u64, stream_id: u64 },
    Shift(Vec<f64>),
    ShiftBaker(Vec<f64>),
    Lms { rows: Vec<Vec<u32>>, digital_shift: Vec<u32> },
}

/// An `n x s` array of points plus the recipe that produced it. Row-major.
#[derive(Clone, Debug)]
pub struct RandomizedPointSet {
    n: usize,
    s: usize,
    kind: PointKind,
    generator: Generator,
    randomization: Randomization,
    data: Vec<f64>,
}

impl RandomizedPointSet {
    pub(crate) fn from_parts(
        n: usize,
        s: usize,
        kind: PointKind,
        generator: Generator,
        randomization: Randomization,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), n * s);
        RandomizedPointSet { n, s, kind, generator, randomization, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn randomization(&self) -> &Randomization {
        &self.randomization
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.s..(i + 1) * self.s]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.s)
    }

    /// Coordinate `j` of every point.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.s).copied()
    }

    /// Applies an explicit shift vector (length `s`) modulo 1.
    pub fn shifted(mut self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.s, "shift dimension mismatch");
        for row in self.data.chunks_exact_mut(self.s) {
            for (u, &sh) in row.iter_mut().zip(shift) {
                *u = shift_mod1(*u, sh);
            }
        }
        self.randomization = Randomization::Shift(shift.to_vec());
        self
    }
}

/// `n` i.i.d. uniform points in [0,1)^s.
pub fn mc_points(n: usize, s: usize, stream: &mut UniformStream) -> Result<RandomizedPointSet> {
    if n == 0 || s == 0 {
        return Err(Error::invalid(format!("MC point set needs n >= 1 and s >= 1, got n={n}, s={s}")));
    }
    let randomization = Randomization::Mc { seed: stream.seed(), stream_id: stream.stream_id() };
    let data = (0..n * s).map(|_| stream.uniform()).collect();
    Ok(RandomizedPointSet::from_parts(n, s, PointKind::Mc, Generator::None, randomization, data))
}

/// Random shift modulo 1, one uniform per coordinate.
pub fn random_shift(pts: RandomizedPointSet, stream: &mut UniformStream) -> RandomizedPointSet {
    let shift: Vec<f64> = (0..pts.dim()).map(|_| stream.uniform()).collect();
    pts.shifted(&shift)
}

/// Baker's transformation of every coordinate; applied after shifting.
pub fn baker_transform(mut pts: RandomizedPointSet) -> RandomizedPointSet {
    for u in pts.data.iter_mut() {
        *u = baker(*u);
    }
    pts.kind = PointKind::LatticeShiftBaker;
    pts.randomization = match pts.randomization {
        Randomization::Shift(s) => Randomization::ShiftBaker(s),
        other => other,
    };
    pts
}
