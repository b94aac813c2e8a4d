//! Per-replication point sources. RQMC sources share one structural point
//! set per size and draw a fresh randomization per replication.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::config::LatticeConfig;
use crate::error::{Error, Result};
use crate::estimator::Dim;
use crate::points::{
    baker, korobov_search_limited, korobov_vector, rank1_lattice, shift_mod1, sobol_lms_shift, Coordinates,
    LazyKorobov, PointKind, RandomizedPointSet, SliceCursor, UniformStream,
};

/// Work cap for one Korobov search: candidates × n × s × order.
const SEARCH_BUDGET: f64 = 4e8;

type SearchKey = (usize, usize, u64, usize);

fn search_cache() -> &'static Mutex<HashMap<SearchKey, u64>> {
    static CACHE: OnceLock<Mutex<HashMap<SearchKey, u64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Korobov parameter for `(n, s)`, from the search cache or a budgeted search.
pub fn korobov_parameter(n: usize, s: usize, lattice: &LatticeConfig) -> Result<u64> {
    let w = lattice.weights()?;
    let order = w.max_order.min(s);
    let key = (n, s, lattice.rho.to_bits(), order);
    if let Some(&a) = search_cache().lock().expect("search cache poisoned").get(&key) {
        return Ok(a);
    }
    let per = n as f64 * s as f64 * order as f64;
    let max_candidates = ((SEARCH_BUDGET / per) as usize).max(16);
    if max_candidates < n / 4 {
        log::info!("Korobov search n={n} s={s}: scoring {max_candidates} of {} candidates", n / 4);
    }
    let a = korobov_search_limited(n, s, &w, max_candidates)?;
    search_cache().lock().expect("search cache poisoned").insert(key, a);
    Ok(a)
}

/// The structural part of a point set for one size.
pub enum PointPlan {
    Mc { n: usize },
    Lattice { points: RandomizedPointSet, baker: bool },
    LazyLattice { n: usize, a: u64, baker: bool },
    Sobol { n: usize, s: usize },
}

impl PointPlan {
    pub fn new(kind: PointKind, dim: Dim, n: usize, lattice: &LatticeConfig) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("point count must be a power of 2, got {n}")));
        }
        let baker = kind == PointKind::LatticeShiftBaker;
        match (kind, dim) {
            (PointKind::Mc, _) => Ok(PointPlan::Mc { n }),
            (PointKind::SobolLms, Dim::Finite(s)) => Ok(PointPlan::Sobol { n, s }),
            (PointKind::SobolLms, Dim::Unbounded) => Err(Error::Unsupported {
                model: "unbounded-dimension models".into(),
                kind: "sobol-lms (the direction table bounds the dimension; use lat-s or mc)".into(),
            }),
            (_, Dim::Finite(s)) => {
                let z = match lattice.lookup(n) {
                    Some(g) => g.vector(s)?,
                    None if n < 8 || s == 1 => korobov_vector(1, n as u64, s),
                    None => korobov_vector(korobov_parameter(n, s, lattice)?, n as u64, s),
                };
                Ok(PointPlan::Lattice { points: rank1_lattice(n, &z)?, baker })
            }
            (_, Dim::Unbounded) => {
                let a = match lattice.lookup(n) {
                    Some(g) => g.korobov_a().ok_or_else(|| {
                        Error::invalid(format!(
                            "lattice table entry for n={n} needs a Korobov `a` for an unbounded dimension"
                        ))
                    })?,
                    None if n < 8 => 1,
                    None => korobov_parameter(n, lattice.search_dim, lattice)?,
                };
                Ok(PointPlan::LazyLattice { n, a, baker })
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PointPlan::Mc { n } | PointPlan::LazyLattice { n, .. } | PointPlan::Sobol { n, .. } => *n,
            PointPlan::Lattice { points, .. } => points.n(),
        }
    }

    /// Runs `f` on every point of one randomization drawn from `stream`.
    pub fn for_each(&self, mut stream: UniformStream, f: &mut dyn FnMut(&mut dyn Coordinates)) -> Result<()> {
        match self {
            PointPlan::Mc { n } => {
                for _ in 0..*n {
                    f(&mut stream);
                }
            }
            PointPlan::Lattice { points, baker } => {
                let shift: Vec<f64> = (0..points.dim()).map(|_| stream.uniform()).collect();
                for p in points.points() {
                    f(&mut ShiftedCursor { point: p, shift: &shift, baker: *baker, pos: 0 });
                }
            }
            PointPlan::LazyLattice { n, a, baker } => {
                let mut lattice = LazyKorobov::new(*n, *a, *baker, Some(stream))?;
                for i in 0..*n {
                    f(&mut lattice.cursor(i));
                }
            }
            PointPlan::Sobol { n, s } => {
                let points = sobol_lms_shift(*n, *s, &mut stream)?;
                for p in points.points() {
                    f(&mut SliceCursor::new(p));
                }
            }
        }
        Ok(())
    }
}

/// A lattice point read through a random shift (and the baker's map).
struct ShiftedCursor<'a> {
    point: &'a [f64],
    shift: &'a [f64],
    baker: bool,
    pos: usize,
}

impl Coordinates for ShiftedCursor<'_> {
    #[inline]
    fn next_coord(&mut self) -> f64 {
        let u = shift_mod1(self.point[self.pos], self.shift[self.pos]);
        self.pos += 1;
        if self.baker {
            baker(u)
        } else {
            u
        }
    }
}
