//! Uniform streams and MC / RQMC point sets.
//!
//! Everything here is pure given `(seed, stream_id, parameters)`: the same inputs
//! always produce bit-identical points.

mod cursor;
mod genvec;
mod lattice;
mod merit;
mod pointset;
mod sobol;
mod stream;

pub use cursor::{Coordinates, LatticeCursor, ShiftCache, SliceCursor};
pub use genvec::GeneratingVector;
pub use lattice::{baker, korobov_vector, rank1_lattice, shift_mod1, LazyKorobov};
pub use merit::{korobov_search, korobov_search_limited, p_alpha_merit, MeritWeights};
pub use pointset::{baker_transform, mc_points, random_shift, Generator, PointKind, Randomization, RandomizedPointSet};
pub use sobol::{sobol_lms_shift, sobol_points, sobol_scrambled, DirectionTable, LmsScramble, SOBOL_BITS};
pub use stream::{rng_stream, UniformStream};

pub(crate) fn check_power_of_two(n: usize) -> crate::Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(crate::Error::invalid(format!("point count must be a power of 2, got {n}")));
    }
    Ok(())
}
