use super::cursor::{LatticeCursor, ShiftCache};
use super::pointset::{Generator, PointKind, Randomization, RandomizedPointSet};
use super::UniformStream;
use crate::error::{Error, Result};

/// `(u + shift) mod 1`, kept strictly below 1.
#[inline]
pub fn shift_mod1(u: f64, shift: f64) -> f64 {
    let v = u + shift;
    let v = if v >= 1.0 { v - 1.0 } else { v };
    // u + shift can round up to exactly 1.0 when u is just below 1 - shift.
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

/// Baker's (tent) transformation.
#[inline]
pub fn baker(u: f64) -> f64 {
    if u < 0.5 {
        2.0 * u
    } else {
        2.0 - 2.0 * u
    }
}

/// Korobov generating vector `(1, a, a^2, ...) mod n` truncated to `s` coordinates.
pub fn korobov_vector(a: u64, n: u64, s: usize) -> Vec<u64> {
    let mut z = Vec::with_capacity(s);
    let mut cur = 1 % n.max(1);
    for _ in 0..s {
        z.push(cur);
        cur = ((cur as u128 * a as u128) % n as u128) as u64;
    }
    z
}

/// Unrandomized rank-1 lattice: point `i`, coordinate `j` is `(i z_j mod n) / n`.
pub fn rank1_lattice(n: usize, z: &[u64]) -> Result<RandomizedPointSet> {
    if n == 0 {
        return Err(Error::invalid("lattice size must be positive"));
    }
    if z.is_empty() {
        return Err(Error::invalid("generating vector is empty"));
    }
    if let Some(bad) = z.iter().find(|&&zj| zj == 0) {
        return Err(Error::invalid(format!("generating vector entry {bad} must be positive")));
    }
    let s = z.len();
    let nn = n as u128;
    let mut data = Vec::with_capacity(n * s);
    for i in 0..n as u128 {
        for &zj in z {
            data.push(((i * zj as u128) % nn) as f64 / n as f64);
        }
    }
    Ok(RandomizedPointSet::from_parts(
        n,
        s,
        PointKind::LatticeShift,
        Generator::Lattice { z: z.to_vec() },
        Randomization::None,
        data,
    ))
}

/// A Korobov lattice of unbounded dimension, randomized by a lazily drawn shift
/// (and optionally the baker's transformation).
#[derive(Clone, Debug)]
pub struct LazyKorobov {
    n: u64,
    a: u64,
    baker: bool,
    shift: ShiftCache,
}

impl LazyKorobov {
    pub fn new(n: usize, a: u64, baker: bool, stream: Option<UniformStream>) -> Result<Self> {
        super::check_power_of_two(n)?;
        if a == 0 || a >= n as u64 {
            return Err(Error::invalid(format!("Korobov multiplier {a} outside [1, {n})")));
        }
        Ok(LazyKorobov { n: n as u64, a, baker, shift: stream.map(ShiftCache::new).unwrap_or_else(ShiftCache::zero) })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn cursor(&mut self, i: usize) -> LatticeCursor<'_> {
        LatticeCursor::new(self.n, self.a, i as u64, self.baker, &mut self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{random_shift, rng_stream, Coordinates};

    #[test]
    fn korobov_point_arithmetic() {
        let z = korobov_vector(3, 8, 2);
        let p = rank1_lattice(8, &z).unwrap();
        assert_eq!(p.point(5), &[0.625, 0.875]);
        assert_eq!(p.point(0), &[0.0, 0.0]);
    }

    #[test]
    fn diagonal_lattice() {
        let p = rank1_lattice(4, &[1, 1]).unwrap();
        let pts: Vec<_> = (0..4).map(|i| p.point(i).to_vec()).collect();
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.25, 0.25], vec![0.5, 0.5], vec![0.75, 0.75]]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(rank1_lattice(0, &[1]).is_err());
        assert!(rank1_lattice(8, &[1, 0]).is_err());
    }

    #[test]
    fn shift_wraps() {
        assert!((shift_mod1(0.7, 0.6) - 0.3).abs() < 1e-15);
        assert_eq!(shift_mod1(0.7, 0.0), 0.7);
        assert!(shift_mod1(1.0 - 1e-17, 0.5) < 1.0);
    }

    #[test]
    fn baker_values() {
        assert_eq!(baker(0.25), 0.5);
        assert_eq!(baker(0.75), 0.5);
        assert_eq!(baker(0.0), 0.0);
    }

    #[test]
    fn shift_preserves_differences() {
        let p = rank1_lattice(8, &korobov_vector(3, 8, 2)).unwrap();
        let q = random_shift(p.clone(), &mut rng_stream(4, 4));
        for i in 0..8 {
            for k in 0..8 {
                for j in 0..2 {
                    let d0 = (p.point(i)[j] - p.point(k)[j]).rem_euclid(1.0);
                    let d1 = (q.point(i)[j] - q.point(k)[j]).rem_euclid(1.0);
                    let diff = (d0 - d1).abs();
                    assert!(diff < 1e-12 || (1.0 - diff) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lazy_matches_materialized() {
        let n = 16;
        let mut lazy = LazyKorobov::new(n, 5, false, None).unwrap();
        let p = rank1_lattice(n, &korobov_vector(5, n as u64, 6)).unwrap();
        for i in 0..n {
            let mut c = lazy.cursor(i);
            for j in 0..6 {
                assert_eq!(c.next_coord(), p.point(i)[j]);
            }
        }
    }
}
