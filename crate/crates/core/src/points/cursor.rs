use super::lattice::{baker, shift_mod1};
use super::UniformStream;

/// A source of successive coordinates of one point in [0, 1)^s (or [0, 1]
/// after a baker transformation). Models pull as many coordinates as they need.
pub trait Coordinates {
    fn next_coord(&mut self) -> f64;
}

/// Cursor over a materialized point.
pub struct SliceCursor<'a> {
    point: &'a [f64],
    pos: usize,
}

impl<'a> SliceCursor<'a> {
    pub fn new(point: &'a [f64]) -> Self {
        SliceCursor { point, pos: 0 }
    }
}

impl Coordinates for SliceCursor<'_> {
    #[inline]
    fn next_coord(&mut self) -> f64 {
        let v = self.point[self.pos];
        self.pos += 1;
        v
    }
}

/// Lazily drawn shift coordinates, cached so every point of a randomization
/// sees the same shift. A cache without a stream is the zero shift.
#[derive(Clone, Debug)]
pub struct ShiftCache {
    stream: Option<UniformStream>,
    values: Vec<f64>,
}

impl ShiftCache {
    pub fn new(stream: UniformStream) -> Self {
        ShiftCache { stream: Some(stream), values: Vec::new() }
    }

    pub fn zero() -> Self {
        ShiftCache { stream: None, values: Vec::new() }
    }

    #[inline]
    pub fn get(&mut self, j: usize) -> f64 {
        let Some(stream) = self.stream.as_mut() else {
            return 0.0;
        };
        while self.values.len() <= j {
            self.values.push(stream.uniform());
        }
        self.values[j]
    }
}

/// Cursor over point `i` of a Korobov lattice with unbounded dimension.
pub struct LatticeCursor<'a> {
    n: u64,
    a: u64,
    i: u64,
    z: u64,
    j: usize,
    baker: bool,
    shift: &'a mut ShiftCache,
}

impl<'a> LatticeCursor<'a> {
    pub(crate) fn new(n: u64, a: u64, i: u64, baker: bool, shift: &'a mut ShiftCache) -> Self {
        LatticeCursor { n, a, i, z: 1, j: 0, baker, shift }
    }
}

impl Coordinates for LatticeCursor<'_> {
    #[inline]
    fn next_coord(&mut self) -> f64 {
        let base = ((self.i as u128 * self.z as u128) % self.n as u128) as f64 / self.n as f64;
        let mut u = shift_mod1(base, self.shift.get(self.j));
        if self.baker {
            u = baker(u);
        }
        self.j += 1;
        self.z = ((self.z as u128 * self.a as u128) % self.n as u128) as u64;
        u
    }
}
