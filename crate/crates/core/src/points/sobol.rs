//! Sobol' points from a bundled Joe–Kuo direction-number table, with left
//! matrix scrambling (LMS) and a random digital shift.

use std::sync::OnceLock;

use super::pointset::{Generator, PointKind, Randomization, RandomizedPointSet};
use super::UniformStream;
use crate::error::{Error, Result};

/// Output precision of the digital net, in bits.
pub const SOBOL_BITS: usize = 31;

const BUNDLED_TABLE: &str = include_str!("../../data/new-joe-kuo-64.txt");

/// Primitive-polynomial parameters per dimension, in Joe–Kuo text format
/// (`d s a m_1 .. m_s`, one dimension per line, header line first).
/// Dimension 1 is implicit (van der Corput).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTable {
    entries: Vec<(u32, u32, Vec<u32>)>,
}

impl DirectionTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('d') || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::invalid(format!("direction table line {}: {msg}", lineno + 1));
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| bad(&format!("non-integer field `{t}`"))))
                .collect::<Result<_>>()?;
            if fields.len() < 3 {
                return Err(bad("expected `d s a m_1 .. m_s`"));
            }
            let (d, s, a) = (fields[0], fields[1], fields[2]);
            if d as usize != entries.len() + 2 {
                return Err(bad(&format!("dimension {d} out of sequence")));
            }
            if s == 0 || s as usize >= SOBOL_BITS {
                return Err(bad(&format!("degree {s} unsupported")));
            }
            if a >= 1 << (s - 1) {
                return Err(bad(&format!("coefficient code {a} too large for degree {s}")));
            }
            let m = &fields[3..];
            if m.len() != s as usize {
                return Err(bad(&format!("expected {s} initial numbers, found {}", m.len())));
            }
            for (k, &mk) in m.iter().enumerate() {
                if mk % 2 == 0 || mk >= 1 << (k + 1) {
                    return Err(bad(&format!("initial number m_{} = {mk} must be odd and < 2^{}", k + 1, k + 1)));
                }
            }
            entries.push((s as u32, a as u32, m.iter().map(|&v| v as u32).collect()));
        }
        Ok(DirectionTable { entries })
    }

    /// The table shipped with the crate (64 dimensions).
    pub fn bundled() -> &'static DirectionTable {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| DirectionTable::parse(BUNDLED_TABLE).expect("bundled direction table is valid"))
    }

    pub fn max_dim(&self) -> usize {
        self.entries.len() + 1
    }

    /// Generating-matrix columns for dimension `j` (0-based), most significant digit first.
    pub fn directions(&self, j: usize) -> [u32; SOBOL_BITS] {
        let mut v = [0u32; SOBOL_BITS];
        if j == 0 {
            for (c, vc) in v.iter_mut().enumerate() {
                *vc = 1 << (SOBOL_BITS - 1 - c);
            }
            return v;
        }
        let (s, a, m) = &self.entries[j - 1];
        let s = *s as usize;
        for c in 0..s {
            v[c] = m[c] << (SOBOL_BITS - 1 - c);
        }
        for c in s..SOBOL_BITS {
            let mut val = v[c - s] ^ (v[c - s] >> s);
            for k in 1..s {
                if (a >> (s - 1 - k)) & 1 == 1 {
                    val ^= v[c - k];
                }
            }
            v[c] = val;
        }
        v
    }
}

/// Left matrix scramble (one lower-triangular unit-diagonal binary matrix per
/// coordinate, stored as row masks) plus a digital shift per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct LmsScramble {
    pub rows: Vec<Vec<u32>>,
    pub digital_shift: Vec<u32>,
}

impl LmsScramble {
    pub fn identity(s: usize) -> Self {
        let rows = (0..s).map(|_| (0..SOBOL_BITS).map(|r| 1u32 << (SOBOL_BITS - 1 - r)).collect()).collect();
        LmsScramble { rows, digital_shift: vec![0; s] }
    }

    pub fn random(s: usize, stream: &mut UniformStream) -> Self {
        let full: u32 = (1u32 << SOBOL_BITS) - 1;
        let mut rows = Vec::with_capacity(s);
        for _ in 0..s {
            let mut m = Vec::with_capacity(SOBOL_BITS);
            for r in 0..SOBOL_BITS {
                // Row r keeps digits 0..r (bit positions 30 down to 30 - r) with digit r fixed to 1.
                let diag = 1u32 << (SOBOL_BITS - 1 - r);
                let below_mask = full & !((diag << 1).wrapping_sub(1));
                m.push((stream.next_u32() & below_mask) | diag);
            }
            rows.push(m);
        }
        let digital_shift = (0..s).map(|_| stream.next_u32() & full).collect();
        LmsScramble { rows, digital_shift }
    }

    fn apply(rows: &[u32], v: u32) -> u32 {
        let mut out = 0u32;
        for (r, &row) in rows.iter().enumerate() {
            if (row & v).count_ones() & 1 == 1 {
                out |= 1 << (SOBOL_BITS - 1 - r);
            }
        }
        out
    }
}

fn generate(n: usize, s: usize, scramble: &LmsScramble, table: &DirectionTable) -> Result<Vec<f64>> {
    super::check_power_of_two(n)?;
    if s == 0 || s > table.max_dim() {
        return Err(Error::invalid(format!("Sobol' dimension {s} outside [1, {}]", table.max_dim())));
    }
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    let dirs: Vec<[u32; SOBOL_BITS]> = (0..s)
        .map(|j| {
            let mut d = table.directions(j);
            for v in d.iter_mut() {
                *v = LmsScramble::apply(&scramble.rows[j], *v);
            }
            d
        })
        .collect();
    let mut state = vec![0u32; s];
    let mut data = Vec::with_capacity(n * s);
    for i in 0..n {
        if i > 0 {
            let c = i.trailing_zeros() as usize;
            for (x, d) in state.iter_mut().zip(&dirs) {
                *x ^= d[c];
            }
        }
        for (x, sh) in state.iter().zip(&scramble.digital_shift) {
            data.push((x ^ sh) as f64 * scale);
        }
    }
    Ok(data)
}

/// First `n` Sobol' points in Gray-code order, no randomization.
pub fn sobol_points(n: usize, s: usize) -> Result<RandomizedPointSet> {
    sobol_scrambled(n, s, &LmsScramble::identity(s))
}

/// Sobol' points under an explicit scramble.
pub fn sobol_scrambled(n: usize, s: usize, scramble: &LmsScramble) -> Result<RandomizedPointSet> {
    if scramble.rows.len() < s || scramble.digital_shift.len() < s {
        return Err(Error::invalid("scramble dimension smaller than point dimension"));
    }
    let data = generate(n, s, scramble, DirectionTable::bundled())?;
    Ok(RandomizedPointSet::from_parts(
        n,
        s,
        PointKind::SobolLms,
        Generator::Sobol { dims: s },
        Randomization::Lms { rows: scramble.rows[..s].to_vec(), digital_shift: scramble.digital_shift[..s].to_vec() },
        data,
    ))
}

/// Sobol' points with a random left matrix scramble and random digital shift.
pub fn sobol_lms_shift(n: usize, s: usize, stream: &mut UniformStream) -> Result<RandomizedPointSet> {
    super::check_power_of_two(n)?;
    if s == 0 || s > DirectionTable::bundled().max_dim() {
        return Err(Error::invalid(format!(
            "Sobol' dimension {s} outside [1, {}]",
            DirectionTable::bundled().max_dim()
        )));
    }
    let scramble = LmsScramble::random(s, stream);
    sobol_scrambled(n, s, &scramble)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::rng_stream;

    // First 32 unscrambled points times 32, dimensions 1..12, from an
    // independent reference implementation driven by the same Joe–Kuo table.
    const REFERENCE_X32: [[u32; 12]; 32] = [
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [16, 16, 16, 16, 16, 16, 16, 16, 16, 16, 16, 16],
        [24, 8, 8, 8, 24, 24, 8, 24, 24, 24, 24, 24],
        [8, 24, 24, 24, 8, 8, 24, 8, 8, 8, 8, 8],
        [12, 12, 20, 28, 12, 4, 12, 28, 28, 20, 28, 12],
        [28, 28, 4, 12, 28, 20, 28, 12, 12, 4, 12, 28],
        [20, 4, 28, 20, 20, 28, 4, 4, 4, 12, 4, 20],
        [4, 20, 12, 4, 4, 12, 20, 20, 20, 28, 20, 4],
        [6, 10, 30, 14, 18, 10, 14, 30, 30, 10, 22, 2],
        [22, 26, 14, 30, 2, 26, 30, 14, 14, 26, 6, 18],
        [30, 2, 22, 6, 10, 18, 6, 6, 6, 18, 14, 26],
        [14, 18, 6, 22, 26, 2, 22, 22, 22, 2, 30, 10],
        [10, 6, 10, 18, 30, 14, 2, 2, 2, 30, 10, 14],
        [26, 22, 26, 2, 14, 30, 18, 18, 18, 14, 26, 30],
        [18, 14, 2, 26, 6, 22, 10, 26, 26, 6, 18, 22],
        [2, 30, 18, 10, 22, 6, 26, 10, 10, 22, 2, 6],
        [3, 15, 15, 21, 9, 31, 17, 27, 15, 5, 3, 13],
        [19, 31, 31, 5, 25, 15, 1, 11, 31, 21, 19, 29],
        [27, 7, 7, 29, 17, 7, 25, 3, 23, 29, 27, 21],
        [11, 23, 23, 13, 1, 23, 9, 19, 7, 13, 11, 5],
        [15, 3, 27, 9, 5, 27, 29, 7, 19, 17, 31, 1],
        [31, 19, 11, 25, 21, 11, 13, 23, 3, 1, 15, 17],
        [23, 11, 19, 1, 29, 3, 21, 31, 11, 9, 7, 25],
        [7, 27, 3, 17, 13, 19, 5, 15, 27, 25, 23, 9],
        [5, 5, 17, 27, 27, 21, 31, 5, 17, 15, 21, 15],
        [21, 21, 1, 11, 11, 5, 15, 21, 1, 31, 5, 31],
        [29, 13, 25, 19, 3, 13, 23, 29, 9, 23, 13, 23],
        [13, 29, 9, 3, 19, 29, 7, 13, 25, 7, 29, 7],
        [9, 9, 5, 7, 23, 17, 19, 25, 13, 27, 9, 3],
        [25, 25, 21, 23, 7, 1, 3, 9, 29, 11, 25, 19],
        [17, 1, 13, 15, 15, 9, 27, 1, 21, 3, 17, 27],
        [1, 17, 29, 31, 31, 25, 11, 17, 5, 19, 1, 11],
    ];

    #[test]
    fn bundled_table_has_64_dims() {
        assert_eq!(DirectionTable::bundled().max_dim(), 64);
    }

    #[test]
    fn first_dimension_prefix() {
        let p = sobol_points(4, 1).unwrap();
        let v: Vec<f64> = p.column(0).collect();
        assert_eq!(v, vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn matches_reference_points() {
        let p = sobol_points(32, 12).unwrap();
        for (i, row) in REFERENCE_X32.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(p.point(i)[j], v as f64 / 32.0, "point {i} dim {j}");
            }
        }
    }

    #[test]
    fn identity_scramble_is_unscrambled() {
        let a = sobol_points(64, 5).unwrap();
        let b = sobol_scrambled(64, 5, &LmsScramble::identity(5)).unwrap();
        for i in 0..64 {
            assert_eq!(a.point(i), b.point(i));
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut s = rng_stream(0, 0);
        assert!(sobol_lms_shift(12, 2, &mut s).is_err());
        assert!(sobol_lms_shift(16, 65, &mut s).is_err());
        assert!(sobol_lms_shift(16, 0, &mut s).is_err());
    }

    #[test]
    fn randomized_coordinate_means() {
        let n = 1 << 14;
        let p = sobol_lms_shift(n, 6, &mut rng_stream(5, 1)).unwrap();
        for j in 0..6 {
            let mean = p.column(j).sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < 0.012, "dim {j} mean {mean}");
        }
    }

    #[test]
    fn scrambled_net_stays_a_net() {
        // LMS preserves the (t, m, s)-net property: every 1-D dyadic interval of
        // length 1/n holds exactly one point.
        let n = 256;
        let p = sobol_lms_shift(n, 4, &mut rng_stream(8, 8)).unwrap();
        for j in 0..4 {
            let mut seen = vec![0u32; n];
            for u in p.column(j) {
                seen[(u * n as f64) as usize] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn two_dim_elementary_intervals() {
        for k in 1..=6 {
            let n = 1usize << k;
            let p = sobol_points(n, 2).unwrap();
            for d1 in 0..=k {
                let (c1, c2) = (1usize << d1, 1usize << (k - d1));
                let mut boxes = vec![0u32; n];
                for i in 0..n {
                    let x = p.point(i);
                    let (b1, b2) = ((x[0] * c1 as f64) as usize, (x[1] * c2 as f64) as usize);
                    boxes[b1 * c2 + b2] += 1;
                }
                assert!(boxes.iter().all(|&c| c == 1), "k={k} split={d1}");
            }
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(DirectionTable::parse("d s a m\n2 1 0 2\n").is_err());
        assert!(DirectionTable::parse("2 1 0 x\n").is_err());
        assert!(DirectionTable::parse("3 1 0 1\n").is_err());
        assert!(DirectionTable::parse("2 2 1 1\n").is_err());
        assert_eq!(DirectionTable::parse("").unwrap().max_dim(), 1);
    }
}
