use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice generator for a fixed size `n`, given either as an explicit vector
/// `z` or as a Korobov parameter `a` (z = 1, a, a² mod n, ...).
///
/// JSON forms: `{"n": 1024, "z": [1, 389, ...]}` or `{"n": 1024, "a": 389}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratingVector {
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
}

impl GeneratingVector {
    pub fn korobov(n: u64, a: u64) -> Result<Self> {
        let g = GeneratingVector { n, z: None, a: Some(a) };
        g.validate()?;
        Ok(g)
    }

    pub fn explicit(n: u64, z: Vec<u64>) -> Result<Self> {
        let g = GeneratingVector { n, z: Some(z), a: None };
        g.validate()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GeneratingVector = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("generating vector n must be a power of 2, got {n}")));
        }
        match (&self.z, self.a) {
            (Some(_), Some(_)) => Err(Error::invalid("give either `z` or `a`, not both")),
            (None, None) => Err(Error::MissingKey("z".into())),
            (Some(z), None) => {
                if z.is_empty() {
                    return Err(Error::invalid("generating vector `z` is empty"));
                }
                if let Some(bad) = z.iter().find(|&&v| v == 0 || v >= n) {
                    return Err(Error::invalid(format!("entry {bad} of `z` outside [1, {})", n)));
                }
                Ok(())
            }
            (None, Some(a)) => {
                if a == 0 || a >= n {
                    return Err(Error::invalid(format!("Korobov parameter {a} outside [1, {n})")));
                }
                Ok(())
            }
        }
    }

    /// Korobov parameter when the generator has that form.
    pub fn korobov_a(&self) -> Option<u64> {
        self.a
    }

    /// Dimension limit; `None` for Korobov generators, which extend without bound.
    pub fn max_dim(&self) -> Option<usize> {
        self.z.as_ref().map(Vec::len)
    }

    /// First `s` entries of the generating vector.
    pub fn vector(&self, s: usize) -> Result<Vec<u64>> {
        match (&self.z, self.a) {
            (Some(z), _) if z.len() >= s => Ok(z[..s].to_vec()),
            (Some(z), _) => {
                Err(Error::invalid(format!("generating vector has {} entries, dimension {s} requested", z.len())))
            }
            (None, Some(a)) => Ok(super::korobov_vector(a, self.n, s)),
            (None, None) => Err(Error::MissingKey("z".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let g = GeneratingVector::from_json(r#"{"n": 8, "z": [1, 3]}"#).unwrap();
        assert_eq!(g.vector(2).unwrap(), vec![1, 3]);
        assert!(g.vector(3).is_err());
        let k = GeneratingVector::from_json(r#"{"n": 8, "a": 3}"#).unwrap();
        assert_eq!(k.vector(4).unwrap(), vec![1, 3, 1, 3]);
        assert_eq!(k.max_dim(), None);
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            r#"{"n": 8}"#,
            r#"{"n": 12, "a": 5}"#,
            r#"{"n": 8, "z": [1, 8]}"#,
            r#"{"n": 8, "z": []}"#,
            r#"{"n": 8, "a": 3, "z": [1]}"#,
            r#"{"n": 8, "a": 3, "extra": 1}"#,
            r#"{"z": [1]}"#,
            "[1,2",
        ] {
            assert!(GeneratingVector::from_json(bad).is_err(), "{bad}");
        }
    }
}
