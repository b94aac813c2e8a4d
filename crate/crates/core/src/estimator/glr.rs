use crate::error::{Error, Result};

/// One GLR observation: the realized output X and its weight Ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlrTerm {
    pub threshold: f64,
    pub psi: f64,
}

/// Mean of 1[X_i ≤ x]·Ψ_i. Unlike the CDE this can be negative for finite n.
pub fn glrde_estimate(terms: &[GlrTerm], x: f64) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::invalid("glrde_estimate needs at least one term"));
    }
    let sum: f64 = terms.iter().filter(|t| t.threshold <= x).map(|t| t.psi).sum();
    Ok(sum / terms.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::rng_stream;
    use crate::special::norm_inv;

    #[test]
    fn indicator_behaviour() {
        let t = [GlrTerm { threshold: 1.0, psi: 5.0 }];
        assert_eq!(glrde_estimate(&t, 2.0).unwrap(), 5.0);
        assert_eq!(glrde_estimate(&t, 0.5).unwrap(), 0.0);
        assert!(glrde_estimate(&[], 0.0).is_err());
    }

    #[test]
    fn standard_normal_at_zero() {
        let n = 1_000_000;
        let mut s = rng_stream(3, 0);
        let terms: Vec<GlrTerm> = (0..n)
            .map(|_| {
                let z = norm_inv(s.uniform());
                GlrTerm { threshold: z, psi: -z }
            })
            .collect();
        let est = glrde_estimate(&terms, 0.0).unwrap();
        let vals: Vec<f64> = terms.iter().map(|t| if t.threshold <= 0.0 { t.psi } else { 0.0 }).collect();
        let var = vals.iter().map(|v| (v - est) * (v - est)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((est - 0.398942280401).abs() < 4.0 * se, "{est} ± {se}");
    }
}
