//! Stochastic activity network: X is the longest source-to-sink path.
//! The CDE conditions on the arcs outside a uniformly directed cut L.

use serde::{Deserialize, Serialize};

use super::dist::Law;
use super::{unknown_variant, DensityModel};
use crate::error::{Error, Result};
use crate::estimator::{CdeRealizer, ConditionalDensity, Conditioning, Dim, DynConditioning, Realizer, Sampler};
use crate::points::Coordinates;

/// One activity; `law` is the distribution of its duration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub from: usize,
    pub to: usize,
    pub law: Law,
}

/// JSON schema of a network. `cut` lists 1-based arc indices. Keys left out
/// are taken from the 13-arc default network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default = "SanGraph::thirteen_arc", deny_unknown_fields)]
pub struct SanGraph {
    pub nodes: usize,
    pub arcs: Vec<ArcSpec>,
    pub cut: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

pub(crate) const DEFAULT_ENDS: [(usize, usize); 13] =
    [(0, 1), (0, 2), (1, 2), (1, 3), (1, 5), (2, 5), (3, 6), (3, 4), (4, 7), (4, 5), (5, 8), (6, 7), (7, 8)];
const DEFAULT_MEANS: [f64; 13] = [13.0, 5.5, 7.0, 5.2, 16.5, 14.7, 10.3, 6.0, 4.0, 20.0, 4.2, 19.0, 15.2];

impl SanGraph {
    /// The 13-arc network with cut {5, 6, 7, 9, 10} and truncated-normal
    /// durations (sd = mean/4).
    pub fn thirteen_arc() -> Self {
        let arcs = DEFAULT_ENDS
            .iter()
            .zip(DEFAULT_MEANS)
            .map(|(&(from, to), mean)| ArcSpec { from, to, law: Law::Normal { mean, sd: mean / 4.0 } })
            .collect();
        SanGraph { nodes: 9, arcs, cut: vec![5, 6, 7, 9, 10], interval: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: SanGraph = serde_json::from_str(text)?;
        Ok(g)
    }
}

/// Validated DAG with a fixed topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct Dag {
    nodes: usize,
    ends: Vec<(usize, usize)>,
    order: Vec<usize>,
    source: usize,
    sink: usize,
}

impl Dag {
    pub fn new(nodes: usize, ends: Vec<(usize, usize)>) -> Result<Self> {
        if nodes < 2 || ends.is_empty() {
            return Err(Error::invalid("network needs at least two nodes and one arc"));
        }
        let mut indeg = vec![0usize; nodes];
        let mut outdeg = vec![0usize; nodes];
        for (j, &(a, b)) in ends.iter().enumerate() {
            if a >= nodes || b >= nodes || a == b {
                return Err(Error::invalid(format!("arc {} has invalid ends ({a}, {b})", j + 1)));
            }
            indeg[b] += 1;
            outdeg[a] += 1;
        }
        let sources: Vec<usize> = (0..nodes).filter(|&v| indeg[v] == 0).collect();
        let sinks: Vec<usize> = (0..nodes).filter(|&v| outdeg[v] == 0).collect();
        if sources.len() != 1 || sinks.len() != 1 {
            return Err(Error::invalid(format!(
                "network must have one source and one sink, found {} and {}",
                sources.len(),
                sinks.len()
            )));
        }
        let mut deg = indeg.clone();
        let mut order = Vec::with_capacity(nodes);
        let mut stack = sources.clone();
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(a, b) in &ends {
                if a == v {
                    deg[b] -= 1;
                    if deg[b] == 0 {
                        stack.push(b);
                    }
                }
            }
        }
        if order.len() != nodes {
            return Err(Error::invalid("network contains a cycle"));
        }
        Ok(Dag { nodes, ends, order, source: sources[0], sink: sinks[0] })
    }

    pub fn arcs(&self) -> usize {
        self.ends.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn ends(&self) -> &[(usize, usize)] {
        &self.ends
    }

    /// All source-to-sink paths as arc-index lists (fails beyond `limit` paths).
    pub fn paths(&self, limit: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.source, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            if v == self.sink {
                out.push(path);
                if out.len() > limit {
                    return Err(Error::invalid(format!("network has more than {limit} paths")));
                }
                continue;
            }
            for (j, &(a, b)) in self.ends.iter().enumerate() {
                if a == v {
                    let mut p = path.clone();
                    p.push(j);
                    stack.push((b, p));
                }
            }
        }
        Ok(out)
    }

    /// Longest path length with arc lengths `y` (arcs with `skip[j]` excluded).
    /// Returns (from-source, to-sink) longest lengths per node, −∞ if unreachable.
    pub fn longest(&self, y: &[f64], skip: &[bool]) -> (Vec<f64>, Vec<f64>) {
        let mut fwd = vec![f64::NEG_INFINITY; self.nodes];
        let mut bwd = vec![f64::NEG_INFINITY; self.nodes];
        fwd[self.source] = 0.0;
        bwd[self.sink] = 0.0;
        for &v in &self.order {
            for (j, &(a, b)) in self.ends.iter().enumerate() {
                if a == v && !skip[j] {
                    fwd[b] = fwd[b].max(fwd[a] + y[j]);
                }
            }
        }
        for &v in self.order.iter().rev() {
            for (j, &(a, b)) in self.ends.iter().enumerate() {
                if b == v && !skip[j] {
                    bwd[a] = bwd[a].max(bwd[b] + y[j]);
                }
            }
        }
        (fwd, bwd)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct San {
    dag: Dag,
    laws: Vec<Law>,
    cut: Vec<usize>,
    in_cut: Vec<bool>,
    interval: (f64, f64),
}

impl San {
    pub fn new(g: SanGraph) -> Result<Self> {
        let dag = Dag::new(g.nodes, g.arcs.iter().map(|a| (a.from, a.to)).collect())?;
        for (j, a) in g.arcs.iter().enumerate() {
            a.law.validate().map_err(|e| Error::invalid(format!("arc {}: {e}", j + 1)))?;
        }
        let m = dag.arcs();
        let mut in_cut = vec![false; m];
        for &c in &g.cut {
            if c == 0 || c > m || in_cut[c - 1] {
                return Err(Error::invalid(format!("cut entry {c} is not a distinct arc index in 1..={m}")));
            }
            in_cut[c - 1] = true;
        }
        let paths = dag.paths(1_000_000)?;
        let mut used = vec![false; m];
        for p in &paths {
            let hits = p.iter().filter(|&&j| in_cut[j]).count();
            if hits != 1 {
                return Err(Error::invalid(format!("cut is not uniformly directed: a path meets it {hits} times")));
            }
            for &j in p {
                used[j] = true;
            }
        }
        if let Some(j) = used.iter().position(|&u| !u) {
            return Err(Error::invalid(format!("arc {} lies on no source-to-sink path", j + 1)));
        }
        let cut: Vec<usize> = (0..m).filter(|&j| in_cut[j]).collect();
        let mut san = San { dag, laws: g.arcs.iter().map(|a| a.law).collect(), cut, in_cut, interval: (0.0, 1.0) };
        san.interval = match g.interval {
            Some([a, b]) if a < b => (a, b),
            Some(_) => return Err(Error::invalid("SAN interval must satisfy a < b")),
            None => san.pilot_interval()?,
        };
        Ok(san)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cut(&self) -> &[usize] {
        &self.cut
    }

    /// Central 95% interval of X from a fixed-seed CDE pilot run.
    fn pilot_interval(&self) -> Result<(f64, f64)> {
        let cond = self.conditioning_cut();
        let mut s = crate::points::rng_stream(0x5a4e, 0);
        let reps: Vec<CutDensity> = (0..1 << 14).filter_map(|_| cond.realize(&mut s)).collect();
        let hi_guess: f64 = self.laws.iter().map(|l| l.mean()).sum::<f64>() * 4.0 + 1.0;
        let avg = |x: f64| reps.iter().map(|d| d.cdf(x)).sum::<f64>() / reps.len() as f64;
        let lo = crate::numerics::bisect_increasing(avg, 0.025, 0.0, hi_guess, 1e-9, 200)?;
        let hi = crate::numerics::bisect_increasing(avg, 0.975, 0.0, hi_guess, 1e-9, 200)?;
        log::info!("SAN interval from pilot run: [{lo:.4}, {hi:.4}]");
        Ok((lo, hi))
    }

    pub fn conditioning_cut(&self) -> CutConditioning {
        CutConditioning { san: self.clone() }
    }

    /// Longest-path prefixes P_j for the cut arcs given all arc lengths
    /// (cut entries of `y` are ignored).
    pub fn prefixes(&self, y: &[f64]) -> Vec<f64> {
        let (fwd, bwd) = self.dag.longest(y, &self.in_cut);
        self.cut
            .iter()
            .map(|&j| {
                let (a, b) = self.dag.ends[j];
                fwd[a] + bwd[b]
            })
            .collect()
    }

    pub fn longest_path(&self, y: &[f64]) -> f64 {
        let none = vec![false; y.len()];
        self.dag.longest(y, &none).0[self.dag.sink]
    }
}

/// F(x|G) = Π_{j∈L} F_j(x − P_j).
#[derive(Clone, Debug)]
pub struct CutDensity {
    laws: Vec<Law>,
    prefix: Vec<f64>,
}

impl CutDensity {
    pub fn new(laws: Vec<Law>, prefix: Vec<f64>) -> Self {
        CutDensity { laws, prefix }
    }
}

impl ConditionalDensity for CutDensity {
    fn density(&self, x: f64) -> f64 {
        let mut f = [0.0; 16];
        let mut big_f = [0.0; 16];
        let k = self.laws.len();
        if k > 16 {
            return self.density_slow(x);
        }
        for (i, (law, p)) in self.laws.iter().zip(&self.prefix).enumerate() {
            f[i] = law.pdf(x - p);
            big_f[i] = law.cdf(x - p);
        }
        (0..k).map(|j| f[j] * (0..k).filter(|&l| l != j).map(|l| big_f[l]).product::<f64>()).sum()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.laws.iter().zip(&self.prefix).map(|(l, p)| l.cdf(x - p)).product()
    }
}

impl CutDensity {
    fn density_slow(&self, x: f64) -> f64 {
        let k = self.laws.len();
        (0..k)
            .map(|j| {
                self.laws[j].pdf(x - self.prefix[j])
                    * (0..k).filter(|&l| l != j).map(|l| self.laws[l].cdf(x - self.prefix[l])).product::<f64>()
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct CutConditioning {
    san: San,
}

impl Conditioning for CutConditioning {
    type Density = CutDensity;

    fn dim(&self) -> Dim {
        Dim::Finite(self.san.dag.arcs() - self.san.cut.len())
    }

    fn realize(&self, u: &mut dyn Coordinates) -> Option<CutDensity> {
        let y: Vec<f64> = self
            .san
            .laws
            .iter()
            .zip(&self.san.in_cut)
            .map(|(law, &c)| if c { 0.0 } else { law.inverse(u.next_coord()) })
            .collect();
        Some(CutDensity {
            laws: self.san.cut.iter().map(|&j| self.san.laws[j]).collect(),
            prefix: self.san.prefixes(&y),
        })
    }
}

impl Sampler for San {
    fn dim(&self) -> Dim {
        Dim::Finite(self.dag.arcs())
    }

    fn sample(&self, u: &mut dyn Coordinates) -> Option<f64> {
        let y: Vec<f64> = self.laws.iter().map(|l| l.inverse(u.next_coord())).collect();
        Some(self.longest_path(&y))
    }
}

impl DensityModel for San {
    fn name(&self) -> &'static str {
        "san"
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn cde_variants(&self) -> Vec<String> {
        vec!["cut".into()]
    }

    fn conditioning(&self, variant: &str) -> Result<Box<dyn DynConditioning>> {
        match variant {
            "cut" => Ok(Box::new(self.conditioning_cut())),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn cde(&self, variant: &str) -> Result<Box<dyn Realizer>> {
        match variant {
            "cut" => Ok(Box::new(CdeRealizer(self.conditioning_cut()))),
            _ => Err(unknown_variant(variant, &self.cde_variants())),
        }
    }

    fn sampler(&self) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::SliceCursor;

    fn toy(cut: Vec<usize>) -> SanGraph {
        let e = Law::Expon { mean: 1.0 };
        SanGraph {
            nodes: 4,
            arcs: [(0, 1), (0, 2), (1, 3), (2, 3)].iter().map(|&(from, to)| ArcSpec { from, to, law: e }).collect(),
            cut,
            interval: Some([0.5, 6.0]),
        }
    }

    #[test]
    fn thirteen_arc_default_is_valid() {
        let g = SanGraph::thirteen_arc();
        let s = San::new(SanGraph { interval: Some([20.0, 100.0]), ..g }).unwrap();
        assert_eq!(s.cut(), &[4, 5, 6, 8, 9]);
        assert_eq!(s.dag().paths(100).unwrap().len(), 6);
    }

    #[test]
    fn rejects_bad_cuts_and_graphs() {
        assert!(San::new(toy(vec![3])).is_err());
        assert!(San::new(toy(vec![1, 3])).is_err());
        assert!(San::new(toy(vec![3, 3])).is_err());
        assert!(San::new(toy(vec![9])).is_err());
        let mut cyc = toy(vec![3, 4]);
        cyc.arcs.push(ArcSpec { from: 3, to: 0, law: Law::Expon { mean: 1.0 } });
        assert!(San::new(cyc).is_err());
    }

    #[test]
    fn singleton_cut_is_shifted_law() {
        let e = Law::Expon { mean: 2.0 };
        let g = SanGraph {
            nodes: 3,
            arcs: vec![ArcSpec { from: 0, to: 1, law: e }, ArcSpec { from: 1, to: 2, law: e }],
            cut: vec![2],
            interval: Some([0.0, 10.0]),
        };
        let s = San::new(g).unwrap();
        let u = 0.4;
        let d = s.conditioning_cut().realize(&mut SliceCursor::new(&[u])).unwrap();
        let y1 = e.inverse(u);
        for x in [0.5, 2.0, 5.0] {
            assert!((d.density(x) - e.pdf(x - y1)).abs() < 1e-15);
        }
        assert_eq!(d.density(y1 * 0.5), 0.0);
    }

    #[test]
    fn toy_cut_prefixes() {
        let s = San::new(toy(vec![3, 4])).unwrap();
        assert_eq!(s.prefixes(&[1.5, 0.7, 0.0, 0.0]), vec![1.5, 0.7]);
        assert_eq!(s.longest_path(&[1.5, 0.7, 1.0, 3.0]), 3.7);
    }

    #[test]
    fn cdf_is_continuous() {
        let s = San::new(SanGraph { interval: Some([20.0, 100.0]), ..SanGraph::thirteen_arc() }).unwrap();
        let d = s.conditioning_cut().realize(&mut SliceCursor::new(&[0.3, 0.6, 0.2, 0.9, 0.5, 0.1, 0.7, 0.4])).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=20_000 {
            let x = i as f64 * 0.006;
            let jump = d.cdf(x + 1e-7) - d.cdf(x);
            assert!(jump >= 0.0);
            worst = worst.max(jump);
        }
        assert!(worst < 1e-6, "{worst}");
    }
}
