//! CSV and JSON artifacts: `results.csv`, density dumps and combination weights.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{ComboFit, ExperimentOutput};
use crate::error::{Error, Result};

pub const RESULT_COLUMNS: [&str; 17] = [
    "model",
    "variant",
    "estimator",
    "pointset",
    "n",
    "n_r",
    "n_e",
    "a",
    "b",
    "iv",
    "iv_stderr",
    "nu_hat",
    "k_hat",
    "e19",
    "seed",
    "metric",
    "e19_source",
];

pub const DENSITY_COLUMNS: [&str; 3] = ["x", "fhat", "stderr"];

/// One line of `results.csv`. For KDE runs `iv` holds the MISE (see `metric`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub model: String,
    pub variant: String,
    pub estimator: String,
    pub pointset: String,
    pub n: usize,
    pub n_r: usize,
    pub n_e: usize,
    pub a: f64,
    pub b: f64,
    pub iv: f64,
    pub iv_stderr: f64,
    pub nu_hat: f64,
    pub k_hat: f64,
    pub e19: f64,
    pub seed: u64,
    pub metric: String,
    pub e19_source: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityRow {
    pub x: f64,
    pub fhat: f64,
    pub stderr: f64,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl ResultRow {
    fn record(&self) -> [String; 17] {
        [
            self.model.clone(),
            self.variant.clone(),
            self.estimator.clone(),
            self.pointset.clone(),
            self.n.to_string(),
            self.n_r.to_string(),
            self.n_e.to_string(),
            fmt_f64(self.a),
            fmt_f64(self.b),
            fmt_f64(self.iv),
            fmt_f64(self.iv_stderr),
            fmt_f64(self.nu_hat),
            fmt_f64(self.k_hat),
            fmt_f64(self.e19),
            self.seed.to_string(),
            self.metric.clone(),
            self.e19_source.clone(),
        ]
    }
}

pub fn write_results_to<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush().map_err(|e| Error::io("<results>", e))
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_to(rows, f)
}

fn check_header(r: &mut csv::Reader<impl Read>, expect: &[&str]) -> Result<()> {
    let got = r.headers()?;
    if got.iter().ne(expect.iter().copied()) {
        return Err(Error::Csv {
            line: 1,
            message: format!(
                "header `{}` does not match `{}`",
                got.iter().collect::<Vec<_>>().join(","),
                expect.join(",")
            ),
        });
    }
    Ok(())
}

fn read_rows<T: serde::de::DeserializeOwned, R: Read>(r: R, columns: &[&str]) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, columns)?;
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_results_from<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    read_rows(r, &RESULT_COLUMNS)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_results_from(File::open(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_density_to<W: Write>(rows: &[DensityRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(DENSITY_COLUMNS)?;
    for r in rows {
        out.write_record([fmt_f64(r.x), fmt_f64(r.fhat), fmt_f64(r.stderr)])?;
    }
    out.flush().map_err(|e| Error::io("<density>", e))
}

pub fn write_density(rows: &[DensityRow], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_density_to(rows, f)
}

pub fn read_density_from<R: Read>(r: R) -> Result<Vec<DensityRow>> {
    read_rows(r, &DENSITY_COLUMNS)
}

pub fn read_density(path: &Path) -> Result<Vec<DensityRow>> {
    read_density_from(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Writes `results.csv` for all experiments plus, per experiment,
/// `density-<label>.csv` and (for combinations) `combo-<label>.json`.
pub fn write_outputs(outputs: &[ExperimentOutput], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows: Vec<ResultRow> = outputs.iter().flat_map(|o| o.rows()).collect();
    write_results(&rows, &dir.join("results.csv"))?;
    for o in outputs {
        write_density(&o.density, &dir.join(format!("density-{}.csv", o.label())))?;
        if !o.combo.is_empty() {
            let path = dir.join(format!("combo-{}.json", o.label()));
            let text = serde_json::to_string_pretty(&o.combo)?;
            std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

pub fn read_combo(path: &Path) -> Result<Vec<ComboFit>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iv: f64) -> ResultRow {
        ResultRow {
            model: "cantilever".into(),
            variant: "g-3".into(),
            estimator: "cde".into(),
            pointset: "lat-s".into(),
            n: 1024,
            n_r: 50,
            n_e: 128,
            a: 3.1707,
            b: 5.6675,
            iv,
            iv_stderr: iv / 7.0,
            nu_hat: 2.0 / 3.0,
            k_hat: 0.1,
            e19: f64::NAN,
            seed: u64::MAX,
            metric: "iv".into(),
            e19_source: "extrapolated".into(),
        }
    }

    #[test]
    fn results_round_trip() {
        let rows = vec![row(1.0 / 3.0), row(std::f64::consts::PI * 1e-300)];
        let mut buf = Vec::new();
        write_results_to(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("model,variant,estimator,pointset,n,n_r,n_e,a,b,iv,iv_stderr,nu_hat,k_hat,e19,seed"));
        let back = read_results_from(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.iv.to_bits(), b.iv.to_bits());
            assert_eq!(a.nu_hat.to_bits(), b.nu_hat.to_bits());
            assert!(b.e19.is_nan());
        }
    }

    #[test]
    fn density_round_trip() {
        let rows = vec![DensityRow { x: 0.1, fhat: 2.0 / 3.0, stderr: 1e-9 }];
        let mut buf = Vec::new();
        write_density_to(&rows, &mut buf).unwrap();
        assert_eq!(read_density_from(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn schema_errors_have_lines() {
        let e = read_density_from("x,f,stderr\n1,2,3\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = read_density_from("x,fhat,stderr\n1,2,3\n4,oops,6\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = read_density_from("x,fhat,stderr\n1,2\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }
}
