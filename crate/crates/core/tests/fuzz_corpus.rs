//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets, so seeds stay parseable (or cleanly rejected) without a
//! nightly toolchain.

use std::path::PathBuf;

use condens::experiments::{parse_configs, read_density_from, read_results_from, ComboFit};
use condens::models::{ModelConfig, San, SanGraph};
use condens::points::{DirectionTable, GeneratingVector};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn experiment_configs() {
    for (name, data) in seeds("experiment_config") {
        let r = parse_configs(text(&data));
        assert_eq!(r.is_err(), name.starts_with("bad"), "{name}: {r:?}");
    }
}

#[test]
fn model_configs() {
    for (name, data) in seeds("model_config") {
        let cfg: ModelConfig = serde_json::from_slice(&data).unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.build().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn generating_vectors() {
    for (name, data) in seeds("generating_vector") {
        let r = GeneratingVector::from_json(text(&data));
        assert_eq!(r.is_err(), name.starts_with("not"), "{name}");
    }
}

#[test]
fn san_graphs() {
    for (name, data) in seeds("san_graph") {
        let r = SanGraph::from_json(text(&data)).and_then(San::new);
        assert_eq!(r.is_err(), name == "backward.json", "{name}: {:?}", r.err());
    }
}

#[test]
fn csv_files() {
    for (name, data) in seeds("results_csv") {
        assert_eq!(read_results_from(&data[..]).unwrap().len(), 2, "{name}");
    }
    for (name, data) in seeds("density_csv") {
        assert_eq!(read_density_from(&data[..]).unwrap().len(), 3, "{name}");
    }
}

#[test]
fn direction_tables() {
    for (name, data) in seeds("direction_table") {
        let t = DirectionTable::parse(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(t.max_dim(), 5);
        // Same leading dimensions as the bundled table.
        for j in 0..5 {
            assert_eq!(t.directions(j), DirectionTable::bundled().directions(j));
        }
    }
}

#[test]
fn combo_weights() {
    for (name, data) in seeds("combo_weights") {
        let w: Vec<ComboFit> = serde_json::from_slice(&data).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!((w[0].beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
