//! Experiment harness: evaluation grids, replicated runs over point sets,
//! IV / MISE estimation, rate fits and result files.

mod config;
mod grid;
mod io;
mod run;
mod source;
mod stats;

pub use config::{
    parse_configs, read_config, ExperimentConfig, LatticeConfig, ReferenceConfig, DESK_REPS, DESK_SIZES, FULL_REPS,
    FULL_SIZES,
};
pub use grid::{build_grid, EvaluationGrid};
pub use io::{
    fmt_f64, read_combo, read_density, read_density_from, read_results, read_results_from, write_density,
    write_density_to, write_outputs, write_results, write_results_to, DensityRow, ResultRow, DENSITY_COLUMNS,
    RESULT_COLUMNS,
};
pub use run::{
    reference_density, rep_stream, resolve_variant, run_experiment, run_replications, ComboFit, CurvePoint,
    ExperimentOutput, IvCurve, Metric, Replications, RunSpec,
};
pub use source::{korobov_parameter, PointPlan};
pub use stats::{estimate_iv, estimate_mise, fit_rate, E19Source, Estimate, RateFit};
