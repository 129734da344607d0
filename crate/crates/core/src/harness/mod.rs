//! Experiment orchestration: configuration, ε-sweeps and result files.

pub mod cache;
pub mod config;
pub mod emit;
pub mod sweep;

pub use cache::{cache_key, load_expansion, save_expansion};
pub use config::{ExperimentConfig, GridSpec, OutputSpec, PotentialSpec, SourceSpec, SCHEMA_VERSION};
pub use emit::{csv_string, emit, field_csv_string, read_json, render_svg, write_csv, write_json, write_svg};
pub use sweep::{
    fit_columns, run_amplitude_table, run_sweep, Column, ColumnFit, FitStatus, Provenance, SweepKind, SweepResult,
    SweepRow, FIT_FLOOR_FACTOR, SOLVER_FLOOR,
};
