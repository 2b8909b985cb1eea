//! Sweep orchestration: configuration and presets, parallel Monte Carlo with
//! a deterministic stopping rule, analytic tables, result files and the
//! self-test suite behind the CLI.

mod config;
mod output;
mod selftest;
mod sweep;

pub use config::{LinewidthSplit, OsnrGrid, Preset, SweepConfig};
pub use output::{
    emit, emit_theory, metadata_path, read_json, write_results, write_theory, Format, CSV_HEADER,
    THEORY_CSV_HEADER,
};
pub use selftest::{selftest, Check};
pub use sweep::{
    run_point, run_sweep, theory_table, trial_stream_id, ResultSet, RunMetadata, TheoryRow,
    TheoryTable,
};
