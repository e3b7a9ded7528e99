//! Monte Carlo experiments: configuration, figure presets, sweep execution
//! and CSV output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod presets;

pub use config::{
    ChannelConfig, CovarianceSource, ExperimentConfig, ExperimentKind, RunConfig, SweepVar,
    SystemConfig,
};
pub use experiment::{
    mean_and_se, run_complexity, run_experiment, run_rates_detailed, run_theory, ExperimentOutput,
    PointOutcome, SchemeKind, SchemeSpec,
};
pub use output::{format_sig10, read_csv, write_csv, ComplexityRow, ResultRow, TheoryRow};
pub use presets::{figure_preset, PRESET_NAMES};
