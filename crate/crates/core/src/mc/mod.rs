//! Config-driven Monte Carlo harness.

mod config;
mod experiments;
mod forecast;
mod run;
mod table;

pub use config::{parse_grid, ExperimentConfig};
pub use experiments::EXPERIMENTS;
pub use forecast::{nested_forecast_test, recursive_forecasts, NestedForecast};
pub use run::{
    read_replications, run_experiment, simulate_experiment, size_power_grid, summarize, summary_path, ColumnSummary,
    ExperimentOutput, GridRow, GridTable, RunBlock, SUMMARY_PROBS,
};
pub use table::QuantileTable;
