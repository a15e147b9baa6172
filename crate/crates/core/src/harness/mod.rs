//! Scenario files, single-point evaluation, figure sweeps, the platform
//! catalog and the table emitters behind the command-line tool.

pub mod catalog;
pub mod point;
pub mod scenario;
pub mod sweep;
pub mod table;

pub use catalog::{catalog, CatalogFilter, PlatformClass, PlatformRecord};
pub use point::{run_point, solve_max_divergence, solve_max_loss, PointReport, RunError};
pub use scenario::{load_scenario, load_scenario_file, Scenario, ScenarioError};
pub use sweep::{
    run_sweep, run_sweep_with, FigurePreset, Grid, Metric, MetricKind, Scale, Series, SeriesTable, SweepError, SweepSpec,
    SweepVariable,
};
pub use table::{format_number, Cell, Table};
