//! Monte-Carlo SER experiments, sweeps, results files and dataset export.

pub mod dataset;
pub mod experiment;
pub mod results;

pub use dataset::{export_dataset, load_dataset, read_dataset, write_dataset, Dataset, DatasetHeader};
pub use experiment::{
    run_experiment, run_sweep, run_with_model, ExperimentConfig, SchemeKind, SerRecord, SweepAxis,
    TrialRunner,
};
pub use results::{read_rows, wilson_interval, CsvRow, CsvSink};
