//! Experiment plumbing: topology generation and files, configuration,
//! Monte-Carlo sweeps with CSV output, and exhaustive oracles.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod topology;

pub use config::ConfigFile;
pub use experiment::{
    read_csv, run_experiment, run_experiment_records, summarize, write_csv, ExperimentSpec, ResultRow, RunRecord,
    SweepVariable,
};
pub use oracle::{oracle_assign, Objective};
pub use topology::{generate_topology, read_topology, Layout};
