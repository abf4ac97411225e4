//! Experiment configs, suite drivers and run directories.

pub mod config;
pub mod output;
pub mod suites;

pub use config::{Experiment, ExperimentConfig, FastOrOracle, OUT_ENV};
pub use output::{persist, read_records, strip_timing, verify_run, Manifest, Status, SuiteOutput, Table, Verdict};
pub use suites::{
    execute, in_pool, run_convergence_suite, run_counting_suite, run_cs_suite, run_divisor_suite, run_evolve_suite,
    run_experiment, run_picard_suite, run_probability_suite, run_strichartz_suite, run_tloc_suite,
};
