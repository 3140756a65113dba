//! Benchmarks, refinement studies and run configuration.

mod benchmarks;
mod config;
mod eoc;
mod output;
mod study;

pub use benchmarks::*;
pub use config::{
    brauer_from_section, material_from_section, newton_from_config, setup_from_config, study_overrides, ConfigFile, RunSetup, SolverChoice, StudyOverrides,
};
pub use eoc::compute_eoc;
pub use output::{field_csv, study_csv, study_table, FIELD_CSV_HEADER, STUDY_CSV_HEADER};
pub use study::{error_rule, relative_errors, run_study, solve_level, Reference, Solution, StudyResult, StudyRow};
