//! Configuration, field transfer and the ε-sweep convergence study.

pub mod config;
pub mod output;
pub mod study;
pub mod transfer;

pub use config::{parse_config, DataPreset, ExperimentConfig, ObstacleSpec, TimeRule};
pub use study::{run_convergence_study, ConvergenceReport, EpsRecord, StudyStatus, Verdict};
pub use transfer::{interpolate_p1, l2_error_on_perforated, PointLocator, Transfer};
