//! Configuration, error norms, slope fits, studies and file output used by
//! the command-line tool and the acceptance suite.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod manifest;
pub mod norms;

pub use config::ExperimentConfig;
pub use experiments::{
    compare_study, convergence_study, matched_dof, median_time, reference_path, timed_emom,
    timing_study, CompareSettings, ErrorRow, SlopeRow, StudyReport, TimingRow,
};
pub use fit::{fit_slope, SlopeFit};
pub use manifest::Manifest;
pub use norms::{error_norms, ErrorNorms, Interpolation};
