//! Seeded Monte Carlo experiments and their CSV/JSON emission.
//!
//! Every table is a pure function of its [`ExperimentConfig`]: trials run in
//! parallel but are merged by trial index, so output bytes do not depend on
//! the number of workers.

mod config;
mod emit;
mod experiments;
mod records;

pub use config::{parse_grid, Cell, Experiment, ExperimentConfig, OutputFormat};
pub use emit::{emit, render, CSV_HEADER};
pub use experiments::{
    calibrated_r_star, compressible_rate, log_threshold, run, run_codec_roundtrip, run_compressible, run_facets,
    run_geometry_checks, run_necessity, run_phase_transition, CompressibleSignal, CERTIFY_MAX_M, EXACT_RECONSTRUCTION_TOL,
    MAGNITUDE_RANGE, MAX_CERTIFY_ATTEMPTS,
};
pub use records::{MetricRow, SummaryTable, TrialRecord};

use crate::bp::BpError;
use crate::codec::CodecError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Serialize(String),
    #[error("metric `{0}` is not finite")]
    NonFinite(String),
    #[error("{0}")]
    Trial(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
