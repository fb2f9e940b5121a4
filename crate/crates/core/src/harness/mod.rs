//! Experiment orchestration: INI configs, seeded parameter sweeps, CSV
//! tables and SVG charts.

mod chart;
mod config;
mod presets;
mod sweep;
mod table;

pub use chart::{emit_chart, render_chart};
pub use config::{parse_link_params, ChartSpec, DspTemplate, ExperimentConfig, GridPoint, SweepAxes};
pub use presets::{preset, preset_experiments, PRESET_NAMES};
pub use sweep::{run_sweep, run_sweeps, ResultRow, SweepTable};
pub use table::{emit_csv, read_csv, sig9, Table, RESULT_COLUMNS};

use thiserror::Error;

use crate::error::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl HarnessError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            reason: e.to_string(),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
