//! Experiment orchestration: configuration files, the verification report,
//! sweep tables, SVG output and figure reproduction.

mod config;
mod figures;
mod output;
mod verify;

pub use config::{ExperimentConfig, FiguresConfig, Grid, VerifyConfig, CONFIG_VERSION};
pub use figures::{merged_grid, reproduce_figures, FigureSet};
pub use output::{emit_plot, emit_svg, read_sweep_csv, write_sweep, write_sweep_csv, SWEEP_HEADER};
pub use verify::{verify_all, verify_with_files, CheckRow, Status, VerificationReport};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit code for an error: I/O problems map to [`EXIT_IO`], every
/// rejected input or parameter to [`EXIT_PRECONDITION`].
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_PRECONDITION,
    }
}
