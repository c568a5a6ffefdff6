//! Run configuration and result files: cells CSV, summary JSON, SVG heatmap.

pub mod config;
pub mod heatmap;
pub mod output;

pub use config::{OutputKind, OutputSpec, ResolvedRun, RunConfig};
pub use heatmap::{render_svg, ColorScale, HeatmapSpec, Plane};
pub use output::{
    atomic_write, cells_csv_bytes, check_writable, fmt_num, json_bytes, read_cells_csv, round_sig9,
    rounded_json, summary_json, write_cells_csv, write_gap_csv, write_run_outputs, CELLS_HEADER,
    GAP_HEADER,
};

use std::path::PathBuf;

use crate::error::Result;
use crate::sweep::{run_sweep, SweepOutput};

/// Loads nothing from disk: checks output directories, runs the sweep and
/// writes every configured output.
pub fn execute(run: &ResolvedRun) -> Result<(SweepOutput, Vec<PathBuf>)> {
    check_writable(run.outputs.iter().map(|o| o.path.as_path()))?;
    let result = run_sweep(&run.sweep)?;
    let written = write_run_outputs(run, &result)?;
    Ok((result, written))
}
