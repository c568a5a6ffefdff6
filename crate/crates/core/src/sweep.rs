//! Localization error over a regular grid of marker positions.
//!
//! Grid points are visited row-major with `x` outermost and `z` innermost,
//! endpoints inclusive. Rows are evaluated in parallel and merged in index
//! order, so the output does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraRig, Point3};
use crate::timing::{
    check_displacement, planar_report, spatial_report, Displacement, ErrorReport,
    ReferenceConvention,
};

/// Cells within this distance (cm) of the maximum count as ties.
pub const ARGMAX_TOLERANCE: f64 = 1e-12;

/// Exact errors at or below this (cm) are skipped in relative comparisons.
pub const MIN_COMPARABLE_ERROR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
}

impl AxisRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
        }
    }

    /// Number of grid values for `step`, both endpoints included when the
    /// span is a whole number of steps.
    pub fn count(&self, step: f64) -> usize {
        ((self.max - self.min) / step + 1e-9).floor() as usize + 1
    }

    pub fn value(&self, index: usize, step: f64) -> f64 {
        self.min + index as f64 * step
    }
}

/// The gridded volume (or plane) to evaluate, in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingRange {
    pub x: AxisRange,
    pub y: AxisRange,
    pub z: AxisRange,
    pub step: f64,
}

impl OperatingRange {
    /// The validated planar working area: x in [-70, 70], y in [90, 240].
    pub const fn planar_default() -> Self {
        Self {
            x: AxisRange::new(-70.0, 70.0),
            y: AxisRange::new(90.0, 240.0),
            z: AxisRange::fixed(0.0),
            step: 1.0,
        }
    }

    /// The validated working volume, adding z in [-65, 65].
    pub const fn volume_default() -> Self {
        Self {
            z: AxisRange::new(-65.0, 65.0),
            ..Self::planar_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        for (name, axis) in [("x", self.x), ("y", self.y), ("z", self.z)] {
            if !(axis.min.is_finite() && axis.max.is_finite()) || axis.min > axis.max {
                return Err(Error::InvalidInput(format!(
                    "{name} range must satisfy min <= max, got [{}, {}]",
                    axis.min, axis.max
                )));
            }
        }
        if self.y.min <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "y range must lie in front of the cameras (y_min > 0), got {}",
                self.y.min
            )));
        }
        Ok(())
    }

    pub fn counts(&self) -> [usize; 3] {
        [
            self.x.count(self.step),
            self.y.count(self.step),
            self.z.count(self.step),
        ]
    }

    pub fn cell_count(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn contains(&self, p: Point3) -> bool {
        [(self.x, p.x), (self.y, p.y), (self.z, p.z)]
            .iter()
            .all(|(a, v)| *v >= a.min && *v <= a.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "2d")]
    Planar,
    #[serde(rename = "3d")]
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pins one axis to a single value, e.g. the `y = 240` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub axis: Axis,
    #[serde(rename = "value_cm")]
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub rig: CameraRig,
    pub range: OperatingRange,
    pub displacement: Displacement,
    pub convention: ReferenceConvention,
    pub mode: Mode,
    pub slice: Option<Slice>,
}

impl SweepConfig {
    pub fn planar(rig: CameraRig, displacement: Displacement) -> Self {
        Self {
            rig,
            range: OperatingRange::planar_default(),
            displacement,
            convention: ReferenceConvention::Midpoint,
            mode: Mode::Planar,
            slice: None,
        }
    }

    pub fn spatial(rig: CameraRig, displacement: Displacement) -> Self {
        Self {
            range: OperatingRange::volume_default(),
            mode: Mode::Spatial,
            ..Self::planar(rig, displacement)
        }
    }

    /// The grid actually evaluated: slice applied, z pinned to 0 in 2D.
    pub fn effective_range(&self) -> OperatingRange {
        let mut range = self.range;
        if self.mode == Mode::Planar {
            range.z = AxisRange::fixed(0.0);
        }
        if let Some(slice) = self.slice {
            let fixed = AxisRange::fixed(slice.value);
            match slice.axis {
                Axis::X => range.x = fixed,
                Axis::Y => range.y = fixed,
                Axis::Z => range.z = fixed,
            }
        }
        range
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_geometry()?;
        if self.displacement.is_zero() {
            return Err(Error::InvalidInput(
                "displacement must be non-zero for a sweep".into(),
            ));
        }
        Ok(())
    }

    fn validate_geometry(&self) -> Result<()> {
        self.effective_range().validate()?;
        if self.mode == Mode::Planar {
            if self.displacement.dz != 0.0 {
                return Err(Error::InvalidInput(
                    "2d sweeps need a displacement with dz = 0".into(),
                ));
            }
            if matches!(self.slice, Some(Slice { axis: Axis::Z, .. })) {
                return Err(Error::InvalidInput("2d sweeps cannot slice along z".into()));
            }
        }
        check_displacement(self.displacement)
    }

    fn evaluate(&self, p: Point3, conv: ReferenceConvention) -> Result<ErrorReport> {
        let result = match self.mode {
            Mode::Planar => planar_report(self.rig, p.to_2d(), self.displacement, conv),
            Mode::Spatial => spatial_report(self.rig, p, self.displacement, conv),
        };
        result.map_err(|e| match e {
            Error::Geometry(source) => Error::Cell { point: p, source },
            other => other,
        })
    }

    /// Evaluates `f` at every grid point, rows in parallel, results in
    /// row-major order.
    fn map_grid<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Point3) -> Result<T> + Sync,
    {
        let range = self.effective_range();
        let [nx, ny, nz] = range.counts();
        let step = range.step;
        let rows: Vec<Result<Vec<T>>> = (0..nx)
            .into_par_iter()
            .map(|ix| {
                let x = range.x.value(ix, step);
                let mut row = Vec::with_capacity(ny * nz);
                for iy in 0..ny {
                    let y = range.y.value(iy, step);
                    for iz in 0..nz {
                        row.push(f(Point3::new(x, y, range.z.value(iz, step)))?);
                    }
                }
                Ok(row)
            })
            .collect();
        let mut out = Vec::with_capacity(range.cell_count());
        for row in rows {
            out.extend(row?);
        }
        Ok(out)
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub point: Point3,
    /// Exact error magnitude under the sweep's reference convention.
    pub exact_error: f64,
    /// First-order magnitude, measured from the base point.
    pub approx_error: f64,
    pub error_vector: Point3,
    /// Exact magnitude from the base point. Absent for cells read back from
    /// CSV, which do not carry it.
    pub base_error: Option<f64>,
}

impl GridCell {
    fn from_report(report: &ErrorReport) -> Self {
        GridCell {
            point: report.true_point,
            exact_error: report.error_magnitude,
            approx_error: report.approx_error_magnitude,
            error_vector: report.error_vector,
            base_error: Some(report.base_error_magnitude()),
        }
    }

    /// `|exact - approx| / exact`, both from the base point.
    pub fn approx_gap(&self) -> Option<f64> {
        self.base_error
            .filter(|&e| e > MIN_COMPARABLE_ERROR)
            .map(|e| (e - self.approx_error).abs() / e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    #[serde(rename = "max_error_cm")]
    pub max_error: f64,
    #[serde(rename = "argmax_points_cm")]
    pub argmax_points: Vec<Point3>,
    #[serde(rename = "min_error_cm")]
    pub min_error: f64,
    #[serde(rename = "mean_error_cm")]
    pub mean_error: f64,
    pub cell_count: usize,
    /// Worst relative gap between exact and first-order magnitudes, both
    /// measured from the base point.
    pub max_approx_vs_exact_gap: Option<f64>,
}

impl SweepSummary {
    pub fn from_cells(cells: &[GridCell]) -> Result<Self> {
        let argmax_points = find_argmax(cells)?;
        let max_error = cells.iter().map(|c| c.exact_error).fold(f64::MIN, f64::max);
        let min_error = cells.iter().map(|c| c.exact_error).fold(f64::MAX, f64::min);
        let sum: f64 = cells.iter().map(|c| c.exact_error).sum();
        let max_gap = cells
            .iter()
            .filter_map(GridCell::approx_gap)
            .fold(None, |acc: Option<f64>, g| {
                Some(acc.map_or(g, |a| a.max(g)))
            });
        Ok(SweepSummary {
            max_error,
            argmax_points,
            min_error,
            mean_error: sum / cells.len() as f64,
            cell_count: cells.len(),
            max_approx_vs_exact_gap: max_gap,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub cells: Vec<GridCell>,
    pub summary: SweepSummary,
}

/// Evaluates the configured error at every grid point on the global rayon
/// pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let cells = cfg.map_grid(|p| {
        cfg.evaluate(p, cfg.convention)
            .map(|r| GridCell::from_report(&r))
    })?;
    let summary = SweepSummary::from_cells(&cells)?;
    Ok(SweepOutput { cells, summary })
}

/// Same as [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: usize) -> Result<SweepOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_sweep(cfg))
}

/// All points whose error is within [`ARGMAX_TOLERANCE`] of the maximum, in
/// the order they appear.
pub fn find_argmax(cells: &[GridCell]) -> Result<Vec<Point3>> {
    if cells.is_empty() {
        return Err(Error::EmptySweep);
    }
    let max = cells.iter().map(|c| c.exact_error).fold(f64::MIN, f64::max);
    Ok(cells
        .iter()
        .filter(|c| max - c.exact_error <= ARGMAX_TOLERANCE)
        .map(|c| c.point)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRow {
    pub point: Point3,
    pub exact: f64,
    pub approx: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxComparison {
    /// Largest relative gap, zero when no cell has a measurable error.
    pub worst_gap: f64,
    pub worst_point: Option<Point3>,
    /// Every cell with exact error above [`MIN_COMPARABLE_ERROR`].
    pub rows: Vec<ApproxRow>,
    /// Rows whose gap exceeds the tolerance.
    pub offenders: Vec<ApproxRow>,
}

/// Compares exact and first-order error magnitudes over the grid, both from
/// the base point regardless of `cfg.convention`. A zero displacement is
/// allowed and yields an empty table.
pub fn compare_exact_vs_approx(cfg: &SweepConfig, tolerance: f64) -> Result<ApproxComparison> {
    cfg.validate_geometry()?;
    let rows: Vec<ApproxRow> = cfg
        .map_grid(|p| cfg.evaluate(p, ReferenceConvention::BasePoint))?
        .into_iter()
        .filter(|r| r.error_magnitude > MIN_COMPARABLE_ERROR)
        .map(|r| ApproxRow {
            point: r.true_point,
            exact: r.error_magnitude,
            approx: r.approx_error_magnitude,
            gap: (r.error_magnitude - r.approx_error_magnitude).abs() / r.error_magnitude,
        })
        .collect();
    let mut worst_gap = 0.0;
    let mut worst_point = None;
    for row in &rows {
        if row.gap > worst_gap {
            worst_gap = row.gap;
            worst_point = Some(row.point);
        }
    }
    let offenders = rows.iter().copied().filter(|r| r.gap > tolerance).collect();
    Ok(ApproxComparison {
        worst_gap,
        worst_point,
        rows,
        offenders,
    })
}
