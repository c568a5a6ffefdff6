//! Two-camera marker triangulation and the localization error caused by a
//! capture-time skew between the cameras.
//!
//! - [`geometry`]: forward projection (point to per-camera angles) and
//!   triangulation (angles to point), planar and spatial.
//! - [`timing`]: exact and first-order error when camera B captures a moved
//!   marker.
//! - [`sweep`]: error over a gridded operating volume, maxima, and
//!   exact-versus-approximate comparison.
//! - [`io`]: run configuration, CSV/JSON/SVG outputs.

pub mod error;
pub mod geometry;
pub mod io;
pub mod sweep;
pub mod timing;

pub use error::{Error, GeometryError, Result};
pub use geometry::{
    angles_from_point_2d, angles_from_point_3d, point_from_angles_2d, point_from_angles_3d,
    AngleSet2, AngleSet3, CameraRig, Point2, Point3,
};
pub use sweep::{
    compare_exact_vs_approx, find_argmax, run_sweep, run_sweep_with_threads, AxisRange, GridCell,
    Mode, OperatingRange, SweepConfig, SweepOutput, SweepSummary,
};
pub use timing::{
    approx_error_2d, approx_error_3d, displacement_from_motion, localization_error_2d,
    localization_error_3d, reconstruct_with_error_2d, reconstruct_with_error_3d, skew_line_gap_3d,
    ApproxError, Displacement, ErrorReport, MotionSpec, ReferenceConvention, SkewGap,
};
