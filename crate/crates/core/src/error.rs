use thiserror::Error;

use crate::geometry::Point3;

/// Failures of the triangulation geometry itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// The two camera rays do not intersect at a finite point.
    #[error("camera rays are parallel (denominator {denominator:e})")]
    ParallelRays { denominator: f64 },
    #[error("reconstructed point lies on or behind the camera baseline (y = {y})")]
    BehindBaseline { y: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sweep produced no cells")]
    EmptySweep,
    #[error("grid cell ({}, {}, {}) failed: {source}", point.x, point.y, point.z)]
    Cell {
        point: Point3,
        #[source]
        source: GeometryError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True when the failure comes from the geometry (as opposed to bad
    /// input or I/O).
    pub fn is_geometry(&self) -> bool {
        matches!(self, Error::Geometry(_) | Error::Cell { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
