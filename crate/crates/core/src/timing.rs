//! Localization error caused by a capture-time skew between the two cameras.
//!
//! Camera A images the marker at `p`; camera B images it slightly earlier or
//! later, after it has moved by a [`Displacement`]. Triangulating the mixed
//! pair of rays gives a reconstructed point that is off by more than the
//! physical movement. Both the exact offset and its first-order closed form
//! are reported.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, GeometryError, Result};
use crate::geometry::{
    angles_from_point_2d, angles_from_point_3d, point_from_angles_2d, point_from_angles_3d,
    AngleSet2, AngleSet3, CameraRig, Point2, Point3,
};

/// Above this movement (cm) the first-order fields stop being meaningful.
pub const LARGE_DISPLACEMENT_CM: f64 = 1.0;

/// Marker movement between the two captures, in cm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
    #[serde(default)]
    pub dz: f64,
}

impl Displacement {
    pub const ZERO: Displacement = Displacement::new(0.0, 0.0, 0.0);

    pub const fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { dx, dy, dz }
    }

    pub const fn planar(dx: f64, dy: f64) -> Self {
        Self { dx, dy, dz: 0.0 }
    }

    pub fn magnitude(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.dx * factor, self.dy * factor, self.dz * factor)
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.dz == 0.0
    }

    pub fn as_vector(&self) -> Point3 {
        Point3::new(self.dx, self.dy, self.dz)
    }

    fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dz.is_finite()
    }
}

/// Marker velocity (cm/s) together with the capture skew (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub velocity: [f64; 3],
    pub timing_skew_dt: f64,
}

impl MotionSpec {
    pub fn new(velocity: [f64; 3], timing_skew_dt: f64) -> Result<Self> {
        if !(timing_skew_dt.is_finite() && timing_skew_dt >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "timing skew must be a non-negative number of seconds, got {timing_skew_dt}"
            )));
        }
        if velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("velocity must be finite".into()));
        }
        Ok(Self {
            velocity,
            timing_skew_dt,
        })
    }
}

/// Movement accumulated over the skew: `velocity * dt`.
pub fn displacement_from_motion(m: MotionSpec) -> Displacement {
    let [vx, vy, vz] = m.velocity;
    let dt = m.timing_skew_dt;
    Displacement::new(vx * dt, vy * dt, vz * dt)
}

/// Which point the reconstructed position is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceConvention {
    /// The marker position seen by camera A.
    BasePoint,
    /// Halfway between the two capture positions.
    Midpoint,
}

impl ReferenceConvention {
    pub fn reference(self, p: Point3, disp: Displacement) -> Point3 {
        match self {
            ReferenceConvention::BasePoint => p,
            ReferenceConvention::Midpoint => p + disp.as_vector() * 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceConvention::BasePoint => "basepoint",
            ReferenceConvention::Midpoint => "midpoint",
        }
    }
}

impl fmt::Display for ReferenceConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "basepoint" | "base" => Ok(ReferenceConvention::BasePoint),
            "midpoint" | "mid" => Ok(ReferenceConvention::Midpoint),
            _ => Err(Error::InvalidInput(format!(
                "unknown reference convention '{s}' (expected basepoint or midpoint)"
            ))),
        }
    }
}

/// First-order error estimate, always measured from the base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxError {
    pub ex: f64,
    pub ey: f64,
    pub ez: f64,
    pub magnitude: f64,
}

impl ApproxError {
    pub fn vector(&self) -> Point3 {
        Point3::new(self.ex, self.ey, self.ez)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub convention: ReferenceConvention,
    #[serde(rename = "displacement_cm")]
    pub displacement: Displacement,
    #[serde(rename = "true_point_cm")]
    pub true_point: Point3,
    #[serde(rename = "displaced_point_cm")]
    pub displaced_point: Point3,
    #[serde(rename = "reconstructed_point_cm")]
    pub reconstructed_point: Point3,
    #[serde(rename = "reference_point_cm")]
    pub reference_point: Point3,
    #[serde(rename = "error_vector_cm")]
    pub error_vector: Point3,
    #[serde(rename = "error_magnitude_cm")]
    pub error_magnitude: f64,
    #[serde(rename = "approx_error_vector_cm")]
    pub approx_error_vector: Point3,
    #[serde(rename = "approx_error_magnitude_cm")]
    pub approx_error_magnitude: f64,
}

impl ErrorReport {
    fn build(
        p: Point3,
        disp: Displacement,
        reconstructed: Point3,
        conv: ReferenceConvention,
        approx: ApproxError,
    ) -> Self {
        let reference = conv.reference(p, disp);
        let error_vector = reconstructed - reference;
        ErrorReport {
            convention: conv,
            displacement: disp,
            true_point: p,
            displaced_point: p + disp.as_vector(),
            reconstructed_point: reconstructed,
            reference_point: reference,
            error_vector,
            error_magnitude: error_vector.norm(),
            approx_error_vector: approx.vector(),
            approx_error_magnitude: approx.magnitude,
        }
    }

    /// Distance from the reconstruction to the camera-A capture position.
    pub fn base_error_magnitude(&self) -> f64 {
        self.reconstructed_point.distance(self.true_point)
    }
}

pub(crate) fn check_displacement(disp: Displacement) -> Result<()> {
    if !disp.is_finite() {
        return Err(Error::InvalidInput("displacement must be finite".into()));
    }
    if disp.magnitude() > LARGE_DISPLACEMENT_CM {
        log::warn!(
            "displacement of {:.4} cm exceeds {LARGE_DISPLACEMENT_CM} cm; first-order estimates are unreliable",
            disp.magnitude()
        );
    }
    Ok(())
}

fn check_planar(disp: Displacement) -> Result<()> {
    if disp.dz != 0.0 {
        return Err(Error::InvalidInput(format!(
            "planar analysis needs dz = 0, got {}",
            disp.dz
        )));
    }
    Ok(())
}

/// Triangulates camera A's view of `p` with camera B's view of `p + disp`.
pub fn reconstruct_with_error_2d(rig: CameraRig, p: Point2, disp: Displacement) -> Result<Point2> {
    check_planar(disp)?;
    let moved = Point2::new(p.x + disp.dx, p.y + disp.dy);
    let first = angles_from_point_2d(rig, p)?;
    let second = angles_from_point_2d(rig, moved)?;
    let mixed = AngleSet2::from_alphas(first.alpha1, second.alpha2);
    Ok(point_from_angles_2d(rig, mixed)?)
}

pub fn localization_error_2d(
    rig: CameraRig,
    p: Point2,
    disp: Displacement,
    conv: ReferenceConvention,
) -> Result<ErrorReport> {
    check_displacement(disp)?;
    planar_report(rig, p, disp, conv)
}

pub(crate) fn planar_report(
    rig: CameraRig,
    p: Point2,
    disp: Displacement,
    conv: ReferenceConvention,
) -> Result<ErrorReport> {
    let reconstructed = reconstruct_with_error_2d(rig, p, disp)?;
    let approx = approx_error_2d(rig, p, disp);
    Ok(ErrorReport::build(
        p.to_3d(),
        disp,
        reconstructed.to_3d(),
        conv,
        approx,
    ))
}

/// First-order planar error from the base point.
///
/// With `k = (d Δy - x Δy + y Δx) / 2d` this is `ey = k`,
/// `ex = k (x + d) / y`. Only valid for `y > 0`; `dz` is ignored.
pub fn approx_error_2d(rig: CameraRig, p: Point2, disp: Displacement) -> ApproxError {
    approx_error_3d(rig, p.to_3d(), Displacement::planar(disp.dx, disp.dy))
}

/// First-order spatial error from the base point. Adds
/// `ez = (d Δz - x Δz + z Δx) / 2d` to the planar terms.
pub fn approx_error_3d(rig: CameraRig, p: Point3, disp: Displacement) -> ApproxError {
    let d = rig.half_separation();
    let Displacement { dx, dy, dz } = disp;
    let k = (d * dy - p.x * dy + p.y * dx) / (2.0 * d);
    let ex = (p.x + d) / p.y * k;
    let ey = k;
    let ez = (d * dz - p.x * dz + p.z * dx) / (2.0 * d);
    ApproxError {
        ex,
        ey,
        ez,
        magnitude: (ex * ex + ey * ey + ez * ez).sqrt(),
    }
}

pub fn reconstruct_with_error_3d(rig: CameraRig, p: Point3, disp: Displacement) -> Result<Point3> {
    let first = angles_from_point_3d(rig, p)?;
    let second = angles_from_point_3d(rig, p + disp.as_vector())?;
    let mixed = AngleSet3 {
        alpha2: second.alpha2,
        beta2: second.beta2,
        gamma2: second.gamma2,
        ..first
    };
    Ok(point_from_angles_3d(rig, mixed)?)
}

pub fn localization_error_3d(
    rig: CameraRig,
    p: Point3,
    disp: Displacement,
    conv: ReferenceConvention,
) -> Result<ErrorReport> {
    check_displacement(disp)?;
    spatial_report(rig, p, disp, conv)
}

pub(crate) fn spatial_report(
    rig: CameraRig,
    p: Point3,
    disp: Displacement,
    conv: ReferenceConvention,
) -> Result<ErrorReport> {
    let reconstructed = reconstruct_with_error_3d(rig, p, disp)?;
    let approx = approx_error_3d(rig, p, disp);
    Ok(ErrorReport::build(p, disp, reconstructed, conv, approx))
}

/// Closest approach between camera A's ray and camera B's ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewGap {
    /// Midpoint of the shortest connecting segment.
    pub midpoint: Point3,
    /// Length of that segment, in cm.
    pub gap: f64,
}

/// Measures how far apart the two rays pass. Camera A's ray comes from
/// `camera1`'s first triple and camera B's from `camera2`'s second triple.
///
/// Diagnostic only: the reconstructed points above do not use it.
pub fn skew_line_gap_3d(
    rig: CameraRig,
    camera1: &AngleSet3,
    camera2: &AngleSet3,
) -> std::result::Result<SkewGap, GeometryError> {
    let (a, b) = (rig.camera_a(), rig.camera_b());
    let u = camera1.camera1_direction();
    let v = camera2.camera2_direction();
    let w0 = a - b;
    let (uu, uv, vv) = (u.dot(u), u.dot(v), v.dot(v));
    let (uw, vw) = (u.dot(w0), v.dot(w0));
    let denominator = uu * vv - uv * uv;
    if denominator.abs() < crate::geometry::PARALLEL_TOLERANCE {
        return Err(GeometryError::ParallelRays { denominator });
    }
    let s = (uv * vw - vv * uw) / denominator;
    let t = (uu * vw - uv * uw) / denominator;
    let on_a = a + u * s;
    let on_b = b + v * t;
    Ok(SkewGap {
        midpoint: (on_a + on_b) * 0.5,
        gap: on_a.distance(on_b),
    })
}
