//! Forward projection and triangulation for a two-camera rig.
//!
//! Camera A sits at `(-d, 0, 0)` and camera B at `(+d, 0, 0)`. The origin is
//! the baseline midpoint, `+Y` points into the field of view and `+Z` is up.
//! Each camera reports the angles its marker ray makes with the coordinate
//! axes; in the planar case only the angle with `+X` is independent.
//!
//! Lengths are centimetres and angles radians throughout.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Denominators below this magnitude are treated as parallel rays.
pub const PARALLEL_TOLERANCE: f64 = 1e-12;

/// Baseline geometry of the rig.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    half_separation: f64,
}

impl CameraRig {
    /// `half_separation` is `d`, half the distance between the cameras.
    pub fn new(half_separation: f64) -> Result<Self, GeometryError> {
        if !(half_separation.is_finite() && half_separation > 0.0) {
            return Err(GeometryError::DegenerateGeometry(format!(
                "half separation must be positive and finite, got {half_separation}"
            )));
        }
        Ok(Self { half_separation })
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    pub fn camera_a(&self) -> Point3 {
        Point3::new(-self.half_separation, 0.0, 0.0)
    }

    pub fn camera_b(&self) -> Point3 {
        Point3::new(self.half_separation, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_3d(self) -> Point3 {
        Point3::new(self.x, self.y, 0.0)
    }
}

/// A position in camera coordinates. Also used for per-axis offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_2d(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Planar observation: each camera's angle with `+X` and with `+Y`.
///
/// `beta = pi/2 - alpha` always holds, so beta goes negative for obtuse alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet2 {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl AngleSet2 {
    pub fn from_alphas(alpha1: f64, alpha2: f64) -> Self {
        Self {
            alpha1,
            beta1: FRAC_PI_2 - alpha1,
            alpha2,
            beta2: FRAC_PI_2 - alpha2,
        }
    }
}

/// Spatial observation: the angles of each camera's ray with the X, Y and Z
/// axes. Their cosines are the ray's direction cosines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet3 {
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub gamma2: f64,
}

impl AngleSet3 {
    /// Unit direction of camera A's ray.
    pub fn camera1_direction(&self) -> Point3 {
        Point3::new(self.alpha1.cos(), self.beta1.cos(), self.gamma1.cos())
    }

    /// Unit direction of camera B's ray.
    pub fn camera2_direction(&self) -> Point3 {
        Point3::new(self.alpha2.cos(), self.beta2.cos(), self.gamma2.cos())
    }

    /// `cos²α + cos²β + cos²γ - 1` for each camera.
    pub fn direction_cosine_residuals(&self) -> [f64; 2] {
        let d1 = self.camera1_direction();
        let d2 = self.camera2_direction();
        [d1.dot(d1) - 1.0, d2.dot(d2) - 1.0]
    }

    fn angles(&self) -> [f64; 6] {
        [
            self.alpha1,
            self.beta1,
            self.gamma1,
            self.alpha2,
            self.beta2,
            self.gamma2,
        ]
    }
}

fn require_in_front(y: f64) -> Result<(), GeometryError> {
    if y > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::DegenerateGeometry(format!(
            "marker must be in front of the baseline (y > 0), got y = {y}"
        )))
    }
}

/// Angles each camera reports for a marker at `p`.
///
/// Uses a two-argument arctangent so a marker left of a camera yields an
/// obtuse angle in `(pi/2, pi)`.
pub fn angles_from_point_2d(rig: CameraRig, p: Point2) -> Result<AngleSet2, GeometryError> {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(GeometryError::DegenerateGeometry(format!(
            "non-finite point ({}, {})",
            p.x, p.y
        )));
    }
    require_in_front(p.y)?;
    let d = rig.half_separation();
    Ok(AngleSet2::from_alphas(
        p.y.atan2(p.x + d),
        p.y.atan2(p.x - d),
    ))
}

/// Intersects the two planar camera rays.
///
/// Solves `y = 2d / (cot α1 - cot α2)` and `x = y cot α1 - d`, which is the
/// tangent form `2d tan α1 tan α2 / (tan α2 - tan α1)` without the pole at
/// `α = pi/2`.
pub fn point_from_angles_2d(rig: CameraRig, a: AngleSet2) -> Result<Point2, GeometryError> {
    for alpha in [a.alpha1, a.alpha2] {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(GeometryError::DegenerateGeometry(format!(
                "planar angle {alpha} outside (0, pi)"
            )));
        }
    }
    let d = rig.half_separation();
    let cot1 = a.alpha1.cos() / a.alpha1.sin();
    let cot2 = a.alpha2.cos() / a.alpha2.sin();
    let denominator = cot1 - cot2;
    if denominator.abs() < PARALLEL_TOLERANCE {
        return Err(GeometryError::ParallelRays { denominator });
    }
    let y = 2.0 * d / denominator;
    if y <= 0.0 {
        return Err(GeometryError::BehindBaseline { y });
    }
    Ok(Point2::new(y * cot1 - d, y))
}

/// Direction-cosine angles of the rays from each camera to `p`.
pub fn angles_from_point_3d(rig: CameraRig, p: Point3) -> Result<AngleSet3, GeometryError> {
    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
        return Err(GeometryError::DegenerateGeometry(format!(
            "non-finite point ({}, {}, {})",
            p.x, p.y, p.z
        )));
    }
    require_in_front(p.y)?;
    let d = rig.half_separation();
    let from_a = Point3::new(p.x + d, p.y, p.z);
    let from_b = Point3::new(p.x - d, p.y, p.z);
    let (r1, r2) = (from_a.norm(), from_b.norm());
    if r1 == 0.0 || r2 == 0.0 {
        return Err(GeometryError::DegenerateGeometry(
            "marker coincides with a camera".into(),
        ));
    }
    let angle = |c: f64, r: f64| (c / r).clamp(-1.0, 1.0).acos();
    Ok(AngleSet3 {
        alpha1: angle(from_a.x, r1),
        beta1: angle(from_a.y, r1),
        gamma1: angle(from_a.z, r1),
        alpha2: angle(from_b.x, r2),
        beta2: angle(from_b.y, r2),
        gamma2: angle(from_b.z, r2),
    })
}

/// Recovers a point from six direction-cosine angles.
///
/// The six ray equations over-determine the five unknowns `(x, y, z, r1, r2)`.
/// This resolves them with a fixed choice of five: `y` from the alpha/beta
/// pair, `z` from the alpha/gamma pair, and `x = (y / cos β1) cos α1 - d`.
/// When the two angle sets come from different points the result is that
/// particular resolution, not a least-squares fit.
///
/// The alpha/gamma denominator vanishes when both rays lie in the `z = 0`
/// plane (and on the line `x = -d, z = 0`). There `z` is taken from camera
/// B's ray at the recovered depth, `z = (y / cos β2) cos γ2`.
pub fn point_from_angles_3d(rig: CameraRig, a: AngleSet3) -> Result<Point3, GeometryError> {
    for angle in a.angles() {
        if !(0.0..=PI).contains(&angle) {
            return Err(GeometryError::DegenerateGeometry(format!(
                "direction angle {angle} outside [0, pi]"
            )));
        }
    }
    let d = rig.half_separation();
    let (ca1, cb1, cg1) = (a.alpha1.cos(), a.beta1.cos(), a.gamma1.cos());
    let (ca2, cb2, cg2) = (a.alpha2.cos(), a.beta2.cos(), a.gamma2.cos());

    let y_den = cb2 * ca1 - cb1 * ca2;
    if y_den.abs() < PARALLEL_TOLERANCE {
        return Err(GeometryError::ParallelRays { denominator: y_den });
    }
    let y = 2.0 * d * cb1 * cb2 / y_den;
    if y <= 0.0 || cb1 <= 0.0 || cb2 <= 0.0 {
        return Err(GeometryError::BehindBaseline { y });
    }

    let z_den = cg2 * ca1 - cg1 * ca2;
    let z = if z_den.abs() < PARALLEL_TOLERANCE {
        y / cb2 * cg2
    } else {
        2.0 * d * cg1 * cg2 / z_den
    };

    let x = y / cb1 * ca1 - d;
    Ok(Point3::new(x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn rig() -> CameraRig {
        CameraRig::new(25.0).unwrap()
    }

    #[test]
    fn rejects_non_positive_separation() {
        assert!(CameraRig::new(0.0).is_err());
        assert!(CameraRig::new(-1.0).is_err());
        assert!(CameraRig::new(f64::NAN).is_err());
    }

    #[test]
    fn symmetric_point_on_y_axis() {
        let a = angles_from_point_2d(rig(), Point2::new(0.0, 25.0)).unwrap();
        assert_abs_diff_eq!(a.alpha1, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha2, 3.0 * FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(a.beta1, FRAC_PI_2 - a.alpha1);
        assert_eq!(a.beta2, FRAC_PI_2 - a.alpha2);
    }

    #[test]
    fn point_above_camera_b() {
        let a = angles_from_point_2d(rig(), Point2::new(25.0, 25.0)).unwrap();
        assert_abs_diff_eq!(a.alpha1, 0.5f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha2, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn regression_fixture_angles() {
        let a = angles_from_point_2d(rig(), Point2::new(70.0, 240.0)).unwrap();
        assert_abs_diff_eq!(a.alpha1, (240.0f64 / 95.0).atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha2, (240.0f64 / 45.0).atan(), epsilon = 1e-15);
    }

    #[test]
    fn planar_projection_requires_positive_y() {
        for y in [0.0, -1.0] {
            assert!(matches!(
                angles_from_point_2d(rig(), Point2::new(3.0, y)),
                Err(GeometryError::DegenerateGeometry(_))
            ));
        }
        assert!(angles_from_point_2d(rig(), Point2::new(-25.0, 0.0)).is_err());
    }

    #[test]
    fn triangulates_known_angles() {
        let p = point_from_angles_2d(rig(), AngleSet2::from_alphas(FRAC_PI_4, 3.0 * FRAC_PI_4))
            .unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 25.0, epsilon = 1e-12);
    }

    #[test]
    fn planar_round_trip_fixture() {
        let p = Point2::new(70.0, 240.0);
        let q = point_from_angles_2d(rig(), angles_from_point_2d(rig(), p).unwrap()).unwrap();
        assert_abs_diff_eq!(q.x, p.x, epsilon = 1e-9);
        assert_abs_diff_eq!(q.y, p.y, epsilon = 1e-9);
    }

    #[test]
    fn mixed_captures_match_line_intersection() {
        // Exact intersection of A->(0,240) and B->(0,240.01), evaluated in
        // 40-digit arithmetic.
        let a1 = angles_from_point_2d(rig(), Point2::new(0.0, 240.0)).unwrap();
        let a2 = angles_from_point_2d(rig(), Point2::new(0.0, 240.01)).unwrap();
        let p = point_from_angles_2d(rig(), AngleSet2::from_alphas(a1.alpha1, a2.alpha2)).unwrap();
        assert_abs_diff_eq!(p.x, 0.000_520_822_482_864_940_3, epsilon = 1e-10);
        assert_abs_diff_eq!(p.y, 240.004_999_895_835_5, epsilon = 1e-9);
    }

    #[test]
    fn parallel_and_diverging_rays() {
        let parallel = AngleSet2::from_alphas(1.0, 1.0);
        assert!(matches!(
            point_from_angles_2d(rig(), parallel),
            Err(GeometryError::ParallelRays { .. })
        ));
        // Rays that only meet behind the cameras.
        let diverging = AngleSet2::from_alphas(2.0, 1.0);
        assert!(matches!(
            point_from_angles_2d(rig(), diverging),
            Err(GeometryError::BehindBaseline { .. })
        ));
        assert!(point_from_angles_2d(rig(), AngleSet2::from_alphas(0.0, 1.0)).is_err());
    }

    #[test]
    fn spatial_angles_in_plane() {
        let a = angles_from_point_3d(rig(), Point3::new(0.0, 25.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a.gamma1, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.gamma2, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha1, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(a.beta1, FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn spatial_angles_fixture() {
        let a = angles_from_point_3d(rig(), Point3::new(70.0, 240.0, -65.0)).unwrap();
        let r1 = (95.0f64 * 95.0 + 240.0 * 240.0 + 65.0 * 65.0).sqrt();
        let r2 = (45.0f64 * 45.0 + 240.0 * 240.0 + 65.0 * 65.0).sqrt();
        assert_abs_diff_eq!(a.alpha1, (95.0 / r1).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.beta1, (240.0 / r1).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.gamma1, (-65.0 / r1).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha2, (45.0 / r2).acos(), epsilon = 1e-15);
        for r in a.direction_cosine_residuals() {
            assert!(r.abs() < 1e-9);
        }
    }

    #[test]
    fn spatial_projection_rejects_baseline_points() {
        for y in [0.0, -1e-9] {
            assert!(matches!(
                angles_from_point_3d(rig(), Point3::new(0.0, y, 0.0)),
                Err(GeometryError::DegenerateGeometry(_))
            ));
        }
    }

    #[test]
    fn spatial_round_trip_and_planar_reduction() {
        let p = Point3::new(0.0, 25.0, 0.0);
        let q = point_from_angles_3d(rig(), angles_from_point_3d(rig(), p).unwrap()).unwrap();
        assert!(q.distance(p) < 1e-9);

        let p = Point3::new(-40.0, 130.0, 0.0);
        let q = point_from_angles_3d(rig(), angles_from_point_3d(rig(), p).unwrap()).unwrap();
        let q2 =
            point_from_angles_2d(rig(), angles_from_point_2d(rig(), p.to_2d()).unwrap()).unwrap();
        assert!(q.z.abs() < 1e-9);
        assert_abs_diff_eq!(q.x, q2.x, epsilon = 1e-9);
        assert_abs_diff_eq!(q.y, q2.y, epsilon = 1e-9);
    }

    #[test]
    fn depth_only_offset_keeps_height() {
        let a = angles_from_point_3d(rig(), Point3::new(0.0, 240.0, 50.0)).unwrap();
        let b = angles_from_point_3d(rig(), Point3::new(0.0, 240.01, 50.0)).unwrap();
        let mixed = AngleSet3 {
            alpha2: b.alpha2,
            beta2: b.beta2,
            gamma2: b.gamma2,
            ..a
        };
        let q = point_from_angles_3d(rig(), mixed).unwrap();
        assert_abs_diff_eq!(q.z, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn mirror_symmetry_of_planar_angles() {
        let p = Point2::new(33.0, 120.0);
        let a = angles_from_point_2d(rig(), p).unwrap();
        let m = angles_from_point_2d(rig(), Point2::new(-33.0, 120.0)).unwrap();
        assert_abs_diff_eq!(m.alpha1, PI - a.alpha2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.alpha2, PI - a.alpha1, epsilon = 1e-15);
    }
}
