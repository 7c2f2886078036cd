//! Shared vector and pose aliases.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector2, Vector3};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
/// Rigid transform (parent ← child).
pub type Pose = Isometry3<f64>;

/// Builds a pose from a translation and roll/pitch/yaw angles (rad).
pub fn pose_from(translation: [f64; 3], rpy: [f64; 3]) -> Pose {
    Pose::from_parts(
        Translation3::new(translation[0], translation[1], translation[2]),
        UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
    )
}

/// Wraps an angle into (-π, π].
pub fn wrap_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(std::f64::consts::TAU);
    if a > std::f64::consts::PI {
        a - std::f64::consts::TAU
    } else {
        a
    }
}

/// Canonical phase in [0, 2π).
pub fn canonical_phase(angle: f64) -> f64 {
    let a = angle.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if a >= std::f64::consts::TAU {
        0.0
    } else {
        a
    }
}
