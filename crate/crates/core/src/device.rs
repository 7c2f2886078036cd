//! Finger-mounted disk device: geometry, hinge spring, quasi-static tilt and
//! the resulting skin contact point.
//!
//! Device frame: origin at the driving-disk center, +z along the push
//! direction (away from the array), stroke in the xy plane. Tilt is a pair of
//! angles `(θx, θy)`; a positive `θx` raises the +x edge of the driving disk
//! toward the array (rotation about +y), a positive `θy` raises the +y edge
//! (rotation about −x). Pushing the +x half therefore drives `θx` negative.

use nalgebra::{Point3, Rotation3, UnitQuaternion};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2, Vec3};

pub const STANDARD_GRAVITY: f64 = 9.806_65;
/// Torque balance tolerance, N·m.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-8;
/// Largest remaining fixed-point correction at convergence, rad. With a
/// soft hinge the torque tolerance alone admits several µrad of tilt error.
pub const EQUILIBRIUM_TILT_STEP: f64 = 1e-7;
pub const EQUILIBRIUM_MAX_ITERATIONS: usize = 200;
pub const DEFAULT_SKIN_GAIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    /// Stimulating disk radius (m).
    pub r_stim: f64,
    /// Driving disk radius (m).
    pub r_drive: f64,
    /// kg
    pub mass: f64,
    /// Per tilt axis, N·m/rad.
    pub hinge_stiffness: f64,
    /// rad
    pub max_tilt: f64,
    /// Mounting-part modulus (Pa). Metadata only.
    pub material_modulus: f64,
    pub gravity_enabled: bool,
    /// Hinge center relative to the driving-disk center, device frame.
    pub hinge_offset: Vec3,
    /// Center of mass of the tilting part relative to the driving-disk
    /// center, device frame. Only used with gravity.
    pub com_offset: Vec3,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        Self {
            r_stim: 0.0075,
            r_drive: 0.020,
            mass: 0.00185,
            hinge_stiffness: 2.0e-3,
            max_tilt: 0.35,
            material_modulus: 2.77e9,
            gravity_enabled: false,
            hinge_offset: Vec3::zeros(),
            com_offset: Vec3::zeros(),
        }
    }
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_stim", self.r_stim),
            ("r_drive", self.r_drive),
            ("mass", self.mass),
            ("hinge_stiffness", self.hinge_stiffness),
            ("material_modulus", self.material_modulus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.max_tilt > 0.0 && self.max_tilt < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param(
                "max_tilt",
                format!("must lie in (0, π/2), got {}", self.max_tilt),
            ));
        }
        Ok(())
    }
}

/// Rotation of the tilting part for a tilt pair.
pub fn tilt_rotation(tilt: Vec2) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vec3::y_axis(), tilt.x) * Rotation3::from_axis_angle(&Vec3::x_axis(), -tilt.y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState {
    /// world ← device frame
    pub mount_pose: Pose,
    pub tilt: Vec2,
}

impl DeviceState {
    pub fn new(mount_pose: Pose) -> Self {
        Self {
            mount_pose,
            tilt: Vec2::zeros(),
        }
    }

    pub fn with_tilt(self, tilt: Vec2) -> Self {
        Self { tilt, ..self }
    }

    /// Hinge center in world.
    pub fn hinge_world(&self, spec: &DeviceSpec) -> Vec3 {
        (self.mount_pose * Point3::from(spec.hinge_offset)).coords
    }

    /// Pose of the (tilted) driving disk: world ← disk frame.
    pub fn driving_disk_pose(&self, spec: &DeviceSpec) -> Pose {
        let h = spec.hinge_offset;
        let rot = tilt_rotation(self.tilt);
        let about_hinge = Pose::from_parts(
            (h - rot * h).into(),
            UnitQuaternion::from_rotation_matrix(&rot),
        );
        self.mount_pose * about_hinge
    }

    /// Projects a world torque about the hinge onto the tilt coordinates.
    pub fn tilt_torque(&self, torque_world: &Vec3) -> Vec2 {
        let local = self.mount_pose.rotation.inverse() * torque_world;
        Vec2::new(local.y, -local.x)
    }

    /// Gravity torque on the tilting part, in tilt coordinates.
    pub fn gravity_torque(&self, spec: &DeviceSpec) -> Vec2 {
        if !spec.gravity_enabled {
            return Vec2::zeros();
        }
        let com = (self.driving_disk_pose(spec) * Point3::from(spec.com_offset)).coords;
        let weight = Vec3::new(0.0, 0.0, -spec.mass * STANDARD_GRAVITY);
        self.tilt_torque(&(com - self.hinge_world(spec)).cross(&weight))
    }
}

/// Outcome of the tilt solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub tilt: Vec2,
    /// Per axis: tilt pinned at ±max_tilt with the load pushing further.
    pub clamped: [bool; 2],
    /// Torque evaluations used.
    pub evaluations: usize,
    /// ‖k·θ − τ(θ)‖ over unclamped axes, N·m.
    pub residual: f64,
    /// τ(θ) at the returned tilt.
    pub torque: Vec2,
}

/// Finds θ with `k·θ = τ(θ)` by damped fixed-point iteration on the tilt box.
///
/// The step length starts at 1 and halves whenever the residual grows.
/// Components whose spring-balance target lies outside ±max_tilt are pinned
/// to the bound and excluded from the residual.
pub fn equilibrium_tilt<F>(spec: &DeviceSpec, mut torque_fn: F) -> Result<Equilibrium>
where
    F: FnMut(Vec2) -> Result<Vec2>,
{
    let k = spec.hinge_stiffness;
    let m = spec.max_tilt;
    let mut tilt = Vec2::zeros();
    let mut damping = 1.0;
    let mut last_residual = f64::INFINITY;
    for evaluation in 1..=EQUILIBRIUM_MAX_ITERATIONS {
        let torque = torque_fn(tilt)?;
        let target = torque / k;
        let mut clamped = [false; 2];
        let mut residual_sq = 0.0;
        for axis in 0..2 {
            let t = target[axis];
            if t.abs() > m && tilt[axis].abs() == m && t.signum() == tilt[axis].signum() {
                clamped[axis] = true;
            } else {
                residual_sq += (k * tilt[axis] - torque[axis]).powi(2);
            }
        }
        let residual = residual_sq.sqrt();
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations: evaluation,
                last: tilt,
                residual,
            });
        }
        if residual < EQUILIBRIUM_TOLERANCE && residual / k < EQUILIBRIUM_TILT_STEP {
            return Ok(Equilibrium {
                tilt,
                clamped,
                evaluations: evaluation,
                residual,
                torque,
            });
        }
        if residual > last_residual {
            damping *= 0.5;
        }
        last_residual = residual;
        for axis in 0..2 {
            let t = target[axis];
            tilt[axis] = if t.abs() >= m {
                m.copysign(t)
            } else {
                (tilt[axis] + damping * (t - tilt[axis])).clamp(-m, m)
            };
        }
    }
    let torque = torque_fn(tilt)?;
    Err(Error::NonConvergence {
        iterations: EQUILIBRIUM_MAX_ITERATIONS,
        last: tilt,
        residual: (tilt * k - torque).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    /// Finger-pad frame, m.
    pub offset: Vec2,
    pub in_contact: bool,
    /// The linear model exceeded r_stim and was clamped.
    pub clamped: bool,
}

/// Linear skin-contact model: offset = skin_gain·tilt, limited to r_stim.
pub fn contact_point(spec: &DeviceSpec, tilt: Vec2, skin_gain: f64) -> ContactPoint {
    let raw = tilt * skin_gain;
    let n = raw.norm();
    let (offset, clamped) = if n > spec.r_stim {
        // unit direction first, so a single-axis offset lands exactly on ±r_stim
        ((raw / n) * spec.r_stim, true)
    } else {
        (raw, false)
    };
    ContactPoint {
        offset,
        in_contact: true,
        clamped,
    }
}

/// World position of the focus target `x_fo` along `stroke_axis` on the
/// untilted driving-disk plane.
pub fn focus_world_position(
    state: &DeviceState,
    spec: &DeviceSpec,
    x_fo: f64,
    stroke_axis: Vec2,
) -> Result<Vec3> {
    if !(x_fo.abs() <= spec.r_drive) {
        return Err(Error::param(
            "x_fo",
            format!("|{x_fo}| exceeds the driving-disk radius {}", spec.r_drive),
        ));
    }
    let local = Point3::new(x_fo * stroke_axis.x, x_fo * stroke_axis.y, 0.0);
    Ok((state.mount_pose * local).coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pose_from;
    use approx::assert_relative_eq;

    #[test]
    fn unloaded_spring_stays_flat() {
        let eq = equilibrium_tilt(&DeviceSpec::default(), |_| Ok(Vec2::zeros())).unwrap();
        assert_eq!(eq.tilt, Vec2::zeros());
        assert_eq!(eq.evaluations, 1);
    }

    #[test]
    fn constant_torque_gives_linear_tilt() {
        let spec = DeviceSpec::default();
        let tau = Vec2::new(1.0e-4, -2.0e-4);
        let eq = equilibrium_tilt(&spec, |_| Ok(tau)).unwrap();
        assert_eq!(eq.tilt, tau / spec.hinge_stiffness);
        assert!(eq.residual < EQUILIBRIUM_TOLERANCE);
    }

    #[test]
    fn tilt_dependent_torque_converges() {
        let spec = DeviceSpec::default();
        // softening load: τ(θ) = τ0 + c·θ with c < k
        let f = |t: Vec2| Ok(Vec2::new(1e-4 + 1.5e-3 * t.x, -1e-4 + 5e-4 * t.y));
        let eq = equilibrium_tilt(&spec, f).unwrap();
        assert_relative_eq!(eq.tilt.x, 1e-4 / (2e-3 - 1.5e-3), epsilon = 1e-4);
        assert_relative_eq!(eq.tilt.y, -1e-4 / (2e-3 - 5e-4), epsilon = 1e-4);
        assert!(eq.residual < EQUILIBRIUM_TOLERANCE);
    }

    #[test]
    fn oscillating_load_is_damped() {
        // τ = -1.8·k·θ + τ0: the undamped map has slope -1.8 and diverges.
        let spec = DeviceSpec::default();
        let k = spec.hinge_stiffness;
        let eq = equilibrium_tilt(&spec, |t| Ok(Vec2::new(2e-4 - 1.8 * k * t.x, 0.0))).unwrap();
        assert_relative_eq!(eq.tilt.x, 2e-4 / (2.8 * k), epsilon = 1e-5);
        assert!(eq.residual < EQUILIBRIUM_TOLERANCE);
    }

    #[test]
    fn saturating_load_clamps() {
        let spec = DeviceSpec::default();
        let eq = equilibrium_tilt(&spec, |_| Ok(Vec2::new(1.0, -1.0))).unwrap();
        assert_eq!(eq.tilt, Vec2::new(spec.max_tilt, -spec.max_tilt));
        assert_eq!(eq.clamped, [true, true]);
    }

    #[test]
    fn divergent_load_reports_last_iterate() {
        let spec = DeviceSpec::default();
        let mut calls = 0;
        // A torque that never settles.
        let err = equilibrium_tilt(&spec, |_| {
            calls += 1;
            Ok(Vec2::new(if calls % 2 == 0 { 1e-4 } else { -1e-4 }, 0.0))
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 200, .. }));
    }

    #[test]
    fn contact_examples() {
        let spec = DeviceSpec::default();
        assert_eq!(contact_point(&spec, Vec2::zeros(), 0.05).offset, Vec2::zeros());
        let c = contact_point(&spec, Vec2::new(0.1, 0.0), 0.05);
        assert_relative_eq!(c.offset, Vec2::new(0.005, 0.0), epsilon = 1e-15);
        assert!(!c.clamped && c.in_contact);
        let c = contact_point(&spec, Vec2::new(0.3, 0.0), 0.05);
        assert_eq!(c.offset, Vec2::new(0.0075, 0.0));
        assert!(c.clamped);
        // rounding-level cross-axis tilt must not perturb the clamped value
        for t in [0.16, 0.1873, 0.18934125998867, -0.2, 0.35] {
            let c = contact_point(&spec, Vec2::new(t, 3.7e-17), 0.05);
            assert_eq!(c.offset.x, 0.0075f64.copysign(t));
        }
    }

    #[test]
    fn focus_targets() {
        let spec = DeviceSpec::default();
        let id = DeviceState::new(Pose::identity());
        let axis = Vec2::new(1.0, 0.0);
        assert_eq!(focus_world_position(&id, &spec, 0.0, axis).unwrap(), Vec3::zeros());
        assert_eq!(
            focus_world_position(&id, &spec, 0.02, axis).unwrap(),
            Vec3::new(0.02, 0.0, 0.0)
        );
        let moved = DeviceState::new(pose_from([0.1, 0.0, 0.2], [0.0; 3]));
        assert_relative_eq!(
            focus_world_position(&moved, &spec, 0.02, axis).unwrap(),
            Vec3::new(0.12, 0.0, 0.2),
            epsilon = 1e-15
        );
        assert!(focus_world_position(&id, &spec, 0.021, axis).is_err());
    }

    #[test]
    fn tilt_conventions() {
        let spec = DeviceSpec::default();
        let s = DeviceState::new(Pose::identity()).with_tilt(Vec2::new(0.1, 0.0));
        let edge = s.driving_disk_pose(&spec) * Point3::new(0.02, 0.0, 0.0);
        // +θx raises the +x edge toward the array (−z)
        assert!(edge.z < 0.0);
        let s = DeviceState::new(Pose::identity()).with_tilt(Vec2::new(0.0, 0.1));
        let edge = s.driving_disk_pose(&spec) * Point3::new(0.0, 0.02, 0.0);
        assert!(edge.z < 0.0);
        // pushing +x along +z gives negative θx torque
        let push = Vec3::new(0.01, 0.0, 0.0).cross(&Vec3::new(0.0, 0.0, 1.0));
        assert!(s.tilt_torque(&push).x < 0.0);
        let push = Vec3::new(0.0, 0.01, 0.0).cross(&Vec3::new(0.0, 0.0, 1.0));
        assert!(s.tilt_torque(&push).y < 0.0);
    }

    #[test]
    fn gravity_torque_is_a_pendulum() {
        let spec = DeviceSpec {
            gravity_enabled: true,
            com_offset: Vec3::new(0.0, 0.0, -0.005),
            ..DeviceSpec::default()
        };
        let flat = DeviceState::new(Pose::identity());
        assert_relative_eq!(flat.gravity_torque(&spec).norm(), 0.0, epsilon = 1e-18);
        // COM below the hinge: gravity restores the tilt
        let tilted = flat.with_tilt(Vec2::new(0.1, 0.0));
        let t = tilted.gravity_torque(&spec);
        assert!(t.x < 0.0);
        assert_relative_eq!(t.x, -0.005 * 0.1f64.sin() * spec.mass * STANDARD_GRAVITY, max_relative = 1e-12);
        let off = DeviceSpec {
            gravity_enabled: false,
            ..spec
        };
        assert_eq!(tilted.gravity_torque(&off), Vec2::zeros());
    }

    #[test]
    fn device_parameters_are_validated() {
        assert!(DeviceSpec::default().validate().is_ok());
        let bad = DeviceSpec {
            max_tilt: 2.0,
            ..DeviceSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = DeviceSpec {
            mass: 0.0,
            ..DeviceSpec::default()
        };
        assert!(bad.validate().is_err());
    }
}
