//! Acoustic radiation pressure on the driving disk and its net force/torque.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::array::{ComplexPressure, MediumConfig, PhasePattern, TransducerArray};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2, Vec3};

pub const DEFAULT_QUADRATURE: (usize, usize) = (24, 48);

/// Fraction of incident energy reflected by the disk surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionModel {
    reflection_coefficient: f64,
}

impl Default for ReflectionModel {
    fn default() -> Self {
        Self {
            reflection_coefficient: 1.0,
        }
    }
}

impl ReflectionModel {
    pub fn new(reflection_coefficient: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflection_coefficient) {
            return Err(Error::param(
                "reflection_coefficient",
                format!("must lie in [0, 1], got {reflection_coefficient}"),
            ));
        }
        Ok(Self {
            reflection_coefficient,
        })
    }

    pub fn coefficient(&self) -> f64 {
        self.reflection_coefficient
    }
}

/// Time-averaged radiation pressure `(1 + R)|p|² / (2ρc²)` for a pressure
/// amplitude `p`.
pub fn radiation_pressure(p: ComplexPressure, medium: &MediumConfig, reflection: &ReflectionModel) -> f64 {
    let c = medium.speed_of_sound;
    (1.0 + reflection.reflection_coefficient) * p.norm_sqr() / (2.0 * medium.air_density * c * c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePoint {
    /// Position in the disk plane (m).
    pub offset: Vec2,
    /// Area weight (m²).
    pub weight: f64,
}

/// Area quadrature over a disk.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<QuadraturePoint>,
    total_area: f64,
    radius: f64,
}

impl QuadratureRule {
    pub fn points(&self) -> &[QuadraturePoint] {
        &self.points
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Σ_q f(q)·w_q in point order.
    pub fn integrate(&self, mut f: impl FnMut(Vec2) -> f64) -> f64 {
        self.points.iter().map(|q| f(q.offset) * q.weight).sum()
    }
}

/// Polar midpoint rule with `n_r` rings and `n_phi` sectors.
pub fn disk_quadrature(radius: f64, n_r: usize, n_phi: usize) -> Result<QuadratureRule> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param("radius", format!("must be > 0, got {radius}")));
    }
    if n_r < 1 {
        return Err(Error::param("n_r", "needs at least one ring"));
    }
    if n_phi < 3 {
        return Err(Error::param("n_phi", format!("needs at least 3 sectors, got {n_phi}")));
    }
    let dr = radius / n_r as f64;
    let dphi = TAU / n_phi as f64;
    let mut points = Vec::with_capacity(n_r * n_phi);
    for i in 0..n_r {
        let r = (i as f64 + 0.5) * dr;
        let weight = r * dr * dphi;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            points.push(QuadraturePoint {
                offset: Vec2::new(r * phi.cos(), r * phi.sin()),
                weight,
            });
        }
    }
    Ok(QuadratureRule {
        points,
        total_area: PI * radius * radius,
        radius,
    })
}

/// Net radiation load on a disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceTorque {
    /// N
    pub force: Vec3,
    /// About the hinge, N·m.
    pub torque: Vec3,
}

/// Integrates radiation pressure over the disk.
///
/// `disk_pose` maps the disk frame (disk in its local xy plane, centered at
/// the origin) to world; pressure pushes along the local +z axis, which must
/// face away from the array. `hinge` is the torque reference point in world.
pub fn force_torque_on_disk(
    array: &TransducerArray,
    phases: &PhasePattern,
    disk_pose: &Pose,
    hinge: &Vec3,
    quadrature: &QuadratureRule,
    reflection: &ReflectionModel,
) -> Result<ForceTorque> {
    let normal = disk_pose.rotation * Vec3::z();
    let medium = *array.medium();
    let loads: Vec<Result<(Vec3, f64)>> = quadrature
        .points()
        .par_iter()
        .map(|q| {
            let world = disk_pose * nalgebra::Point3::new(q.offset.x, q.offset.y, 0.0);
            let p = array.pressure_at(phases, &world.coords)?;
            Ok((world.coords, radiation_pressure(p, &medium, reflection) * q.weight))
        })
        .collect();

    // fixed-order reduction
    let mut force = Vec3::zeros();
    let mut torque = Vec3::zeros();
    for load in loads {
        let (point, pw) = load?;
        let f = normal * pw;
        force += f;
        torque += (point - hinge).cross(&f);
    }
    Ok(ForceTorque { force, torque })
}
