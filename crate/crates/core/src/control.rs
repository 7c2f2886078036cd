//! Focus scheduling laws and virtual-surface reconstruction.
//!
//! The curved-surface law moves the focus on the driving disk linearly
//! against the finger, `x_fo = −α · r_fo · x_fin / r_fin`, so that a full
//! finger stroke from `−r_fin` to `r_fin` carries the focus from `r_fo` to
//! `−r_fo` when `α = 1`. The edge law jumps the focus between `r_fo` and
//! `−r_fo` as the finger crosses zero.

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceLaw {
    /// Linear focus sweep with gain α ∈ (0, 1].
    Curved { alpha: f64 },
    /// Two-step focus jump at x_fin = 0.
    Edge,
}

impl SurfaceLaw {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceLaw::Curved { .. } => "curved",
            SurfaceLaw::Edge => "edge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Maximum focus offset on the driving disk (m).
    pub r_fo: f64,
    /// Half of the maximum finger travel (m).
    pub r_fin: f64,
    pub law: SurfaceLaw,
    /// Stroke direction in the device frame.
    pub stroke_axis: Vec2,
}

impl ControlParams {
    pub fn new(r_fo: f64, r_fin: f64, law: SurfaceLaw, stroke_axis: Vec2) -> Result<Self> {
        let p = Self {
            r_fo,
            r_fin,
            law,
            stroke_axis,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_fo.is_finite() && self.r_fo > 0.0) {
            return Err(Error::param("r_fo", format!("must be > 0, got {}", self.r_fo)));
        }
        if !(self.r_fin.is_finite() && self.r_fin > 0.0) {
            return Err(Error::param("r_fin", format!("must be > 0, got {}", self.r_fin)));
        }
        if let SurfaceLaw::Curved { alpha } = self.law {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
            }
        }
        if (self.stroke_axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::param("stroke_axis", "must be a unit vector"));
        }
        Ok(())
    }

    /// Checks `r_fo ≤ r_drive` for the device these parameters drive.
    pub fn check_device(&self, device: &DeviceSpec) -> Result<()> {
        if self.r_fo > device.r_drive {
            return Err(Error::param(
                "r_fo",
                format!(
                    "{} exceeds the driving-disk radius {}",
                    self.r_fo, device.r_drive
                ),
            ));
        }
        Ok(())
    }

    /// Focus command for the configured law.
    pub fn focus_offset(&self, finger: &FingerState) -> FocusCommand {
        match self.law {
            SurfaceLaw::Curved { alpha } => curved_surface_law(alpha, self.r_fo, self.r_fin, finger.x_fin),
            SurfaceLaw::Edge => FocusCommand {
                x_fo: edge_law(self.r_fo, finger.x_fin),
                clamped: false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerState {
    /// Signed coordinate along the stroke axis (m).
    pub x_fin: f64,
    /// m/s
    pub velocity: f64,
}

impl FingerState {
    pub fn at(x_fin: f64) -> Self {
        Self { x_fin, velocity: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusCommand {
    /// Focus offset on the driving disk along the stroke axis (m).
    pub x_fo: f64,
    /// The raw law output exceeded ±r_fo.
    pub clamped: bool,
}

/// Curved-surface law before clamping.
pub fn curved_surface_law_unclamped(alpha: f64, r_fo: f64, r_fin: f64, x_fin: f64) -> f64 {
    -alpha * r_fo * (x_fin / r_fin)
}

/// Curved-surface law, clamped to `[−r_fo, r_fo]`.
pub fn curved_surface_law(alpha: f64, r_fo: f64, r_fin: f64, x_fin: f64) -> FocusCommand {
    let raw = curved_surface_law_unclamped(alpha, r_fo, r_fin, x_fin);
    let x_fo = raw.clamp(-r_fo, r_fo);
    FocusCommand {
        x_fo,
        clamped: x_fo != raw,
    }
}

/// Edge law: `r_fo` for `x_fin ≤ 0`, `−r_fo` otherwise.
pub fn edge_law(r_fo: f64, x_fin: f64) -> f64 {
    if x_fin <= 0.0 {
        r_fo
    } else {
        -r_fo
    }
}

/// Finger position and tilt along the stroke axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeSample {
    pub x: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub x: f64,
    pub height: f64,
    pub slope: f64,
}

/// Integrates tan(θ) over x with the trapezoidal rule, anchored at 0.
pub fn reconstruct_surface(trace: &[SlopeSample]) -> Result<Vec<ProfilePoint>> {
    if trace.len() < 2 {
        return Err(Error::Profile(format!(
            "need at least 2 samples, got {}",
            trace.len()
        )));
    }
    for (i, w) in trace.windows(2).enumerate() {
        if !(w[1].x > w[0].x) {
            return Err(Error::Profile(format!(
                "x must be strictly increasing (sample {} at {} follows {})",
                i + 1,
                w[1].x,
                w[0].x
            )));
        }
    }
    if let Some(s) = trace.iter().find(|s| !(s.x.is_finite() && s.theta.is_finite())) {
        return Err(Error::Profile(format!("non-finite sample at x = {}", s.x)));
    }
    let mut height = 0.0;
    let mut out = Vec::with_capacity(trace.len());
    out.push(ProfilePoint {
        x: trace[0].x,
        height,
        slope: trace[0].theta,
    });
    for w in trace.windows(2) {
        height += 0.5 * (w[0].theta.tan() + w[1].theta.tan()) * (w[1].x - w[0].x);
        out.push(ProfilePoint {
            x: w[1].x,
            height,
            slope: w[1].theta,
        });
    }
    Ok(out)
}

/// Shape statistics of a reconstructed profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStats {
    /// Least-squares dθ/dx over the central half of the stroke (rad/m).
    pub center_curvature: f64,
    /// 1 / |center_curvature| (m); infinite for a flat profile.
    pub curvature_radius: f64,
    /// Largest |Δslope| between consecutive samples (rad).
    pub max_slope_jump: f64,
    /// x midway between the samples of the largest jump.
    pub max_slope_jump_x: f64,
    /// Largest |Δslope| excluding the largest jump (rad).
    pub slope_noise: f64,
    /// Slope never decreases along x.
    pub slope_monotone_increasing: bool,
    /// Slope never increases along x.
    pub slope_monotone_decreasing: bool,
}

pub fn profile_stats(profile: &[ProfilePoint]) -> Option<ProfileStats> {
    if profile.len() < 2 {
        return None;
    }
    let x_min = profile.first()?.x;
    let x_max = profile.last()?.x;
    let (lo, hi) = (
        x_min + 0.25 * (x_max - x_min),
        x_min + 0.75 * (x_max - x_min),
    );
    let central: Vec<&ProfilePoint> = profile.iter().filter(|p| p.x >= lo && p.x <= hi).collect();
    let center_curvature = if central.len() >= 2 {
        let n = central.len() as f64;
        let mx = central.iter().map(|p| p.x).sum::<f64>() / n;
        let ms = central.iter().map(|p| p.slope).sum::<f64>() / n;
        let sxx: f64 = central.iter().map(|p| (p.x - mx).powi(2)).sum();
        let sxs: f64 = central.iter().map(|p| (p.x - mx) * (p.slope - ms)).sum();
        sxs / sxx
    } else {
        0.0
    };
    let jumps: Vec<(f64, f64)> = profile
        .windows(2)
        .map(|w| ((w[1].slope - w[0].slope), 0.5 * (w[0].x + w[1].x)))
        .collect();
    let (imax, &(jmax, jx)) = jumps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.abs().total_cmp(&b.1 .0.abs()))?;
    let slope_noise = jumps
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, j)| j.0.abs())
        .fold(0.0, f64::max);
    Some(ProfileStats {
        center_curvature,
        curvature_radius: 1.0 / center_curvature.abs(),
        max_slope_jump: jmax.abs(),
        max_slope_jump_x: jx,
        slope_noise,
        slope_monotone_increasing: jumps.iter().all(|j| j.0 >= 0.0),
        slope_monotone_decreasing: jumps.iter().all(|j| j.0 <= 0.0),
    })
}
