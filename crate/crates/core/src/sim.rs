//! Time-stepped scenario engine and its trace, summary and profile outputs.
//!
//! Ticks are quasi-static and share only immutable scenario data, so they
//! are evaluated in parallel and collected in tick order. Every reduction
//! inside a tick runs in a fixed order, which makes the trace bit-identical
//! for any thread count.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::array::PhasePattern;
use crate::control::{profile_stats, reconstruct_surface, FingerState, ProfilePoint, ProfileStats, SlopeSample};
use crate::device::{contact_point, equilibrium_tilt, focus_world_position, DeviceState};
use crate::error::{Error, Result};
use crate::field::fmt_f64;
use crate::geometry::{Pose, Vec2, Vec3};
use crate::radiation::{force_torque_on_disk, ForceTorque};
use crate::scenario::{Scenario, TrackingMode};
use crate::tracking::{render_synthetic_frame, track, Frame, Marker};

pub const TRACE_CSV_HEADER: &str = "t_s,x_fin_m,x_fin_tracked_m,x_fo_m,focus_x_m,focus_y_m,focus_z_m,\
force_x_n,force_y_n,force_z_n,torque_x_nm,torque_y_nm,tilt_x_rad,tilt_y_rad,contact_x_m,contact_y_m,clamped";

pub const PROFILE_CSV_HEADER: &str = "x_m,height_m,slope_rad";

/// Which bounded quantities hit their limit during a tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampFlags {
    /// The law's output was limited to ±r_fo.
    pub x_fo: bool,
    pub tilt_x: bool,
    pub tilt_y: bool,
    /// The contact offset was limited to r_stim.
    pub contact: bool,
}

impl ClampFlags {
    pub fn any(&self) -> bool {
        self.x_fo || self.tilt_x || self.tilt_y || self.contact
    }
}

impl fmt::Display for ClampFlags {
    /// `none`, or the clamped names joined by `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.x_fo, "x_fo"),
            (self.tilt_x, "tilt_x"),
            (self.tilt_y, "tilt_y"),
            (self.contact, "contact"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("|"))
        }
    }
}

/// State of one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x_fin: f64,
    /// Equals `x_fin` in ideal tracking mode.
    pub x_fin_tracked: f64,
    pub x_fo: f64,
    pub focus_world: Vec3,
    /// Net radiation force on the driving disk, world frame.
    pub force: Vec3,
    /// Hinge torque in tilt coordinates at the equilibrium tilt.
    pub torque: Vec2,
    pub tilt: Vec2,
    pub contact_offset: Vec2,
    pub clamped: ClampFlags,
}

impl TraceRecord {
    pub fn write_csv_row<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let cols = [
            self.t,
            self.x_fin,
            self.x_fin_tracked,
            self.x_fo,
            self.focus_world.x,
            self.focus_world.y,
            self.focus_world.z,
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.tilt.x,
            self.tilt.y,
            self.contact_offset.x,
            self.contact_offset.y,
        ];
        for c in cols {
            write!(w, "{},", fmt_f64(c))?;
        }
        writeln!(w, "{}", self.clamped)
    }
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in records {
        r.write_csv_row(&mut w)?;
    }
    Ok(())
}

pub fn write_profile_csv<W: Write>(profile: &[ProfilePoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    for p in profile {
        writeln!(w, "{},{},{}", fmt_f64(p.x), fmt_f64(p.height), fmt_f64(p.slope))?;
    }
    Ok(())
}

/// Time of tick `i`, exactly `i / control_rate`.
pub fn tick_time(scenario: &Scenario, tick: usize) -> f64 {
    tick as f64 / scenario.control_rate
}

/// Device mount pose with the finger at `x_fin` along the stroke axis.
pub fn mount_pose_at(scenario: &Scenario, x_fin: f64) -> Pose {
    let mut pose = scenario.mount_pose;
    pose.translation.vector += scenario.stroke_axis_world() * x_fin;
    pose
}

/// Renders what the camera sees with the device at `x_fin`.
pub fn render_camera_frame(scenario: &Scenario, x_fin: f64) -> Result<Frame> {
    let cam = &scenario.camera;
    let marker_world = mount_pose_at(scenario, x_fin).translation.vector;
    let in_cam = cam.pose.inverse_transform_point(&marker_world.into()).coords;
    if !(in_cam.z > 0.0) {
        return Err(Error::TrackingLost(format!(
            "marker is behind the camera (z = {} m)",
            in_cam.z
        )));
    }
    let k = &cam.intrinsics;
    let marker = Marker {
        center_px: k.project(&in_cam),
        radius_px: k.fx * cam.marker_radius / in_cam.z,
        color: cam.marker_color,
    };
    render_synthetic_frame(&marker, cam.background, in_cam.z as f32, k)
}

/// Tracked finger coordinate along the stroke axis.
fn tracked_x_fin(scenario: &Scenario, x_fin: f64) -> Result<f64> {
    match scenario.tracking {
        TrackingMode::Ideal => Ok(x_fin),
        TrackingMode::SyntheticCamera => {
            let cam = &scenario.camera;
            let frame = render_camera_frame(scenario, x_fin)?;
            let seen = track(&frame, &cam.thresholds, &cam.intrinsics)
                .ok_or_else(|| Error::TrackingLost("no marker pixels with valid depth".into()))?;
            let world = cam.pose.transform_point(&seen.into()).coords;
            Ok((world - scenario.mount_pose.translation.vector).dot(&scenario.stroke_axis_world()))
        }
    }
}

/// Finger state at a tick; the final tick is held at the trajectory end
/// when the duration is not a whole number of ticks.
fn finger_at(scenario: &Scenario, tick: usize) -> Result<FingerState> {
    let t = tick_time(scenario, tick).min(scenario.trajectory.duration());
    scenario.trajectory.sample(t)
}

/// Radiation load on the driving disk in `state`, plus the total hinge
/// torque (radiation and gravity) in tilt coordinates.
pub fn hinge_load(scenario: &Scenario, state: &DeviceState, phases: &PhasePattern) -> Result<(ForceTorque, Vec2)> {
    let s = scenario;
    let ft = force_torque_on_disk(
        &s.array,
        phases,
        &state.driving_disk_pose(&s.device),
        &state.hinge_world(&s.device),
        &s.quadrature,
        &s.reflection,
    )?;
    let torque = state.tilt_torque(&ft.torque) + state.gravity_torque(&s.device);
    Ok((ft, torque))
}

/// Runs the full per-tick chain. Errors carry the tick index.
pub fn step(scenario: &Scenario, tick: usize) -> Result<TraceRecord> {
    step_inner(scenario, tick).map_err(|e| Error::Tick {
        tick,
        source: Box::new(e),
    })
}

fn step_inner(scenario: &Scenario, tick: usize) -> Result<TraceRecord> {
    let s = scenario;
    let finger = finger_at(s, tick)?;
    let x_tracked = tracked_x_fin(s, finger.x_fin)?;
    let command = s.control.focus_offset(&FingerState {
        x_fin: x_tracked,
        velocity: finger.velocity,
    });

    // focus is aimed using the tracked pose; the load acts on the true one
    let aimed = DeviceState::new(mount_pose_at(s, x_tracked));
    let focus = focus_world_position(&aimed, &s.device, command.x_fo, s.control.stroke_axis)?;
    let phases: PhasePattern = s.array.solve_focus_phases(&focus)?;

    let actual = DeviceState::new(mount_pose_at(s, finger.x_fin));
    let mut last = ForceTorque {
        force: Vec3::zeros(),
        torque: Vec3::zeros(),
    };
    let eq = equilibrium_tilt(&s.device, |tilt| {
        let (ft, torque) = hinge_load(s, &actual.with_tilt(tilt), &phases)?;
        last = ft;
        Ok(torque)
    })?;
    let contact = contact_point(&s.device, eq.tilt, s.skin_gain);

    Ok(TraceRecord {
        t: tick_time(s, tick),
        x_fin: finger.x_fin,
        x_fin_tracked: x_tracked,
        x_fo: command.x_fo,
        focus_world: focus,
        force: last.force,
        torque: eq.torque,
        tilt: eq.tilt,
        contact_offset: contact.offset,
        clamped: ClampFlags {
            x_fo: command.clamped,
            tilt_x: eq.clamped[0],
            tilt_y: eq.clamped[1],
            contact: contact.clamped,
        },
    })
}

/// Aggregate figures for a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub ticks: usize,
    pub duration: f64,
    pub law: &'static str,
    /// Largest tilt-vector norm, rad.
    pub max_abs_tilt: f64,
    /// Contact offset projected on the stroke axis: (min, max), m.
    pub contact_extent: (f64, f64),
    /// Contact offset never reverses direction along the stroke axis.
    pub contact_monotone: bool,
    pub x_fo_extent: (f64, f64),
    pub max_abs_force: f64,
    pub max_tracking_error: f64,
    pub clamped_ticks: usize,
    pub profile: Vec<ProfilePoint>,
    pub profile_stats: Option<ProfileStats>,
}

impl Summary {
    pub fn from_records(scenario: &Scenario, records: &[TraceRecord]) -> Result<Self> {
        let axis = scenario.control.stroke_axis;
        let along: Vec<f64> = records.iter().map(|r| r.contact_offset.dot(&axis)).collect();
        let extent = |v: &mut dyn Iterator<Item = f64>| {
            v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
        };
        let non_decreasing = along.windows(2).all(|w| w[1] >= w[0]);
        let non_increasing = along.windows(2).all(|w| w[1] <= w[0]);

        // slope along the stroke axis, sorted by x_fin with repeats dropped
        let mut samples: Vec<SlopeSample> = records
            .iter()
            .map(|r| SlopeSample {
                x: r.x_fin,
                theta: r.tilt.dot(&axis),
            })
            .collect();
        samples.sort_by(|a, b| a.x.total_cmp(&b.x));
        samples.dedup_by(|b, a| b.x == a.x);
        let profile = if samples.len() >= 2 {
            reconstruct_surface(&samples)?
        } else {
            Vec::new()
        };
        let profile_stats = profile_stats(&profile);

        Ok(Self {
            ticks: records.len(),
            duration: scenario.trajectory.duration(),
            law: scenario.control.law.name(),
            max_abs_tilt: records.iter().map(|r| r.tilt.norm()).fold(0.0, f64::max),
            contact_extent: extent(&mut along.iter().copied()),
            contact_monotone: non_decreasing || non_increasing,
            x_fo_extent: extent(&mut records.iter().map(|r| r.x_fo)),
            max_abs_force: records.iter().map(|r| r.force.norm()).fold(0.0, f64::max),
            max_tracking_error: records
                .iter()
                .map(|r| (r.x_fin_tracked - r.x_fin).abs())
                .fold(0.0, f64::max),
            clamped_ticks: records.iter().filter(|r| r.clamped.any()).count(),
            profile,
            profile_stats,
        })
    }

    /// `key = value` report, one entry per line.
    pub fn write_report<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let f = fmt_f64;
        writeln!(w, "ticks = {}", self.ticks)?;
        writeln!(w, "duration_s = {}", f(self.duration))?;
        writeln!(w, "law = {}", self.law)?;
        writeln!(w, "max_abs_tilt_rad = {}", f(self.max_abs_tilt))?;
        writeln!(w, "contact_min_m = {}", f(self.contact_extent.0))?;
        writeln!(w, "contact_max_m = {}", f(self.contact_extent.1))?;
        writeln!(w, "contact_sweep_m = {}", f(self.contact_extent.1 - self.contact_extent.0))?;
        writeln!(w, "contact_monotone = {}", self.contact_monotone)?;
        writeln!(w, "x_fo_min_m = {}", f(self.x_fo_extent.0))?;
        writeln!(w, "x_fo_max_m = {}", f(self.x_fo_extent.1))?;
        writeln!(w, "max_abs_force_n = {}", f(self.max_abs_force))?;
        writeln!(w, "max_tracking_error_m = {}", f(self.max_tracking_error))?;
        writeln!(w, "clamped_ticks = {}", self.clamped_ticks)?;
        writeln!(w, "profile_points = {}", self.profile.len())?;
        if let Some(s) = &self.profile_stats {
            writeln!(w, "profile_center_curvature_per_m = {}", f(s.center_curvature))?;
            writeln!(w, "profile_curvature_radius_m = {}", f(s.curvature_radius))?;
            writeln!(w, "profile_max_slope_jump_rad = {}", f(s.max_slope_jump))?;
            writeln!(w, "profile_max_slope_jump_x_m = {}", f(s.max_slope_jump_x))?;
            writeln!(w, "profile_slope_noise_rad = {}", f(s.slope_noise))?;
            writeln!(
                w,
                "profile_slope_monotone = {}",
                s.slope_monotone_increasing || s.slope_monotone_decreasing
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TraceRecord>,
    pub summary: Summary,
}

/// A failed run: the first failing tick's error plus every record before it.
#[derive(Debug, thiserror::Error)]
#[error("{error} ({} records completed)", partial.len())]
pub struct RunError {
    #[source]
    pub error: Error,
    pub partial: Vec<TraceRecord>,
}

/// Evaluates every tick and summarizes the trace.
pub fn run(scenario: &Scenario) -> std::result::Result<RunOutput, RunError> {
    let n = scenario.tick_count();
    let evaluate = || -> Vec<Result<TraceRecord>> { (0..n).into_par_iter().map(|i| step(scenario, i)).collect() };
    let results = if scenario.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(scenario.threads)
            .build()
            .map_err(|e| RunError {
                error: Error::param("threads", e.to_string()),
                partial: Vec::new(),
            })?;
        pool.install(evaluate)
    } else {
        evaluate()
    };

    let mut records = Vec::with_capacity(n);
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(error) => return Err(RunError { error, partial: records }),
        }
    }
    let summary = Summary::from_records(scenario, &records).map_err(|error| RunError {
        error,
        partial: records.clone(),
    })?;
    Ok(RunOutput { records, summary })
}
