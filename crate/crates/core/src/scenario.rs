//! Scenario files: TOML schema, `key=value` overrides and validation.
//!
//! Every key is optional; omitted keys take the defaults below. The full
//! schema with units is documented in `docs/scenario.md`.

use std::path::Path;

use serde::Deserialize;

use crate::array::{
    build_array, Directivity, GridLayout, Layout, MediumConfig, Transducer, TransducerArray,
    DEFAULT_AMPLITUDE, DEFAULT_APERTURE_RADIUS, DEFAULT_GRID, DEFAULT_PITCH,
};
use crate::control::{ControlParams, FingerState, SurfaceLaw};
use crate::device::{DeviceSpec, DEFAULT_SKIN_GAIN};
use crate::error::{Error, Result};
use crate::field::{GridSpec, Plane};
use crate::geometry::{pose_from, Pose, Vec2, Vec3};
use crate::radiation::{disk_quadrature, QuadratureRule, ReflectionModel, DEFAULT_QUADRATURE};
use crate::tracking::{CameraIntrinsics, ColorThresholds, Rgb};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumSection,
    pub array: ArraySection,
    pub device: DeviceSection,
    pub control: ControlSection,
    pub trajectory: TrajectorySection,
    pub simulation: SimulationSection,
    pub quadrature: QuadratureSection,
    pub camera: CameraSection,
    pub field_map: FieldMapSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MediumSection {
    pub speed_of_sound_m_s: f64,
    pub air_density_kg_m3: f64,
    pub frequency_hz: f64,
}

impl Default for MediumSection {
    fn default() -> Self {
        let m = MediumConfig::default();
        Self {
            speed_of_sound_m_s: m.speed_of_sound,
            air_density_kg_m3: m.air_density,
            frequency_hz: m.frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Grid,
    Explicit,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DirectivityKind {
    Omnidirectional,
    Piston,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    pub position_m: [f64; 3],
    #[serde(default = "default_normal")]
    pub normal: [f64; 3],
    #[serde(default = "default_amplitude")]
    pub amplitude_pa_m: f64,
}

fn default_normal() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_amplitude() -> f64 {
    DEFAULT_AMPLITUDE
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub layout: LayoutKind,
    pub nx: usize,
    pub ny: usize,
    pub pitch_m: f64,
    pub origin_m: [f64; 3],
    pub rotation_rpy_rad: [f64; 3],
    pub amplitude_pa_m: f64,
    pub elements: Vec<ElementEntry>,
    pub directivity: DirectivityKind,
    pub aperture_radius_m: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            layout: LayoutKind::Grid,
            nx: DEFAULT_GRID.0,
            ny: DEFAULT_GRID.1,
            pitch_m: DEFAULT_PITCH,
            origin_m: [0.0; 3],
            rotation_rpy_rad: [0.0; 3],
            amplitude_pa_m: DEFAULT_AMPLITUDE,
            elements: Vec::new(),
            directivity: DirectivityKind::Omnidirectional,
            aperture_radius_m: DEFAULT_APERTURE_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub r_stim_m: f64,
    pub r_drive_m: f64,
    pub mass_kg: f64,
    pub hinge_stiffness_nm_per_rad: f64,
    pub max_tilt_rad: f64,
    pub material_modulus_pa: f64,
    pub gravity_enabled: bool,
    pub hinge_offset_m: [f64; 3],
    pub com_offset_m: [f64; 3],
    pub skin_gain_m_per_rad: f64,
    pub reflection_coefficient: f64,
    pub mount_translation_m: [f64; 3],
    pub mount_rotation_rpy_rad: [f64; 3],
}

impl Default for DeviceSection {
    fn default() -> Self {
        let d = DeviceSpec::default();
        Self {
            r_stim_m: d.r_stim,
            r_drive_m: d.r_drive,
            mass_kg: d.mass,
            hinge_stiffness_nm_per_rad: d.hinge_stiffness,
            max_tilt_rad: d.max_tilt,
            material_modulus_pa: d.material_modulus,
            gravity_enabled: d.gravity_enabled,
            hinge_offset_m: d.hinge_offset.into(),
            com_offset_m: d.com_offset.into(),
            skin_gain_m_per_rad: DEFAULT_SKIN_GAIN,
            reflection_coefficient: ReflectionModel::default().coefficient(),
            mount_translation_m: [0.0, 0.0, 0.2],
            mount_rotation_rpy_rad: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Curved,
    Edge,
}

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_R_FO: f64 = 0.010;
pub const DEFAULT_R_FIN: f64 = 0.030;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub law: LawKind,
    /// Curved law only; defaults to 1.
    pub alpha: Option<f64>,
    pub r_fo_m: f64,
    pub r_fin_m: f64,
    pub stroke_axis: [f64; 2],
}

impl Default for ControlSection {
    fn default() -> Self {
        Self {
            law: LawKind::Curved,
            alpha: None,
            r_fo_m: DEFAULT_R_FO,
            r_fin_m: DEFAULT_R_FIN,
            stroke_axis: [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    LinearSweep,
    Samples,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: TrajectoryKind,
    /// Linear sweep only. Defaults: −r_fin → r_fin over 1 s.
    pub from_m: Option<f64>,
    pub to_m: Option<f64>,
    pub duration_s: Option<f64>,
    /// Samples only: `[t_s, x_fin_m]` pairs starting at t = 0.
    pub samples: Option<Vec<[f64; 2]>>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::LinearSweep,
            from_m: None,
            to_m: None,
            duration_s: None,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TrackingMode {
    Ideal,
    SyntheticCamera,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub control_rate_hz: f64,
    pub tracking_mode: TrackingMode,
    /// Worker threads for tick evaluation; 0 uses the global pool.
    pub threads: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            control_rate_hz: 1000.0,
            tracking_mode: TrackingMode::Ideal,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub n_r: usize,
    pub n_phi: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            n_r: DEFAULT_QUADRATURE.0,
            n_phi: DEFAULT_QUADRATURE.1,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSection {
    pub fx_px: f64,
    pub fy_px: f64,
    pub cx_px: f64,
    pub cy_px: f64,
    pub width_px: usize,
    pub height_px: usize,
    /// world ← camera (x right, y down, z forward)
    pub translation_m: [f64; 3],
    pub rotation_rpy_rad: [f64; 3],
    pub marker_radius_m: f64,
    pub marker_color: Rgb,
    pub background_color: Rgb,
    /// `[r_min, g_max, b_max]`
    pub thresholds: [u8; 3],
}

impl Default for CameraSection {
    fn default() -> Self {
        let k = CameraIntrinsics::default();
        let t = ColorThresholds::default();
        Self {
            fx_px: k.fx,
            fy_px: k.fy,
            cx_px: k.cx,
            cy_px: k.cy,
            width_px: k.width,
            height_px: k.height,
            translation_m: [0.0, 0.0, 0.5],
            rotation_rpy_rad: [std::f64::consts::PI, 0.0, 0.0],
            marker_radius_m: 0.003,
            marker_color: [255, 0, 0],
            background_color: [40, 40, 40],
            thresholds: [t.r_min, t.g_max, t.b_max],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    Xy,
    Xz,
    Yz,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FieldMapSection {
    pub plane: PlaneKind,
    /// Defaults to the driving-disk center at the mount pose.
    pub center_m: Option<[f64; 3]>,
    pub extent_m: [f64; 2],
    pub resolution: [usize; 2],
    /// Focus used by `field-map` and `phases`; defaults to the disk center.
    pub focus_m: Option<[f64; 3]>,
}

impl Default for FieldMapSection {
    fn default() -> Self {
        Self {
            plane: PlaneKind::Xy,
            center_m: None,
            extent_m: [0.08, 0.08],
            resolution: [101, 101],
            focus_m: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub trace_file: String,
    pub summary_file: String,
    pub profile_file: String,
    pub field_file: String,
    pub phases_file: String,
    /// In synthetic-camera mode, write every n-th camera frame (0 = none).
    pub frames_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            trace_file: "trace.csv".into(),
            summary_file: "summary.txt".into(),
            profile_file: "profile.csv".into(),
            field_file: "field.csv".into(),
            phases_file: "phases.csv".into(),
            frames_every: 0,
        }
    }
}

/// Finger trajectory along the stroke axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    LinearSweep { from: f64, to: f64, duration: f64 },
    /// `(t, x_fin)` knots, strictly increasing in t, starting at t = 0.
    Samples(Vec<(f64, f64)>),
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match self {
            Trajectory::LinearSweep { duration, .. } => *duration,
            Trajectory::Samples(s) => s.last().map_or(0.0, |p| p.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Trajectory::LinearSweep { from, to, duration } => {
                if !(duration.is_finite() && *duration > 0.0) {
                    return Err(Error::config("trajectory.duration_s", format!("must be > 0, got {duration}")));
                }
                if !(from.is_finite() && to.is_finite()) {
                    return Err(Error::config("trajectory.from_m", "endpoints must be finite"));
                }
            }
            Trajectory::Samples(s) => {
                if s.len() < 2 {
                    return Err(Error::config("trajectory.samples", "needs at least two samples"));
                }
                if s[0].0 != 0.0 {
                    return Err(Error::config("trajectory.samples", "first sample must be at t = 0"));
                }
                if s.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
                    return Err(Error::config("trajectory.samples", "samples must be finite"));
                }
                if let Some(i) = s.windows(2).position(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::config(
                        "trajectory.samples",
                        format!("times must be strictly increasing (sample {})", i + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Finger state at time `t` (s), `0 ≤ t ≤ duration`.
    pub fn sample(&self, t: f64) -> Result<FingerState> {
        let duration = self.duration();
        if !(t >= 0.0 && t <= duration) {
            return Err(Error::param("t", format!("{t} s is outside [0, {duration}] s")));
        }
        Ok(match self {
            Trajectory::LinearSweep { from, to, duration } => FingerState {
                x_fin: from + (to - from) * (t / duration),
                velocity: (to - from) / duration,
            },
            Trajectory::Samples(s) => {
                // segment [i, i+1] with s[i].t ≤ t; the last knot uses the final segment
                let i = s.partition_point(|p| p.0 <= t).saturating_sub(1).min(s.len() - 2);
                let (t0, x0) = s[i];
                let (t1, x1) = s[i + 1];
                let slope = (x1 - x0) / (t1 - t0);
                FingerState {
                    x_fin: x0 + slope * (t - t0),
                    velocity: slope,
                }
            }
        })
    }
}

/// Free-function form of [`Trajectory::sample`].
pub fn sample_finger(trajectory: &Trajectory, t: f64) -> Result<FingerState> {
    trajectory.sample(t)
}

/// Camera model and marker rendering settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    pub intrinsics: CameraIntrinsics,
    /// world ← camera
    pub pose: Pose,
    pub marker_radius: f64,
    pub marker_color: Rgb,
    pub background: Rgb,
    pub thresholds: ColorThresholds,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub array: TransducerArray,
    pub device: DeviceSpec,
    /// world ← device frame at x_fin = 0.
    pub mount_pose: Pose,
    pub skin_gain: f64,
    pub reflection: ReflectionModel,
    pub control: ControlParams,
    pub trajectory: Trajectory,
    pub control_rate: f64,
    pub tracking: TrackingMode,
    pub threads: usize,
    pub quadrature: QuadratureRule,
    pub camera: CameraRig,
    pub field_grid: GridSpec,
    pub field_focus: Vec3,
    pub output: OutputSection,
}

impl Scenario {
    /// Scenario with every default.
    pub fn default_scenario() -> Self {
        Self::from_config(ScenarioConfig::default()).expect("defaults are valid")
    }

    pub fn from_toml_str(text: &str, overrides: &[Override]) -> Result<Self> {
        Self::from_config(parse_config(text, overrides, Path::new("<inline>"))?)
    }

    /// Stroke direction in world coordinates.
    pub fn stroke_axis_world(&self) -> Vec3 {
        let a = self.control.stroke_axis;
        self.mount_pose.rotation * Vec3::new(a.x, a.y, 0.0)
    }

    /// Number of control ticks, `⌈duration·rate⌉ + 1`.
    pub fn tick_count(&self) -> usize {
        let n = self.trajectory.duration() * self.control_rate;
        let r = n.round();
        let whole = if (n - r).abs() <= 1e-9 * r.max(1.0) { r } else { n.ceil() };
        whole as usize + 1
    }

    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        let c = &config;
        let medium = MediumConfig {
            speed_of_sound: c.medium.speed_of_sound_m_s,
            air_density: c.medium.air_density_kg_m3,
            frequency: c.medium.frequency_hz,
        };
        medium.validate().map_err(|e| keyed("medium", e))?;

        let directivity = match c.array.directivity {
            DirectivityKind::Omnidirectional => Directivity::Omnidirectional,
            DirectivityKind::Piston => Directivity::Piston {
                aperture_radius: c.array.aperture_radius_m,
            },
        };
        let layout = match c.array.layout {
            LayoutKind::Grid => {
                if !c.array.elements.is_empty() {
                    return Err(Error::config("array.elements", "only valid with layout = \"explicit\""));
                }
                Layout::Grid(GridLayout {
                    nx: c.array.nx,
                    ny: c.array.ny,
                    pitch: c.array.pitch_m,
                    origin: c.array.origin_m.into(),
                    orientation: pose_from([0.0; 3], c.array.rotation_rpy_rad)
                        .rotation
                        .to_rotation_matrix(),
                    amplitude: c.array.amplitude_pa_m,
                })
            }
            LayoutKind::Explicit => Layout::Explicit(
                c.array
                    .elements
                    .iter()
                    .map(|e| Transducer {
                        position: e.position_m.into(),
                        normal: e.normal.into(),
                        amplitude: e.amplitude_pa_m,
                    })
                    .collect(),
            ),
        };
        let array = build_array(&layout, medium, directivity).map_err(|e| keyed("array", e))?;

        let d = &c.device;
        let device = DeviceSpec {
            r_stim: d.r_stim_m,
            r_drive: d.r_drive_m,
            mass: d.mass_kg,
            hinge_stiffness: d.hinge_stiffness_nm_per_rad,
            max_tilt: d.max_tilt_rad,
            material_modulus: d.material_modulus_pa,
            gravity_enabled: d.gravity_enabled,
            hinge_offset: d.hinge_offset_m.into(),
            com_offset: d.com_offset_m.into(),
        };
        device.validate().map_err(|e| keyed("device", e))?;
        if !(d.skin_gain_m_per_rad.is_finite() && d.skin_gain_m_per_rad >= 0.0) {
            return Err(Error::config("device.skin_gain_m_per_rad", "must be ≥ 0"));
        }
        let reflection = ReflectionModel::new(d.reflection_coefficient)
            .map_err(|e| Error::config("device.reflection_coefficient", e.to_string()))?;
        let mount_pose = pose_from(d.mount_translation_m, d.mount_rotation_rpy_rad);

        let law = match (c.control.law, c.control.alpha) {
            (LawKind::Curved, alpha) => SurfaceLaw::Curved {
                alpha: alpha.unwrap_or(DEFAULT_ALPHA),
            },
            (LawKind::Edge, None) => SurfaceLaw::Edge,
            (LawKind::Edge, Some(_)) => {
                return Err(Error::config(
                    "control.alpha",
                    "only valid for law = \"curved\" (the edge law has no speed coefficient)",
                ))
            }
        };
        let control = ControlParams::new(
            c.control.r_fo_m,
            c.control.r_fin_m,
            law,
            Vec2::from(c.control.stroke_axis),
        )
        .map_err(|e| keyed("control", e))?;
        control.check_device(&device).map_err(|e| {
            Error::config(
                "control.r_fo_m",
                format!("{} (device.r_drive_m)", e.root_message()),
            )
        })?;

        let t = &c.trajectory;
        let trajectory = match t.kind {
            TrajectoryKind::LinearSweep => {
                if t.samples.is_some() {
                    return Err(Error::config("trajectory.samples", "only valid with kind = \"samples\""));
                }
                Trajectory::LinearSweep {
                    from: t.from_m.unwrap_or(-control.r_fin),
                    to: t.to_m.unwrap_or(control.r_fin),
                    duration: t.duration_s.unwrap_or(1.0),
                }
            }
            TrajectoryKind::Samples => {
                for (key, v) in [("from_m", t.from_m), ("to_m", t.to_m), ("duration_s", t.duration_s)] {
                    if v.is_some() {
                        return Err(Error::config(
                            format!("trajectory.{key}"),
                            "only valid with kind = \"linear_sweep\"",
                        ));
                    }
                }
                let samples = t
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::config("trajectory.samples", "required with kind = \"samples\""))?;
                Trajectory::Samples(samples.iter().map(|s| (s[0], s[1])).collect())
            }
        };
        trajectory.validate()?;

        let s = &c.simulation;
        if !(s.control_rate_hz.is_finite() && s.control_rate_hz > 0.0) {
            return Err(Error::config("simulation.control_rate_hz", "must be > 0"));
        }

        let quadrature = disk_quadrature(device.r_drive, c.quadrature.n_r, c.quadrature.n_phi)
            .map_err(|e| keyed("quadrature", e))?;

        let cam = &c.camera;
        let intrinsics = CameraIntrinsics {
            fx: cam.fx_px,
            fy: cam.fy_px,
            cx: cam.cx_px,
            cy: cam.cy_px,
            width: cam.width_px,
            height: cam.height_px,
        };
        intrinsics.validate().map_err(|e| keyed("camera", e))?;
        if !(cam.marker_radius_m > 0.0) {
            return Err(Error::config("camera.marker_radius_m", "must be > 0"));
        }
        let camera = CameraRig {
            intrinsics,
            pose: pose_from(cam.translation_m, cam.rotation_rpy_rad),
            marker_radius: cam.marker_radius_m,
            marker_color: cam.marker_color,
            background: cam.background_color,
            thresholds: ColorThresholds {
                r_min: cam.thresholds[0],
                g_max: cam.thresholds[1],
                b_max: cam.thresholds[2],
            },
        };

        let f = &c.field_map;
        let disk_center = mount_pose.translation.vector;
        let field_grid = GridSpec {
            plane: match f.plane {
                PlaneKind::Xy => Plane::Xy,
                PlaneKind::Xz => Plane::Xz,
                PlaneKind::Yz => Plane::Yz,
            },
            center: f.center_m.map(Vec3::from).unwrap_or(disk_center),
            extent: f.extent_m,
            resolution: f.resolution,
        };
        field_grid.validate().map_err(|e| keyed("field_map", e))?;

        Ok(Self {
            array,
            device,
            mount_pose,
            skin_gain: d.skin_gain_m_per_rad,
            reflection,
            control,
            trajectory,
            control_rate: s.control_rate_hz,
            tracking: s.tracking_mode,
            threads: s.threads,
            quadrature,
            camera,
            field_grid,
            field_focus: f.focus_m.map(Vec3::from).unwrap_or(disk_center),
            output: c.output.clone(),
            config,
        })
    }
}

impl Error {
    fn root_message(&self) -> String {
        match self {
            Error::InvalidParameter { message, .. } => message.clone(),
            other => other.to_string(),
        }
    }
}

/// Re-keys a parameter error under its scenario section.
fn keyed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, message } => Error::Config {
            key: format!("{section}.{name}"),
            message,
        },
        other => other,
    }
}

/// A `dotted.key=value` override. The value is parsed as a TOML value,
/// falling back to a bare string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: toml::Value,
}

impl std::str::FromStr for Override {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::config(s, "override must have the form key=value"))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::config(key, "malformed key"));
        }
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        Ok(Self {
            key: key.to_string(),
            value,
        })
    }
}

fn apply_override(table: &mut toml::Table, o: &Override) -> Result<()> {
    let mut parts: Vec<&str> = o.key.split('.').collect();
    let leaf = parts.pop().expect("non-empty key");
    let mut cur = table;
    let mut path = String::new();
    for p in parts {
        if !path.is_empty() {
            path.push('.');
        }
        path.push_str(p);
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(&o.key, format!("`{path}` is not a table")))?;
    }
    cur.insert(leaf.to_string(), o.value.clone());
    Ok(())
}

/// Parses scenario text, applying overrides on top of the file's values.
pub fn parse_config(text: &str, overrides: &[Override], path: &Path) -> Result<ScenarioConfig> {
    let parse_err = |e: toml::de::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    if overrides.is_empty() {
        return toml::from_str(text).map_err(parse_err);
    }
    // validate the file alone first so its diagnostics keep line numbers
    toml::from_str::<ScenarioConfig>(text).map_err(parse_err)?;
    let mut table: toml::Table = toml::from_str(text).map_err(parse_err)?;
    for o in overrides {
        apply_override(&mut table, o)?;
        ScenarioConfig::deserialize(table.clone()).map_err(|e| Error::config(&o.key, e.to_string()))?;
    }
    ScenarioConfig::deserialize(table).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    load_scenario_with(path, &[])
}

pub fn load_scenario_with(path: &Path, overrides: &[Override]) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_config(parse_config(&text, overrides, path)?)
}
