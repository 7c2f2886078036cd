//! Simulator for a finger-mounted tilting-disk haptic device driven by an
//! airborne-ultrasound phased array.
//!
//! The per-tick chain is: finger position → (optional camera tracking) →
//! focus scheduling law → phase solve → radiation force and torque on the
//! driving disk → quasi-static hinge tilt → skin contact offset.

// `!(x > bound)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod control;
pub mod device;
pub mod error;
pub mod field;
pub mod geometry;
pub mod radiation;
pub mod scenario;
pub mod sim;
pub mod tracking;
pub mod validation;

pub use array::{
    build_array, directivity, pressure_at, solve_focus_phases, ComplexPressure, Directivity,
    GridLayout, Layout, MediumConfig, PhasePattern, Transducer, TransducerArray,
};
pub use control::{
    curved_surface_law, edge_law, reconstruct_surface, ControlParams, FingerState, ProfilePoint,
    SlopeSample, SurfaceLaw,
};
pub use device::{
    contact_point, equilibrium_tilt, focus_world_position, ContactPoint, DeviceSpec, DeviceState,
    Equilibrium,
};
pub use error::{Error, Result};
pub use field::{field_map, FieldGrid, GridSpec, Plane};
pub use geometry::{Pose, Vec2, Vec3};
pub use radiation::{
    disk_quadrature, force_torque_on_disk, radiation_pressure, ForceTorque, QuadratureRule,
    ReflectionModel,
};
pub use scenario::{load_scenario, load_scenario_with, sample_finger, Override, Scenario, ScenarioConfig, TrackingMode, Trajectory};
pub use sim::{run, step, write_profile_csv, write_trace_csv, ClampFlags, RunError, RunOutput, Summary, TraceRecord};
pub use tracking::{
    backproject, binary_color_filter, centroid, render_synthetic_frame, track, CameraIntrinsics,
    ColorThresholds, Frame, Marker, Mask,
};
