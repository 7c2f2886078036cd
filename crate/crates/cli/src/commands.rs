use std::path::Path;

use ushaptic_core::field::fmt_f64;
use ushaptic_core::scenario::{load_scenario_with, Override, Scenario, TrackingMode};
use ushaptic_core::sim::{self, write_profile_csv, write_trace_csv};
use ushaptic_core::validation;
use ushaptic_core::{field_map as compute_field_map, Error, Vec3};

use crate::output::write_atomic;
use crate::Common;

/// Stable exit statuses, one per error class.
pub mod exit {
    pub const OTHER: u8 = 1;
    pub const IO: u8 = 3;
    /// Scenario file is not valid TOML or does not match the schema.
    pub const PARSE: u8 = 4;
    /// A key or value is invalid (bad range, cross-field conflict, bad override).
    pub const CONFIG: u8 = 5;
    /// Solver, tracking or geometry failure while simulating.
    pub const SOLVER: u8 = 6;
    pub const VALIDATION: u8 = 7;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: exit::IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Io { .. } => exit::IO,
            Error::Parse { .. } | Error::Format { .. } => exit::PARSE,
            Error::Config { .. } | Error::InvalidParameter { .. } => exit::CONFIG,
            Error::NonConvergence { .. } | Error::CoincidentPoint { .. } | Error::TrackingLost(_) => exit::SOLVER,
            _ => exit::OTHER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

fn load(path: &Path, common: &Common) -> Result<Scenario, CliError> {
    let overrides = common
        .overrides
        .iter()
        .map(|s| s.parse::<Override>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(load_scenario_with(path, &overrides)?)
}

fn focus_for(s: &Scenario, focus: Option<[f64; 3]>) -> Vec3 {
    focus.map(Vec3::from).unwrap_or(s.field_focus)
}

pub fn run(path: &Path, common: &Common) -> CliResult {
    let s = load(path, common)?;
    let dir = &common.output_dir;
    let out = match sim::run(&s) {
        Ok(out) => out,
        Err(failure) => {
            let written = write_atomic(dir, &s.output.trace_file, |w| write_trace_csv(&failure.partial, w))?;
            let mut err = CliError::from(failure.error);
            err.message
                .push_str(&format!("; partial trace ({} records) in {}", failure.partial.len(), written.display()));
            return Err(err);
        }
    };

    write_atomic(dir, &s.output.trace_file, |w| write_trace_csv(&out.records, w))?;
    write_atomic(dir, &s.output.summary_file, |w| out.summary.write_report(w))?;
    write_atomic(dir, &s.output.profile_file, |w| write_profile_csv(&out.summary.profile, w))?;

    let every = s.output.frames_every;
    if every > 0 && s.tracking == TrackingMode::SyntheticCamera {
        for r in out.records.iter().step_by(every) {
            let tick = (r.t * s.control_rate).round() as usize;
            let frame = sim::render_camera_frame(&s, r.x_fin)?;
            write_atomic(dir, &format!("frames/frame_{tick:06}.ppm"), |w| frame.write_ppm(w))?;
            write_atomic(dir, &format!("frames/frame_{tick:06}.depth"), |w| frame.write_depth(w))?;
        }
    }

    if !common.quiet {
        let mut stdout = std::io::stdout().lock();
        out.summary
            .write_report(&mut stdout)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    Ok(())
}

pub fn field_map(path: &Path, focus: Option<[f64; 3]>, common: &Common) -> CliResult {
    let s = load(path, common)?;
    let focus = focus_for(&s, focus);
    let phases = s.array.solve_focus_phases(&focus)?;
    let grid = compute_field_map(&s.array, &phases, &s.field_grid)?;
    let written = write_atomic(&common.output_dir, &s.output.field_file, |w| grid.write_csv(w))?;
    if !common.quiet {
        let [nu, nv] = grid.spec.resolution;
        println!("cells = {}", nu * nv);
        if let Some(((i, j), peak)) = grid.max_cell() {
            let p = grid.get(i, j).point;
            println!("peak_abs_p_pa = {}", fmt_f64(peak));
            println!("peak_at_m = {},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
        }
        println!("invalid_cells = {}", grid.invalid_count());
        println!("written = {}", written.display());
    }
    Ok(())
}

pub fn phases(path: &Path, focus: Option<[f64; 3]>, common: &Common) -> CliResult {
    let s = load(path, common)?;
    let focus = focus_for(&s, focus);
    let phases = s.array.solve_focus_phases(&focus)?;
    let written = write_atomic(&common.output_dir, &s.output.phases_file, |w| {
        writeln!(w, "index,phase_rad")?;
        for (i, phi) in phases.as_slice().iter().enumerate() {
            writeln!(w, "{i},{}", fmt_f64(*phi))?;
        }
        Ok(())
    })?;
    if !common.quiet {
        println!("elements = {}", phases.len());
        println!("focus_m = {},{},{}", fmt_f64(focus.x), fmt_f64(focus.y), fmt_f64(focus.z));
        println!("written = {}", written.display());
    }
    Ok(())
}

pub fn validate(only: &[u8], quiet: bool) -> CliResult {
    let ids: Vec<u8> = if only.is_empty() {
        validation::criterion_ids().collect()
    } else {
        only.to_vec()
    };
    let mut passed = 0;
    for &id in &ids {
        let report = validation::run_criterion(id).ok_or_else(|| CliError {
            code: exit::CONFIG,
            message: format!("unknown criterion {id} (expected 1-10)"),
        })?;
        if !quiet {
            println!("{}", report.line());
        }
        passed += usize::from(report.passed);
    }
    println!("passed {passed}/{}", ids.len());
    if passed == ids.len() {
        Ok(())
    } else {
        Err(CliError {
            code: exit::VALIDATION,
            message: format!("{} of {} criteria failed", ids.len() - passed, ids.len()),
        })
    }
}
