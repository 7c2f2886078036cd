//! Batch evaluation of |p| over a planar grid of sample points.

use std::io::Write;

use rayon::prelude::*;

use crate::array::{ComplexPressure, PhasePattern, TransducerArray};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const FIELD_CSV_HEADER: &str = "x_m,y_m,z_m,abs_p_pa,phase_rad";

/// Axis-aligned sampling plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    /// Unit vectors of the in-plane (u, v) axes.
    fn axes(self) -> (Vec3, Vec3) {
        match self {
            Plane::Xy => (Vec3::x(), Vec3::y()),
            Plane::Xz => (Vec3::x(), Vec3::z()),
            Plane::Yz => (Vec3::y(), Vec3::z()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub plane: Plane,
    pub center: Vec3,
    /// Full side lengths along (u, v), m.
    pub extent: [f64; 2],
    /// Cell counts along (u, v).
    pub resolution: [usize; 2],
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution[0] < 2 || self.resolution[1] < 2 {
            return Err(Error::param("resolution", "must be at least 2×2"));
        }
        if !self.extent.iter().all(|e| e.is_finite() && *e > 0.0) {
            return Err(Error::param("extent", "must be > 0"));
        }
        Ok(())
    }

    /// Center of cell (i, j); `i` along u, `j` along v.
    pub fn cell_center(&self, i: usize, j: usize) -> Vec3 {
        let (eu, ev) = self.plane.axes();
        let [nu, nv] = self.resolution;
        let u = -0.5 * self.extent[0] + (i as f64 + 0.5) * self.extent[0] / nu as f64;
        let v = -0.5 * self.extent[1] + (j as f64 + 0.5) * self.extent[1] / nv as f64;
        self.center + eu * u + ev * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCell {
    pub point: Vec3,
    /// `None` when the cell center coincides with a transducer.
    pub pressure: Option<ComplexPressure>,
}

impl FieldCell {
    pub fn abs(&self) -> Option<f64> {
        self.pressure.map(|p| p.norm())
    }
}

/// Row-major (v outer, u inner) grid of sampled pressures.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    cells: Vec<FieldCell>,
}

impl FieldGrid {
    #[cfg(test)]
    pub(crate) fn from_cells(spec: GridSpec, cells: Vec<FieldCell>) -> Self {
        Self { spec, cells }
    }

    pub fn cells(&self) -> &[FieldCell] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldCell {
        &self.cells[j * self.spec.resolution[0] + i]
    }

    /// Index (i, j) and value of the largest valid |p|.
    pub fn max_cell(&self) -> Option<((usize, usize), f64)> {
        let nu = self.spec.resolution[0];
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(n, c)| c.abs().map(|a| ((n % nu, n / nu), a)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn invalid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.pressure.is_none()).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{FIELD_CSV_HEADER}")?;
        for c in &self.cells {
            let (a, ph) = match c.pressure {
                Some(p) => (fmt_f64(p.norm()), fmt_f64(p.arg())),
                None => ("nan".into(), "nan".into()),
            };
            writeln!(
                w,
                "{},{},{},{a},{ph}",
                fmt_f64(c.point.x),
                fmt_f64(c.point.y),
                fmt_f64(c.point.z)
            )?;
        }
        Ok(())
    }
}

/// Samples the field at every cell center. Each cell is evaluated
/// independently, so the result does not depend on the thread count.
pub fn field_map(array: &TransducerArray, phases: &PhasePattern, spec: &GridSpec) -> Result<FieldGrid> {
    spec.validate()?;
    if phases.len() != array.len() {
        return Err(Error::param("phases", "pattern length does not match the array"));
    }
    let [nu, nv] = spec.resolution;
    let cells = (0..nu * nv)
        .into_par_iter()
        .map(|n| {
            let point = spec.cell_center(n % nu, n / nu);
            FieldCell {
                point,
                pressure: array.pressure_at(phases, &point).ok(),
            }
        })
        .collect();
    Ok(FieldGrid { spec: *spec, cells })
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
