//! Phased transducer array: geometry, focusing and the linear pressure field.
//!
//! Each element is a spherically spreading source. The complex pressure at a
//! point `r` is
//!
//! ```text
//! p(r) = Σ_i A_i · D(θ_i) / d_i · exp(j (k d_i + φ_i))
//! ```
//!
//! where `d_i` is the element-to-point distance, `θ_i` the angle between the
//! element normal and the propagation direction, and `D` the directivity.

use std::f64::consts::TAU;

use nalgebra::{Complex, Rotation3, Unit};

use crate::error::{Error, Result};
use crate::geometry::{canonical_phase, Vec3};

/// Points closer than this to an element are treated as coincident.
pub const MIN_ELEMENT_DISTANCE: f64 = 1e-6;

/// Default per-element source strength at full drive (Pa·m).
pub const DEFAULT_AMPLITUDE: f64 = 2.5;
/// Default transducer pitch (m).
pub const DEFAULT_PITCH: f64 = 0.01016;
/// Default piston aperture radius (m).
pub const DEFAULT_APERTURE_RADIUS: f64 = 0.0045;
/// Default grid: 83 × 12 = 996 elements.
pub const DEFAULT_GRID: (usize, usize) = (83, 12);

/// Complex acoustic pressure amplitude (Pa).
pub type ComplexPressure = Complex<f64>;

/// Propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumConfig {
    /// m/s
    pub speed_of_sound: f64,
    /// kg/m³
    pub air_density: f64,
    /// Hz
    pub frequency: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            speed_of_sound: 346.0,
            air_density: 1.20,
            frequency: 40_000.0,
        }
    }
}

impl MediumConfig {
    pub fn new(speed_of_sound: f64, air_density: f64, frequency: f64) -> Result<Self> {
        let m = Self {
            speed_of_sound,
            air_density,
            frequency,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("speed_of_sound", self.speed_of_sound),
            ("air_density", self.air_density),
            ("frequency", self.frequency),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// k = 2πf/c (rad/m).
    pub fn wavenumber(&self) -> f64 {
        TAU * self.frequency / self.speed_of_sound
    }

    /// λ = c/f (m).
    pub fn wavelength(&self) -> f64 {
        self.speed_of_sound / self.frequency
    }
}

/// Element radiation pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directivity {
    Omnidirectional,
    /// Baffled circular piston.
    Piston { aperture_radius: f64 },
}

impl Directivity {
    /// Gain at angle `theta` off the element axis.
    pub fn gain(&self, theta: f64, wavenumber: f64) -> f64 {
        match *self {
            Directivity::Omnidirectional => 1.0,
            Directivity::Piston { aperture_radius } => {
                let x = wavenumber * aperture_radius * theta.sin();
                if x.abs() < 1e-8 {
                    // 2 J1(x)/x = 1 - x²/8 + O(x⁴)
                    1.0 - x * x / 8.0
                } else {
                    2.0 * libm::j1(x) / x
                }
            }
        }
    }
}

/// Directivity gain for `mode` at angle `theta` (rad, in [0, π]).
pub fn directivity(theta: f64, mode: Directivity, medium: &MediumConfig) -> f64 {
    mode.gain(theta, medium.wavenumber())
}

/// A single emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transducer {
    pub position: Vec3,
    pub normal: Vec3,
    /// Far-field pressure × distance at full drive (Pa·m).
    pub amplitude: f64,
}

/// Planar rectangular grid description.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
    /// Center of the grid.
    pub origin: Vec3,
    /// Grid rows run along the rotated x axis, columns along y; element
    /// normals point along the rotated z axis.
    pub orientation: Rotation3<f64>,
    pub amplitude: f64,
}

impl Default for GridLayout {
    fn default() -> Self {
        Self {
            nx: DEFAULT_GRID.0,
            ny: DEFAULT_GRID.1,
            pitch: DEFAULT_PITCH,
            origin: Vec3::zeros(),
            orientation: Rotation3::identity(),
            amplitude: DEFAULT_AMPLITUDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Grid(GridLayout),
    Explicit(Vec<Transducer>),
}

/// An immutable array of transducers in a medium.
#[derive(Debug, Clone)]
pub struct TransducerArray {
    elements: Vec<Transducer>,
    medium: MediumConfig,
    directivity: Directivity,
    wavenumber: f64,
    // struct-of-arrays copy of positions and amplitudes for the field sum
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    amps: Vec<f64>,
}

/// Builds and validates an array.
pub fn build_array(
    layout: &Layout,
    medium: MediumConfig,
    directivity: Directivity,
) -> Result<TransducerArray> {
    let elements = match layout {
        Layout::Grid(g) => grid_elements(g)?,
        Layout::Explicit(list) => list.clone(),
    };
    TransducerArray::new(elements, medium, directivity)
}

fn grid_elements(g: &GridLayout) -> Result<Vec<Transducer>> {
    if !(g.pitch.is_finite() && g.pitch > 0.0) {
        return Err(Error::param("pitch", format!("must be > 0, got {}", g.pitch)));
    }
    if g.nx == 0 || g.ny == 0 {
        return Err(Error::param(
            "grid",
            format!("needs at least one element, got {}×{}", g.nx, g.ny),
        ));
    }
    let normal = g.orientation * Vec3::z();
    let x0 = (g.nx as f64 - 1.0) / 2.0;
    let y0 = (g.ny as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let local = Vec3::new((i as f64 - x0) * g.pitch, (j as f64 - y0) * g.pitch, 0.0);
            out.push(Transducer {
                position: g.origin + g.orientation * local,
                normal,
                amplitude: g.amplitude,
            });
        }
    }
    Ok(out)
}

impl TransducerArray {
    pub fn new(
        elements: Vec<Transducer>,
        medium: MediumConfig,
        directivity: Directivity,
    ) -> Result<Self> {
        medium.validate()?;
        if elements.is_empty() {
            return Err(Error::param("elements", "array needs at least one element"));
        }
        if let Directivity::Piston { aperture_radius } = directivity {
            if !(aperture_radius.is_finite() && aperture_radius > 0.0) {
                return Err(Error::param(
                    "aperture_radius",
                    format!("must be > 0, got {aperture_radius}"),
                ));
            }
        }
        for (i, e) in elements.iter().enumerate() {
            if !e.position.iter().all(|v| v.is_finite()) {
                return Err(Error::param("position", format!("element {i} is not finite")));
            }
            if (e.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::param(
                    "normal",
                    format!("element {i} normal has length {}", e.normal.norm()),
                ));
            }
            if !(e.amplitude.is_finite() && e.amplitude >= 0.0) {
                return Err(Error::param(
                    "amplitude",
                    format!("element {i} amplitude {} must be ≥ 0", e.amplitude),
                ));
            }
        }
        let mut sorted: Vec<(usize, [f64; 3])> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (i, [e.position.x, e.position.y, e.position.z]))
            .collect();
        sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite positions"));
        if let Some(w) = sorted.windows(2).find(|w| w[0].1 == w[1].1) {
            return Err(Error::param(
                "position",
                format!("elements {} and {} share a position", w[0].0, w[1].0),
            ));
        }
        Ok(Self {
            wavenumber: medium.wavenumber(),
            xs: elements.iter().map(|e| e.position.x).collect(),
            ys: elements.iter().map(|e| e.position.y).collect(),
            zs: elements.iter().map(|e| e.position.z).collect(),
            amps: elements.iter().map(|e| e.amplitude).collect(),
            elements,
            medium,
            directivity,
        })
    }

    pub fn elements(&self) -> &[Transducer] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn medium(&self) -> &MediumConfig {
        &self.medium
    }

    pub fn directivity(&self) -> Directivity {
        self.directivity
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Copy of the array with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| Transducer {
                amplitude: e.amplitude * factor,
                ..*e
            })
            .collect();
        Self::new(elements, self.medium, self.directivity)
    }

    fn check_clearance(&self, point: &Vec3) -> Result<()> {
        for (index, e) in self.elements.iter().enumerate() {
            if (point - e.position).norm() <= MIN_ELEMENT_DISTANCE {
                return Err(Error::CoincidentPoint {
                    index,
                    x: point.x,
                    y: point.y,
                    z: point.z,
                });
            }
        }
        Ok(())
    }

    /// Coherent sum without the clearance check. Returns the field and the
    /// index of the nearest element with its distance.
    #[inline]
    fn field_sum(&self, phases: &[f64], point: &Vec3) -> (ComplexPressure, usize, f64) {
        let k = self.wavenumber;
        let (qx, qy, qz) = (point.x, point.y, point.z);
        let n = self.elements.len();
        let (xs, ys, zs, amps) = (&self.xs[..n], &self.ys[..n], &self.zs[..n], &self.amps[..n]);
        let phases = &phases[..n];

        // LANES independent partial sums, combined in a fixed order below.
        let mut re = [0.0; LANES];
        let mut im = [0.0; LANES];
        let mut min_d2 = [f64::INFINITY; LANES];
        let whole = n - n % LANES;
        match self.directivity {
            Directivity::Omnidirectional => {
                let chunks = xs
                    .chunks_exact(LANES)
                    .zip(ys.chunks_exact(LANES))
                    .zip(zs.chunks_exact(LANES))
                    .zip(amps.chunks_exact(LANES))
                    .zip(phases.chunks_exact(LANES));
                for ((((x, y), z), a), ph) in chunks {
                    for l in 0..LANES {
                        let (dx, dy, dz) = (qx - x[l], qy - y[l], qz - z[l]);
                        let d2 = dx * dx + dy * dy + dz * dz;
                        min_d2[l] = if d2 < min_d2[l] { d2 } else { min_d2[l] };
                        let d = d2.sqrt();
                        let mag = a[l] / d;
                        let (s, c) = sin_cos(k * d + ph[l]);
                        re[l] += mag * c;
                        im[l] += mag * s;
                    }
                }
                for i in whole..n {
                    let (dx, dy, dz) = (qx - xs[i], qy - ys[i], qz - zs[i]);
                    let d2 = dx * dx + dy * dy + dz * dz;
                    min_d2[0] = min_d2[0].min(d2);
                    let d = d2.sqrt();
                    let mag = amps[i] / d;
                    let (s, c) = sin_cos(k * d + phases[i]);
                    re[0] += mag * c;
                    im[0] += mag * s;
                }
            }
            mode => {
                for (i, e) in self.elements.iter().enumerate() {
                    let diff = point - e.position;
                    let d2 = diff.norm_squared();
                    min_d2[0] = min_d2[0].min(d2);
                    let d = d2.sqrt();
                    let theta = e.normal.cross(&diff).norm().atan2(e.normal.dot(&diff));
                    let mag = e.amplitude * mode.gain(theta, k) / d;
                    let (s, c) = sin_cos(k * d + phases[i]);
                    re[0] += mag * c;
                    im[0] += mag * s;
                }
            }
        }
        let sum = |v: [f64; LANES]| v.iter().fold(0.0, |a, b| a + b);
        let min_d = min_d2.iter().fold(f64::INFINITY, |a, &b| a.min(b)).sqrt();
        let nearest = if min_d > MIN_ELEMENT_DISTANCE {
            0
        } else {
            (0..n)
                .min_by(|&a, &b| {
                    let da = (point - self.elements[a].position).norm();
                    let db = (point - self.elements[b].position).norm();
                    da.total_cmp(&db)
                })
                .unwrap_or(0)
        };
        (ComplexPressure::new(sum(re), sum(im)), nearest, min_d)
    }

    /// Pressure at `point` for a drive pattern; errors when `point` is
    /// within [`MIN_ELEMENT_DISTANCE`] of an element.
    pub fn pressure_at(&self, phases: &PhasePattern, point: &Vec3) -> Result<ComplexPressure> {
        self.check_len(phases)?;
        let (p, index, d) = self.field_sum(phases.as_slice(), point);
        if !(d > MIN_ELEMENT_DISTANCE) {
            return Err(Error::CoincidentPoint {
                index,
                x: point.x,
                y: point.y,
                z: point.z,
            });
        }
        Ok(p)
    }

    /// Phases that bring every element's contribution to `focus` with zero
    /// total phase.
    pub fn solve_focus_phases(&self, focus: &Vec3) -> Result<PhasePattern> {
        self.check_clearance(focus)?;
        let k = self.wavenumber;
        Ok(PhasePattern(
            self.elements
                .iter()
                .map(|e| canonical_phase(-k * (focus - e.position).norm()))
                .collect(),
        ))
    }

    fn check_len(&self, phases: &PhasePattern) -> Result<()> {
        if phases.len() != self.elements.len() {
            return Err(Error::param(
                "phases",
                format!(
                    "pattern has {} entries for {} elements",
                    phases.len(),
                    self.elements.len()
                ),
            ));
        }
        Ok(())
    }

    /// Angle between element `index`'s normal and the direction to `point`.
    pub fn off_axis_angle(&self, index: usize, point: &Vec3) -> f64 {
        let e = &self.elements[index];
        let diff = point - e.position;
        e.normal.cross(&diff).norm().atan2(e.normal.dot(&diff))
    }
}

/// Free-function form of [`TransducerArray::solve_focus_phases`].
pub fn solve_focus_phases(array: &TransducerArray, focus: &Vec3) -> Result<PhasePattern> {
    array.solve_focus_phases(focus)
}

/// Free-function form of [`TransducerArray::pressure_at`].
pub fn pressure_at(
    array: &TransducerArray,
    phases: &PhasePattern,
    point: &Vec3,
) -> Result<ComplexPressure> {
    array.pressure_at(phases, point)
}

/// Per-element drive phases, each in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePattern(Vec<f64>);

impl PhasePattern {
    /// Canonicalizes every phase into [0, 2π).
    pub fn new(phases: impl IntoIterator<Item = f64>) -> Self {
        Self(phases.into_iter().map(canonical_phase).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Convenience for building an element normal from any direction.
pub fn unit(v: Vec3) -> Vec3 {
    Unit::new_normalize(v).into_inner()
}

const LANES: usize = 4;

/// sin and cos for moderate arguments (|x| < 2^50).
///
/// Cody–Waite reduction by π/2 followed by the fdlibm minimax kernels on
/// [−π/4, π/4]. Branch-free so the field sum vectorizes; agrees with the
/// libm result to a few ulp of the reduced argument.
#[inline(always)]
#[allow(clippy::excessive_precision)] // fdlibm coefficients as published
pub fn sin_cos(x: f64) -> (f64, f64) {
    const FRAC_2_PI: f64 = std::f64::consts::FRAC_2_PI;
    // 1.5·2^52: adding it rounds to an integer held in the low mantissa bits
    const ROUND: f64 = 6_755_399_441_055_744.0;
    const PIO2_HI: f64 = 1.570_796_326_734_125_614_17e0;
    const PIO2_LO: f64 = 6.077_100_506_506_192_249_32e-11;

    const S1: f64 = -1.666_666_666_666_663_243_48e-1;
    const S2: f64 = 8.333_333_333_322_489_461_24e-3;
    const S3: f64 = -1.984_126_982_985_794_931_34e-4;
    const S4: f64 = 2.755_731_370_707_006_767_89e-6;
    const S5: f64 = -2.505_076_025_340_686_341_95e-8;
    const S6: f64 = 1.589_690_995_211_550_102_21e-10;
    const C1: f64 = 4.166_666_666_666_660_190_37e-2;
    const C2: f64 = -1.388_888_888_887_410_957_49e-3;
    const C3: f64 = 2.480_158_728_947_672_941_78e-5;
    const C4: f64 = -2.755_731_435_139_066_330_35e-7;
    const C5: f64 = 2.087_572_321_298_174_827_90e-9;
    const C6: f64 = -1.135_964_755_778_819_482_65e-11;

    let big = x * FRAC_2_PI + ROUND;
    let quadrant = big.to_bits() & 3;
    let q = big - ROUND;
    let r = (x - q * PIO2_HI) - q * PIO2_LO;

    let z = r * r;
    let s = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
    let c = 1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));

    // quadrant 0: ( s,  c)   1: ( c, -s)   2: (-s, -c)   3: (-c,  s)
    let swap = quadrant & 1 == 1;
    let (a, b) = if swap { (c, s) } else { (s, c) };
    let sin_sign = (quadrant >> 1) << 63;
    let cos_sign = ((quadrant ^ (quadrant >> 1)) & 1) << 63;
    (
        f64::from_bits(a.to_bits() ^ sin_sign),
        f64::from_bits(b.to_bits() ^ cos_sign),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wrap_pi;
    use approx::assert_relative_eq;

    fn single(amplitude: f64) -> TransducerArray {
        TransducerArray::new(
            vec![Transducer {
                position: Vec3::zeros(),
                normal: Vec3::z(),
                amplitude,
            }],
            MediumConfig::default(),
            Directivity::Omnidirectional,
        )
        .unwrap()
    }

    fn grid(nx: usize, ny: usize, pitch: f64) -> TransducerArray {
        build_array(
            &Layout::Grid(GridLayout {
                nx,
                ny,
                pitch,
                ..GridLayout::default()
            }),
            MediumConfig::default(),
            Directivity::Omnidirectional,
        )
        .unwrap()
    }

    #[test]
    fn fast_sin_cos_matches_libm() {
        let mut worst: f64 = 0.0;
        for i in 0..200_000 {
            let x = -400.0 + 800.0 * (i as f64 / 200_000.0) + 1e-7 * (i % 7) as f64;
            let (s, c) = sin_cos(x);
            worst = worst.max((s - x.sin()).abs()).max((c - x.cos()).abs());
        }
        assert!(worst < 1e-15, "worst deviation {worst:e}");
        for x in [0.0, -0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::PI, 1e-300] {
            let (s, c) = sin_cos(x);
            assert!((s - x.sin()).abs() < 1e-16 && (c - x.cos()).abs() < 1e-16);
        }
    }

    #[test]
    fn one_by_one_grid() {
        let a = grid(1, 1, 0.01);
        assert_eq!(a.len(), 1);
        assert_eq!(a.elements()[0].position, Vec3::zeros());
        assert_eq!(a.elements()[0].normal, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn two_by_two_grid_is_centered() {
        let a = grid(2, 2, 0.01);
        let pos: Vec<_> = a.elements().iter().map(|e| (e.position.x, e.position.y)).collect();
        assert_eq!(
            pos,
            vec![(-0.005, -0.005), (0.005, -0.005), (-0.005, 0.005), (0.005, 0.005)]
        );
    }

    #[test]
    fn default_grid_has_996_elements() {
        let a = grid(83, 12, 0.01016);
        assert_eq!(a.len(), 996);
    }

    #[test]
    fn grid_errors() {
        let bad_pitch = Layout::Grid(GridLayout {
            pitch: 0.0,
            ..GridLayout::default()
        });
        assert!(build_array(&bad_pitch, MediumConfig::default(), Directivity::Omnidirectional).is_err());
        let empty = Layout::Grid(GridLayout {
            nx: 0,
            ..GridLayout::default()
        });
        assert!(build_array(&empty, MediumConfig::default(), Directivity::Omnidirectional).is_err());
        assert!(build_array(
            &Layout::Explicit(vec![]),
            MediumConfig::default(),
            Directivity::Omnidirectional
        )
        .is_err());
    }

    #[test]
    fn rejects_duplicate_positions_and_bad_normals() {
        let e = Transducer {
            position: Vec3::new(0.1, 0.0, 0.0),
            normal: Vec3::z(),
            amplitude: 1.0,
        };
        let dup = Layout::Explicit(vec![e, e]);
        assert!(build_array(&dup, MediumConfig::default(), Directivity::Omnidirectional).is_err());
        let skew = Layout::Explicit(vec![Transducer {
            normal: Vec3::new(0.0, 0.0, 1.1),
            ..e
        }]);
        assert!(build_array(&skew, MediumConfig::default(), Directivity::Omnidirectional).is_err());
        let neg = Layout::Explicit(vec![Transducer {
            amplitude: -1.0,
            ..e
        }]);
        assert!(build_array(&neg, MediumConfig::default(), Directivity::Omnidirectional).is_err());
    }

    #[test]
    fn single_element_phase_matches_hand_computation() {
        // k = 2π·40000/346 = 726.37980... rad/m; k·0.1 = 72.637980...;
        // 72.637980 - 11·2π = 3.522942... ; phase = 2π - 3.522942 = 2.760243...
        let k = TAU * 40_000.0 / 346.0;
        let kd = k * 0.1;
        let turns = (kd / TAU).floor();
        let expected = TAU - (kd - turns * TAU);
        let p = single(1.0).solve_focus_phases(&Vec3::new(0.0, 0.0, 0.1)).unwrap();
        assert_relative_eq!(p.as_slice()[0], expected, epsilon = 1e-12);
        assert_relative_eq!(p.as_slice()[0], 2.760_243, epsilon = 1e-6);
    }

    #[test]
    fn equidistant_elements_share_phase() {
        let a = grid(2, 1, 0.02);
        let p = a.solve_focus_phases(&Vec3::new(0.0, 0.05, 0.2)).unwrap();
        assert_eq!(p.as_slice()[0], p.as_slice()[1]);
    }

    #[test]
    fn focus_residual_and_canonical_range() {
        let a = grid(9, 7, 0.01016);
        let focus = Vec3::new(0.013, -0.02, 0.17);
        let p = a.solve_focus_phases(&focus).unwrap();
        for (e, &phi) in a.elements().iter().zip(p.as_slice()) {
            assert!((0.0..TAU).contains(&phi));
            let arrival = a.wavenumber() * (focus - e.position).norm() + phi;
            assert!(wrap_pi(arrival).abs() < 1e-9);
        }
    }

    #[test]
    fn focus_on_element_is_rejected() {
        let a = grid(2, 2, 0.01);
        assert!(matches!(
            a.solve_focus_phases(&Vec3::new(0.005, 0.005, 0.0)),
            Err(Error::CoincidentPoint { index: 3, .. })
        ));
        assert!(a
            .pressure_at(&PhasePattern::zeros(4), &Vec3::new(-0.005, -0.005, 0.0))
            .is_err());
    }

    #[test]
    fn single_element_pressure() {
        let a = single(1.0);
        let d: f64 = 0.5;
        let phases = PhasePattern::new([-a.wavenumber() * d]);
        let p = a.pressure_at(&phases, &Vec3::new(0.0, 0.0, d)).unwrap();
        assert_relative_eq!(p.re, 2.0, epsilon = 1e-12);
        assert!(p.im.abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_gives_null_field() {
        let a = single(0.0);
        let p = a
            .pressure_at(&PhasePattern::zeros(1), &Vec3::new(0.1, 0.0, 0.3))
            .unwrap();
        assert_eq!((p.re, p.im), (0.0, 0.0));
    }

    #[test]
    fn focused_magnitude_equals_constructive_bound() {
        let a = grid(11, 5, 0.01016);
        let focus = Vec3::new(0.01, 0.0, 0.2);
        let p = a.solve_focus_phases(&focus).unwrap();
        let bound: f64 = a
            .elements()
            .iter()
            .map(|e| e.amplitude / (focus - e.position).norm())
            .sum();
        assert_relative_eq!(a.pressure_at(&p, &focus).unwrap().norm(), bound, max_relative = 1e-9);
    }

    #[test]
    fn pattern_length_must_match() {
        let a = grid(2, 2, 0.01);
        assert!(a.pressure_at(&PhasePattern::zeros(3), &Vec3::z()).is_err());
    }

    #[test]
    fn directivity_values() {
        let m = MediumConfig::default();
        let piston = Directivity::Piston {
            aperture_radius: 0.0045,
        };
        assert_eq!(directivity(0.0, piston, &m), 1.0);
        for theta in [0.0, 0.3, 1.0, 2.5] {
            assert_eq!(directivity(theta, Directivity::Omnidirectional, &m), 1.0);
        }
        // First zero of J1 from standard tables.
        const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;
        // A wider piston so that ka > j1,1 and the null exists.
        let a = 0.01;
        let theta = (J1_FIRST_ZERO / (m.wavenumber() * a)).asin();
        let g = directivity(theta, Directivity::Piston { aperture_radius: a }, &m);
        assert!(g.abs() < 1e-12, "gain at first null = {g}");
        // Near-axis small-argument branch is continuous with the J1 branch.
        let g_small = directivity(1e-12, piston, &m);
        let g_next = directivity(1e-6, piston, &m);
        assert!((g_small - 1.0).abs() < 1e-15 && (g_next - 1.0).abs() < 1e-8);
    }

    #[test]
    fn piston_mode_reduces_off_axis_field() {
        let m = MediumConfig::default();
        let e = vec![Transducer {
            position: Vec3::zeros(),
            normal: Vec3::z(),
            amplitude: 1.0,
        }];
        let omni = TransducerArray::new(e.clone(), m, Directivity::Omnidirectional).unwrap();
        let piston = TransducerArray::new(
            e,
            m,
            Directivity::Piston {
                aperture_radius: 0.0045,
            },
        )
        .unwrap();
        let q = Vec3::new(0.1, 0.0, 0.1);
        let ph = PhasePattern::zeros(1);
        let g = piston.pressure_at(&ph, &q).unwrap().norm() / omni.pressure_at(&ph, &q).unwrap().norm();
        assert_relative_eq!(g, directivity(std::f64::consts::FRAC_PI_4, piston.directivity(), &m), epsilon = 1e-12);
        assert!(g < 1.0);
    }
}
