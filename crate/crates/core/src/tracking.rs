//! Marker tracking on RGB-D frames: binary color filter, centroid, and
//! pinhole back-projection.
//!
//! Pixel `(u, v)` has its center at integer coordinates; `u` runs along a
//! row, `v` down the columns. Camera frame is x right, y down, z forward.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            fx: 615.0,
            fy: 615.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::param("fx/fy", "focal lengths must be > 0"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return Err(Error::param("cx", format!("must lie in [0, {})", self.width)));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::param("cy", format!("must lie in [0, {})", self.height)));
        }
        Ok(())
    }

    /// Forward pinhole projection of a camera-frame point.
    pub fn project(&self, p: &Vec3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }
}

/// RGB image plus a depth map in meters (0 = invalid).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
    depth: Vec<f32>,
}

impl Frame {
    pub fn new(width: usize, height: usize, rgb: Vec<u8>, depth: Vec<f32>) -> Result<Self> {
        if rgb.len() != width * height * 3 || depth.len() != width * height {
            return Err(Error::param(
                "frame",
                format!(
                    "buffers ({} rgb bytes, {} depth values) do not match {width}×{height}",
                    rgb.len(),
                    depth.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            rgb,
            depth,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rgb(&self, u: usize, v: usize) -> Rgb {
        let i = 3 * (v * self.width + u);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn depth(&self, u: usize, v: usize) -> f32 {
        self.depth[v * self.width + u]
    }

    /// Binary PPM (P6, maxval 255).
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.rgb)
    }

    /// Row-major little-endian f32 meters, no header.
    pub fn write_depth<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for d in &self.depth {
            w.write_all(&d.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a frame from a P6 image and its matching depth file.
    pub fn read<R1: BufRead, R2: Read>(ppm: R1, depth: R2) -> Result<Self> {
        let (width, height, rgb) = read_ppm(ppm)?;
        let mut bytes = Vec::new();
        let mut depth = depth;
        depth.read_to_end(&mut bytes).map_err(|e| Error::Format {
            what: "depth file",
            message: e.to_string(),
        })?;
        if bytes.len() != width * height * 4 {
            return Err(Error::Format {
                what: "depth file",
                message: format!("{} bytes for a {width}×{height} frame", bytes.len()),
            });
        }
        let depth = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Frame::new(width, height, rgb, depth)
    }
}

fn read_ppm<R: BufRead>(mut r: R) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |m: String| Error::Format {
        what: "PPM image",
        message: m,
    };
    let mut header = Vec::new();
    // magic, width, height, maxval, separated by whitespace; '#' comments allowed
    let mut token = Vec::new();
    let mut in_comment = false;
    while header.len() < 4 {
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte).map_err(|e| bad(e.to_string()))?;
        let b = byte[0];
        if in_comment {
            in_comment = b != b'\n';
            continue;
        }
        if b == b'#' {
            in_comment = true;
        } else if b.is_ascii_whitespace() {
            if !token.is_empty() {
                header.push(String::from_utf8_lossy(&token).into_owned());
                token.clear();
            }
        } else {
            token.push(b);
        }
    }
    if header[0] != "P6" {
        return Err(bad(format!("unsupported magic {:?}", header[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}")));
    let (width, height, maxval) = (parse(&header[1])?, parse(&header[2])?, parse(&header[3])?);
    if maxval != 255 {
        return Err(bad(format!("maxval {maxval} (only 255 supported)")));
    }
    let mut rgb = vec![0u8; width * height * 3];
    r.read_exact(&mut rgb).map_err(|e| bad(e.to_string()))?;
    Ok((width, height, rgb))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub center_px: (f64, f64),
    pub radius_px: f64,
    pub color: Rgb,
}

/// Renders a solid marker disk over a uniform background. Depth is
/// `depth_value` on marker pixels and 0 elsewhere.
pub fn render_synthetic_frame(
    marker: &Marker,
    background: Rgb,
    depth_value: f32,
    intrinsics: &CameraIntrinsics,
) -> Result<Frame> {
    if !(marker.radius_px >= 1.0) {
        return Err(Error::param("radius_px", format!("must be ≥ 1, got {}", marker.radius_px)));
    }
    let (w, h) = (intrinsics.width, intrinsics.height);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for _ in 0..w * h {
        rgb.extend_from_slice(&background);
    }
    let mut depth = vec![0.0f32; w * h];
    let (cu, cv) = marker.center_px;
    let r = marker.radius_px;
    let u_lo = (cu - r).ceil().max(0.0);
    let u_hi = (cu + r).floor().min(w as f64 - 1.0);
    let v_lo = (cv - r).ceil().max(0.0);
    let v_hi = (cv + r).floor().min(h as f64 - 1.0);
    let mut painted = 0usize;
    if u_lo <= u_hi && v_lo <= v_hi {
        for v in v_lo as usize..=v_hi as usize {
            for u in u_lo as usize..=u_hi as usize {
                let (du, dv) = (u as f64 - cu, v as f64 - cv);
                if du * du + dv * dv <= r * r {
                    let i = v * w + u;
                    rgb[3 * i..3 * i + 3].copy_from_slice(&marker.color);
                    depth[i] = depth_value;
                    painted += 1;
                }
            }
        }
    }
    if painted == 0 {
        return Err(Error::param("marker", "lies entirely outside the frame"));
    }
    Frame::new(w, h, rgb, depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColorThresholds {
    pub r_min: u8,
    pub g_max: u8,
    pub b_max: u8,
}

impl Default for ColorThresholds {
    fn default() -> Self {
        Self {
            r_min: 200,
            g_max: 80,
            b_max: 80,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                bits.push(f(u, v));
            }
        }
        Self { width, height, bits }
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Every true pixel of `self` is true in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

pub fn binary_color_filter(frame: &Frame, t: &ColorThresholds) -> Mask {
    let bits = frame
        .rgb
        .chunks_exact(3)
        .map(|p| p[0] >= t.r_min && p[1] <= t.g_max && p[2] <= t.b_max)
        .collect();
    Mask {
        width: frame.width,
        height: frame.height,
        bits,
    }
}

/// Mean (u, v) of the true pixels, or `None` for an empty mask.
pub fn centroid(mask: &Mask) -> Option<(f64, f64)> {
    let (mut n, mut su, mut sv) = (0u64, 0u64, 0u64);
    for v in 0..mask.height {
        let row = &mask.bits[v * mask.width..(v + 1) * mask.width];
        for (u, &b) in row.iter().enumerate() {
            if b {
                n += 1;
                su += u as u64;
                sv += v as u64;
            }
        }
    }
    (n > 0).then(|| (su as f64 / n as f64, sv as f64 / n as f64))
}

/// Camera-frame point for pixel `(u, v)` at `depth` meters.
pub fn backproject(pixel: (f64, f64), depth: f64, k: &CameraIntrinsics) -> Result<Vec3> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::param("depth", format!("must be > 0, got {depth}")));
    }
    Ok(Vec3::new(
        (pixel.0 - k.cx) * depth / k.fx,
        (pixel.1 - k.cy) * depth / k.fy,
        depth,
    ))
}

/// Full pipeline: filter, centroid, nearest-pixel depth, back-projection.
pub fn track(frame: &Frame, thresholds: &ColorThresholds, k: &CameraIntrinsics) -> Option<Vec3> {
    let (u, v) = centroid(&binary_color_filter(frame, thresholds))?;
    let pu = (u.round() as usize).min(frame.width - 1);
    let pv = (v.round() as usize).min(frame.height - 1);
    let depth = frame.depth(pu, pv) as f64;
    backproject((u, v), depth, k).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const RED: Rgb = [255, 0, 0];
    const BLACK: Rgb = [0, 0, 0];
    const GRAY: Rgb = [128, 128, 128];

    fn marker(cu: f64, cv: f64, r: f64) -> Marker {
        Marker {
            center_px: (cu, cv),
            radius_px: r,
            color: RED,
        }
    }

    #[test]
    fn rasterization_matches_definition() {
        let k = CameraIntrinsics::default();
        let f = render_synthetic_frame(&marker(320.0, 240.0, 10.0), BLACK, 0.4, &k).unwrap();
        for v in 0..k.height {
            for u in 0..k.width {
                let du = u as f64 - 320.0;
                let dv = v as f64 - 240.0;
                let inside = du * du + dv * dv <= 100.0;
                assert_eq!(f.rgb(u, v) == RED, inside, "pixel ({u}, {v})");
                assert_eq!(f.depth(u, v), if inside { 0.4 } else { 0.0 });
            }
        }
    }

    #[test]
    fn clipped_marker_and_outside_marker() {
        let k = CameraIntrinsics::default();
        let f = render_synthetic_frame(&marker(0.0, 0.0, 1.0), BLACK, 0.4, &k).unwrap();
        let mask = binary_color_filter(&f, &ColorThresholds::default());
        assert_eq!(mask.count(), 3);
        assert!(render_synthetic_frame(&marker(-5.0, -5.0, 2.0), BLACK, 0.4, &k).is_err());
        assert!(render_synthetic_frame(&marker(5.0, 5.0, 0.5), BLACK, 0.4, &k).is_err());
    }

    #[test]
    fn filter_examples() {
        let k = CameraIntrinsics {
            width: 8,
            height: 6,
            cx: 4.0,
            cy: 3.0,
            ..CameraIntrinsics::default()
        };
        let black = Frame::new(8, 6, vec![0; 8 * 6 * 3], vec![0.0; 48]).unwrap();
        let t = ColorThresholds {
            r_min: 200,
            g_max: 50,
            b_max: 50,
        };
        assert_eq!(binary_color_filter(&black, &t).count(), 0);
        let red = Frame::new(8, 6, RED.repeat(48), vec![0.0; 48]).unwrap();
        assert_eq!(binary_color_filter(&red, &t).count(), 48);
        let f = render_synthetic_frame(&marker(3.3, 2.1, 2.2), GRAY, 0.3, &k).unwrap();
        let mask = binary_color_filter(&f, &t);
        let expected = Mask::from_fn(8, 6, |u, v| f.rgb(u, v) == RED);
        assert_eq!(mask, expected);
    }

    #[test]
    fn centroid_examples() {
        let m = Mask::from_fn(10, 10, |u, v| (u, v) == (5, 7));
        assert_eq!(centroid(&m), Some((5.0, 7.0)));
        assert_eq!(centroid(&Mask::from_fn(10, 10, |_, _| false)), None);
        let k = CameraIntrinsics::default();
        let f = render_synthetic_frame(&marker(320.0, 240.0, 12.0), BLACK, 0.4, &k).unwrap();
        let (u, v) = centroid(&binary_color_filter(&f, &ColorThresholds::default())).unwrap();
        assert!((u - 320.0).abs() <= 0.5 && (v - 240.0).abs() <= 0.5);
    }

    #[test]
    fn backprojection_examples() {
        let k = CameraIntrinsics::default();
        assert_eq!(backproject((k.cx, k.cy), 0.3, &k).unwrap(), Vec3::new(0.0, 0.0, 0.3));
        let k600 = CameraIntrinsics {
            fx: 600.0,
            ..k
        };
        assert_relative_eq!(backproject((k.cx + 600.0, k.cy), 0.5, &k600).unwrap().x, 0.5);
        assert!(backproject((0.0, 0.0), 0.0, &k).is_err());
        assert!(backproject((0.0, 0.0), -1.0, &k).is_err());
    }

    #[test]
    fn track_examples() {
        let k = CameraIntrinsics::default();
        let t = ColorThresholds::default();
        let f = render_synthetic_frame(&marker(k.cx, k.cy, 8.0), BLACK, 0.4, &k).unwrap();
        let p = track(&f, &t, &k).unwrap();
        assert!(p.x.abs() < 0.4 / k.fx && p.y.abs() < 0.4 / k.fy);
        assert_eq!(p.z, 0.4f32 as f64);
        let empty = Frame::new(k.width, k.height, BLACK.repeat(k.width * k.height), vec![0.0; k.width * k.height]).unwrap();
        assert_eq!(track(&empty, &t, &k), None);
        let no_depth = render_synthetic_frame(&marker(100.0, 80.0, 8.0), BLACK, 0.0, &k).unwrap();
        assert_eq!(track(&no_depth, &t, &k), None);
    }

    #[test]
    fn ppm_and_depth_round_trip() {
        let k = CameraIntrinsics {
            width: 16,
            height: 9,
            cx: 8.0,
            cy: 4.0,
            ..CameraIntrinsics::default()
        };
        let f = render_synthetic_frame(&marker(6.2, 4.7, 3.1), GRAY, 0.37, &k).unwrap();
        let (mut ppm, mut depth) = (Vec::new(), Vec::new());
        f.write_ppm(&mut ppm).unwrap();
        f.write_depth(&mut depth).unwrap();
        assert!(ppm.starts_with(b"P6\n16 9\n255\n"));
        assert_eq!(ppm.len(), 12 + 16 * 9 * 3);
        assert_eq!(depth.len(), 16 * 9 * 4);
        assert_eq!(Frame::read(&ppm[..], &depth[..]).unwrap(), f);
        assert!(Frame::read(&ppm[..], &depth[..10]).is_err());
        assert!(Frame::read(&b"P3\n1 1\n255\n"[..], &[0u8; 4][..]).is_err());
    }

    proptest! {
        #[test]
        fn loosening_thresholds_grows_mask(
            pixels in prop::collection::vec(any::<u8>(), 12 * 3),
            r in any::<u8>(), g in any::<u8>(), b in any::<u8>(),
            dr in any::<u8>(), dg in any::<u8>(), db in any::<u8>(),
        ) {
            let f = Frame::new(4, 3, pixels, vec![0.0; 12]).unwrap();
            let tight = ColorThresholds { r_min: r, g_max: g, b_max: b };
            let loose = ColorThresholds {
                r_min: r.saturating_sub(dr),
                g_max: g.saturating_add(dg),
                b_max: b.saturating_add(db),
            };
            prop_assert!(binary_color_filter(&f, &tight).is_subset_of(&binary_color_filter(&f, &loose)));
        }

        #[test]
        fn centroid_follows_integer_shifts(
            seed in prop::collection::vec(any::<bool>(), 100),
            du in 0usize..20, dv in 0usize..20,
        ) {
            let base = Mask::from_fn(40, 40, |u, v| u < 10 && v < 10 && seed[v * 10 + u]);
            let moved = Mask::from_fn(40, 40, |u, v| {
                u >= du && v >= dv && base.get(u - du, v - dv)
            });
            match (centroid(&base), centroid(&moved)) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    prop_assert!((b.0 - a.0 - du as f64).abs() < 1e-12);
                    prop_assert!((b.1 - a.1 - dv as f64).abs() < 1e-12);
                }
                _ => prop_assert!(false),
            }
        }
    }
}
