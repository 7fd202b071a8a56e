use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::{DataPoint, PointSet};

/// Grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16) -> Self {
        Self { width, height, maxval, data: vec![0; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u16) {
        self.data[y * self.width + x] = v.min(self.maxval);
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse { line: 0, msg: msg.into() }
}

/// Reads binary (P5, 8- or 16-bit) and ASCII (P2) PGM.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut token = |bytes: &[u8]| -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err("truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token(bytes)?;
    let num = |s: String| s.parse::<usize>().map_err(|_| parse_err(format!("bad PGM header field '{s}'")));
    let width = num(token(bytes)?)?;
    let height = num(token(bytes)?)?;
    let maxval = num(token(bytes)?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(format!("PGM maxval {maxval} out of range")));
    }
    let mut img = GrayImage::new(width, height, maxval as u16);
    let n = width * height;
    match magic.as_str() {
        "P5" => {
            // Exactly one whitespace byte separates the header from the raster.
            let start = pos + 1;
            let bpp = if maxval < 256 { 1 } else { 2 };
            let raster = bytes.get(start..start + n * bpp).ok_or_else(|| parse_err("truncated PGM raster"))?;
            for (i, v) in img.data.iter_mut().enumerate() {
                *v = if bpp == 1 { raster[i] as u16 } else { u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) };
            }
        }
        "P2" => {
            for v in img.data.iter_mut() {
                *v = num(token(bytes)?)?.min(maxval) as u16;
            }
        }
        other => return Err(parse_err(format!("unsupported PGM magic '{other}'"))),
    }
    if img.data.iter().any(|&v| v as usize > maxval) {
        return Err(parse_err("PGM sample exceeds maxval"));
    }
    Ok(img)
}

/// Binary PGM (P5).
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    for &v in &img.data {
        if img.maxval < 256 {
            out.push(v as u8);
        } else {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

/// One point per pixel whose intensity, relative to the brightest pixel, is
/// at least `threshold`. Points sit at pixel centres, carry the relative
/// intensity as weight and are ranked brightest first.
pub fn blur_kernel_to_points(img: &GrayImage, threshold: f64) -> PointSet {
    let max = img.data.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return PointSet::default();
    }
    let mut found: Vec<(usize, f64)> = img
        .data
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| {
            let w = v as f64 / max as f64;
            (v > 0 && w >= threshold).then_some((i, w))
        })
        .collect();
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| found[b].1.total_cmp(&found[a].1).then(a.cmp(&b)));
    let mut ranks = vec![0u32; found.len()];
    for (r, &k) in order.iter().enumerate() {
        ranks[k] = r as u32;
    }
    let points = found
        .drain(..)
        .zip(ranks)
        .map(|((i, w), r)| {
            let (x, y) = (i % img.width, i / img.width);
            DataPoint::xy(x as f64 + 0.5, y as f64 + 0.5).with_weight(w).with_rank(r)
        })
        .collect();
    PointSet::new(points)
}

/// A rendered synthetic blur kernel and the trajectory that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticKernel {
    pub image: GrayImage,
    /// Polyline vertices in pixel coordinates.
    pub trajectory: Vec<(f64, f64)>,
}

/// Renders a connected trajectory of `n_segments` straight pieces into a
/// `size` x `size` 8-bit kernel, then adds salt pixels numbering
/// `salt_fraction` times the trajectory's pixel count.
pub fn render_segment_kernel(size: usize, n_segments: usize, salt_fraction: f64, seed: u64) -> SyntheticKernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let margin = 0.1 * s;
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let mut trajectory = vec![(uniform(margin, s - margin), uniform(margin, s - margin))];
    let mut heading = uniform(0.0, std::f64::consts::TAU);
    while trajectory.len() <= n_segments {
        let &(x, y) = trajectory.last().expect("nonempty");
        let len = uniform(0.25, 0.45) * s;
        let (nx, ny) = (x + len * heading.cos(), y + len * heading.sin());
        if nx < margin || ny < margin || nx > s - margin || ny > s - margin {
            heading = uniform(0.0, std::f64::consts::TAU);
            continue;
        }
        trajectory.push((nx, ny));
        // Bounces change direction by at least 45 degrees.
        heading += uniform(0.25, 0.75) * std::f64::consts::PI * if uniform(0.0, 1.0) < 0.5 { 1.0 } else { -1.0 };
    }
    let mut image = GrayImage::new(size, size, 255);
    let mut lit = 0usize;
    for y in 0..size {
        for x in 0..size {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let d = trajectory.windows(2).map(|w| point_segment_distance((px, py), w[0], w[1])).fold(f64::INFINITY, f64::min);
            let v = (-(d * d) / (2.0 * 0.6 * 0.6)).exp();
            if v > 0.1 {
                image.set(x, y, (v * 255.0).round() as u16);
                lit += 1;
            }
        }
    }
    let n_salt = (salt_fraction * lit as f64).round() as usize;
    for _ in 0..n_salt {
        let x = rng.random_range(0..size);
        let y = rng.random_range(0..size);
        let v = rng.random_range(64..=255u16);
        image.set(x, y, image.get(x, y).max(v));
    }
    SyntheticKernel { image, trajectory }
}

/// Euclidean distance from `p` to segment `ab`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}
