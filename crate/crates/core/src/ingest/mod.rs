//! Scene files, blur-kernel images and synthetic scene generators.

mod pgm;
mod scene;
mod synth;

pub use pgm::{
    blur_kernel_to_points, parse_pgm, point_segment_distance, render_segment_kernel, write_pgm, GrayImage,
    SyntheticKernel,
};
pub use scene::{load_scene, parse_scene_csv, parse_scene_json, save_scene, scene_to_csv, scene_to_json, Scene};
pub use synth::{synthesize, synthetic_intrinsics, SyntheticScene, SyntheticSpec};

use std::path::Path;

use crate::error::{Error, Result};
use crate::point::PointSet;

/// Reads a PGM file and extracts its kernel points.
pub fn load_blur_kernel(path: impl AsRef<Path>, threshold: f64) -> Result<PointSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(blur_kernel_to_points(&parse_pgm(&bytes)?, threshold))
}
