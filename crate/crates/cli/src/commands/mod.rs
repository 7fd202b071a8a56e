use std::path::Path;

use anyhow::{bail, Context, Result};
use progx::ingest::{load_blur_kernel, load_scene, Scene};
use progx::ModelType;

use crate::output::ensure_exists;

pub mod eval;
pub mod fit;
pub mod pose;
pub mod rerun;
pub mod synth;

/// How a command ended when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// Ran fine but found no instance or pose.
    NoResult,
}

/// Loads a scene file, or a blur-kernel image as a point scene.
pub fn load_input(path: &Path, model: Option<ModelType>, kernel_threshold: f64) -> Result<Scene> {
    ensure_exists(path)?;
    let is_image = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let mut scene = if is_image {
        let points = load_blur_kernel(path, kernel_threshold).with_context(|| format!("loading {}", path.display()))?;
        Scene::new(model.unwrap_or(ModelType::LineSegment2D), points)
    } else {
        load_scene(path).with_context(|| format!("loading {}", path.display()))?
    };
    if let Some(m) = model {
        if !scene.points.is_empty() && scene.points.dim() != m.point_dim() {
            bail!("{} has {}-dimensional points but {m} needs {}", path.display(), scene.points.dim(), m.point_dim());
        }
        scene.model_type = m;
    }
    Ok(scene)
}
