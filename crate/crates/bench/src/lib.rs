//! Shared fixtures for the progx benchmarks.

use nalgebra::{Matrix3, Vector3};
use progx::consensus::PreferenceVector;
use progx::ingest::{synthesize, SyntheticScene, SyntheticSpec};
use progx::ModelType;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Five lines of 100 points with 1 px noise and 200 outliers in a 1000 px field.
pub fn five_lines(seed: u64) -> SyntheticScene {
    synthesize(&SyntheticSpec::new(ModelType::Line2D, 5, 100, 200).with_seed(seed)).expect("valid spec")
}

pub fn homography_scene(instances: usize, seed: u64) -> SyntheticScene {
    synthesize(&SyntheticSpec::new(ModelType::Homography, instances, 100, 50).with_seed(seed)).expect("valid spec")
}

/// Sparse preference vectors over `len` points, about `density` of entries nonzero.
pub fn preferences(count: usize, len: usize, density: f64, seed: u64) -> Vec<PreferenceVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let entries = (0..len).filter_map(|i| rng.random_bool(density).then(|| (i, rng.random::<f64>()))).collect();
            PreferenceVector::from_entries(len, entries).expect("sorted entries")
        })
        .collect()
}

/// Plane-induced homography for a small rotation about y and a sideways translation.
pub fn plane_homography() -> Matrix3<f64> {
    let (s, c) = 0.1f64.sin_cos();
    let r = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
    let t = Vector3::new(0.5, 0.1, 0.05);
    let n = Vector3::new(0.1, -0.2, 1.0).normalize();
    r + t * n.transpose() / 5.0
}
