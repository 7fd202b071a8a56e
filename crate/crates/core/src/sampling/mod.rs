//! Sample proposal strategies: uniform, PROSAC, P-NAPSAC and the
//! connected-component sampler.

mod cc;
mod graph;
mod napsac;
mod prosac;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use cc::CcSampler;
pub use graph::{build_neighborhood, build_neighborhood_scaled, connected_components, NeighborhoodGraph};
pub use napsac::{PNapsacSampler, NAPSAC_T_BLEND};
pub use prosac::{ProsacSampler, PROSAC_T_N};

use crate::error::{Error, Result};
use crate::point::PointSet;

/// A stateful source of samples (point indices) of a fixed minimum size.
pub trait Sampler {
    /// Indices of the next sample, at least the minimal sample size of them.
    fn next_sample(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>>;

    /// Samples drawn so far.
    fn draws(&self) -> usize;

    /// Samples that came from a fallback strategy.
    fn fallback_samples(&self) -> usize {
        0
    }

    /// True once the sampler's own schedule is used up.
    fn is_exhausted(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Uniform,
    Prosac,
    PNapsac,
    #[serde(rename = "cc")]
    ConnectedComponents,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Prosac => "prosac",
            SamplerKind::PNapsac => "pnapsac",
            SamplerKind::ConnectedComponents => "cc",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => SamplerKind::Uniform,
            "prosac" => SamplerKind::Prosac,
            "pnapsac" | "p-napsac" => SamplerKind::PNapsac,
            "cc" | "connected-components" | "connectedcomponents" => SamplerKind::ConnectedComponents,
            other => return Err(Error::InvalidConfig(format!("unknown sampler '{other}'"))),
        })
    }
}

/// Neighbourhood radii for the graph-based samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodParams {
    pub r_min: f64,
    pub r_max: f64,
    pub n_steps: usize,
    /// Multiplier applied to coordinates before measuring distances.
    pub scale: f64,
}

impl Default for NeighborhoodParams {
    fn default() -> Self {
        Self { r_min: 20.0, r_max: 200.0, n_steps: 5, scale: 1.0 }
    }
}

/// Uniform sampling without replacement.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    n: usize,
    m: usize,
    t: usize,
}

impl UniformSampler {
    pub fn new(n_points: usize, m: usize) -> Result<Self> {
        if m == 0 || n_points < m {
            return Err(Error::ExhaustedData { needed: m.max(1), available: n_points });
        }
        Ok(Self { n: n_points, m, t: 0 })
    }
}

impl Sampler for UniformSampler {
    fn next_sample(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        self.t += 1;
        Ok(index::sample(rng, self.n, self.m).into_vec())
    }

    fn draws(&self) -> usize {
        self.t
    }
}

/// Builds the sampler of the requested kind for samples of size `m`.
pub fn make_sampler(
    kind: SamplerKind,
    points: &PointSet,
    m: usize,
    params: &NeighborhoodParams,
) -> Result<Box<dyn Sampler>> {
    Ok(match kind {
        SamplerKind::Uniform => Box::new(UniformSampler::new(points.len(), m)?),
        SamplerKind::Prosac => {
            if !points.is_ranked() {
                log::warn!("points carry no quality ranking; PROSAC falls back to uniform sampling");
            }
            Box::new(ProsacSampler::new(points, m)?)
        }
        SamplerKind::PNapsac => {
            let g = build_neighborhood_scaled(points, params.r_max, params.scale);
            Box::new(PNapsacSampler::new(points, &g, m)?)
        }
        SamplerKind::ConnectedComponents => {
            let g = build_neighborhood_scaled(points, params.r_max, params.scale);
            Box::new(CcSampler::new(points, g, m, params.r_min, params.n_steps)?)
        }
    })
}
