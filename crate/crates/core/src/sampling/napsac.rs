use rand::seq::index;
use rand::{Rng, RngCore};

use super::graph::NeighborhoodGraph;
use super::prosac::ProsacSampler;
use super::Sampler;
use crate::error::{Error, Result};
use crate::point::PointSet;

/// Draws after which P-NAPSAC samples globally with probability one.
pub const NAPSAC_T_BLEND: f64 = 100_000.0;

/// Progressive NAPSAC: a PROSAC-chosen seed point plus `m - 1` points from a
/// neighbourhood of the seed that grows every time the seed is reused,
/// blending into global PROSAC sampling over time.
#[derive(Debug, Clone)]
pub struct PNapsacSampler {
    m: usize,
    neighbors: Vec<Vec<usize>>,
    hits: Vec<usize>,
    seeds: ProsacSampler,
    global: ProsacSampler,
    t_blend: f64,
    t: usize,
}

impl PNapsacSampler {
    pub fn new(points: &PointSet, graph: &NeighborhoodGraph, m: usize) -> Result<Self> {
        Self::with_blend(points, graph, m, NAPSAC_T_BLEND)
    }

    pub fn with_blend(points: &PointSet, graph: &NeighborhoodGraph, m: usize, t_blend: f64) -> Result<Self> {
        if points.len() < m || m == 0 {
            return Err(Error::ExhaustedData { needed: m.max(1), available: points.len() });
        }
        if graph.n_points() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: graph.n_points() });
        }
        Ok(Self {
            m,
            neighbors: graph.neighbor_lists(),
            hits: vec![0; points.len()],
            seeds: ProsacSampler::new(points, 1)?,
            global: ProsacSampler::new(points, m)?,
            t_blend,
            t: 0,
        })
    }
}

impl Sampler for PNapsacSampler {
    fn next_sample(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        self.t += 1;
        let seed = self.seeds.next_sample(rng)?[0];
        if self.m == 1 {
            return Ok(vec![seed]);
        }
        self.hits[seed] += 1;
        let local = self.m - 1 + self.hits[seed] - 1;
        let nbrs = &self.neighbors[seed];
        let go_global = local > nbrs.len() || rng.random::<f64>() < self.t as f64 / self.t_blend;
        if go_global {
            return self.global.next_sample(rng);
        }
        // The newest neighbour plus m - 2 from the closer ones.
        let mut s = vec![seed];
        s.extend(index::sample(rng, local - 1, self.m - 2).into_iter().map(|k| nbrs[k]));
        s.push(nbrs[local - 1]);
        Ok(s)
    }

    fn draws(&self) -> usize {
        self.t
    }
}
