use std::collections::VecDeque;

use rand::RngCore;

use super::graph::{connected_components, NeighborhoodGraph};
use super::prosac::ProsacSampler;
use super::Sampler;
use crate::error::{Error, Result};
use crate::point::PointSet;

/// Connected-component sampler.
///
/// Returns connected components of the neighbourhood graph restricted to a
/// radius that grows from `r_min` to `r_max` in `n_steps` increments, largest
/// component first. Components smaller than `m` are merged with the next ones
/// until the sample is large enough. Once the radius schedule is used up it
/// falls back to PROSAC minimal samples.
#[derive(Debug, Clone)]
pub struct CcSampler {
    graph: NeighborhoodGraph,
    m: usize,
    r_min: f64,
    step: f64,
    n_steps: usize,
    round: usize,
    pending: VecDeque<Vec<usize>>,
    exhausted: bool,
    fallback: ProsacSampler,
    fallback_count: usize,
    t: usize,
}

impl CcSampler {
    pub fn new(points: &PointSet, graph: NeighborhoodGraph, m: usize, r_min: f64, n_steps: usize) -> Result<Self> {
        if points.len() < m || m == 0 {
            return Err(Error::ExhaustedData { needed: m.max(1), available: points.len() });
        }
        if !(r_min > 0.0 && r_min <= graph.r_max()) || n_steps == 0 {
            return Err(Error::InvalidConfig(format!(
                "need 0 < r_min <= r_max and n_steps > 0, got r_min={r_min}, r_max={}, n_steps={n_steps}",
                graph.r_max()
            )));
        }
        let step = (graph.r_max() - r_min) / n_steps as f64;
        let pending = connected_components(&graph, r_min).into();
        let mut sampler = Self {
            graph,
            m,
            r_min,
            step,
            n_steps,
            round: 0,
            pending,
            exhausted: false,
            fallback: ProsacSampler::new(points, m)?,
            fallback_count: 0,
            t: 0,
        };
        sampler.refill();
        Ok(sampler)
    }

    /// Radius currently in force.
    pub fn radius(&self) -> f64 {
        if self.round == self.n_steps {
            self.graph.r_max()
        } else {
            self.r_min + self.round as f64 * self.step
        }
    }

    /// Number of radius increases so far.
    pub fn densifications(&self) -> usize {
        self.round
    }

    pub fn graph(&self) -> &NeighborhoodGraph {
        &self.graph
    }

    /// Densifies until the pending components hold at least `m` points, so
    /// that exhaustion is known before the next draw.
    fn refill(&mut self) {
        while self.pending.iter().map(Vec::len).sum::<usize>() < self.m {
            if self.round == self.n_steps {
                self.exhausted = true;
                self.pending.clear();
                return;
            }
            self.round += 1;
            self.pending = connected_components(&self.graph, self.radius()).into();
        }
    }

    /// Components still waiting at the current radius.
    pub fn pending(&self) -> impl Iterator<Item = &[usize]> {
        self.pending.iter().map(Vec::as_slice)
    }
}

impl Sampler for CcSampler {
    fn next_sample(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        self.t += 1;
        if self.exhausted {
            self.fallback_count += 1;
            return self.fallback.next_sample(rng);
        }
        let mut sample = Vec::new();
        while sample.len() < self.m {
            let c = self.pending.pop_front().expect("refill keeps enough pending points");
            sample.extend(c);
        }
        sample.sort_unstable();
        self.refill();
        Ok(sample)
    }

    fn draws(&self) -> usize {
        self.t
    }

    fn fallback_samples(&self) -> usize {
        self.fallback_count
    }

    fn is_exhausted(&self) -> bool {
        self.exhausted
    }
}
