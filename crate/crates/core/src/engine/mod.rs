//! The multi-instance fitting loop: propose dominant instances, merge
//! similar ones in the consensus space, refine by IRLS, and stop once an
//! unseen dominant instance has become unlikely.

mod evaluate;
mod irls;
mod termination;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use evaluate::{instance_scores, match_instances, misclassification_error, InstanceScore};
pub use irls::{refine_irls, IrlsOutcome};
pub use termination::{should_terminate, unseen_inlier_bound};

use crate::consensus::{cluster_instances, select_representatives, PreferenceVector, TauSemantics};
use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::models::{
    fit_minimal, fit_nonminimal, fundamental_plane_degenerate, oriented_epipolar_ok, sample_cheirality_ok,
    sample_degenerate_with, ModelInstance, ModelType, COLLINEARITY_AREA,
};
use crate::point::{DataPoint, PointSet};
use crate::quality::{is_dominant, quality_f, ActiveSet};
use crate::sampling::{make_sampler, NeighborhoodParams, Sampler, SamplerKind};

/// What the `k` of the termination bound counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KCounts {
    /// Sampler draws.
    #[default]
    Samples,
    /// Outer iterations.
    Iterations,
}

impl fmt::Display for KCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KCounts::Samples => "samples",
            KCounts::Iterations => "iterations",
        })
    }
}

impl FromStr for KCounts {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "samples" => Ok(KCounts::Samples),
            "iterations" => Ok(KCounts::Iterations),
            other => Err(Error::InvalidConfig(format!("unknown k-counts '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub loss: LossKind,
    /// Inlier-outlier threshold, or its loose upper bound for MAGSAC++.
    pub epsilon: f64,
    /// Residual degrees of freedom for MAGSAC++; the model's own when unset.
    pub loss_dof: Option<u32>,
    pub q_min: f64,
    pub tau: f64,
    pub tau_semantics: TauSemantics,
    pub c_min: usize,
    pub confidence: f64,
    pub batch_size: usize,
    pub max_irls_iters: usize,
    pub irls_tol: f64,
    pub sampler: SamplerKind,
    pub neighborhood: NeighborhoodParams,
    pub seed: u64,
    pub max_proposals: usize,
    pub k_counts: KCounts,
    /// Minimal subsets tried inside a larger-than-minimal sample.
    pub local_trials: usize,
    /// Safety cap on cluster/refine passes per outer iteration.
    pub max_inner_passes: usize,
    pub collinearity_area: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::MagsacPP,
            epsilon: 3.0,
            loss_dof: None,
            q_min: 20.0,
            tau: 0.2,
            tau_semantics: TauSemantics::Similarity,
            c_min: 1,
            confidence: 0.99,
            batch_size: 10,
            max_irls_iters: 25,
            irls_tol: 1e-6,
            sampler: SamplerKind::ConnectedComponents,
            neighborhood: NeighborhoodParams::default(),
            seed: 0,
            max_proposals: 10_000,
            k_counts: KCounts::Samples,
            local_trials: 50,
            max_inner_passes: 50,
            collinearity_area: COLLINEARITY_AREA,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.q_min > 0.0) {
            return bad(format!("q_min must be positive, got {}", self.q_min));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!("confidence must lie in (0, 1), got {}", self.confidence));
        }
        if self.batch_size == 0 || self.max_irls_iters == 0 || self.max_proposals == 0 || self.c_min == 0 {
            return bad("batch_size, max_irls_iters, max_proposals and c_min must be positive".into());
        }
        if !(self.irls_tol > 0.0) {
            return bad(format!("irls_tol must be positive, got {}", self.irls_tol));
        }
        let nb = &self.neighborhood;
        if !(nb.r_min > 0.0 && nb.r_min <= nb.r_max && nb.n_steps > 0 && nb.scale > 0.0) {
            return bad(format!("invalid neighbourhood radii {nb:?}"));
        }
        Ok(())
    }

    /// The loss function used for a given model class.
    pub fn loss_function(&self, model_type: ModelType) -> Result<LossFunction> {
        LossFunction::new(self.loss, self.epsilon, self.loss_dof.unwrap_or(model_type.residual_dof()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The probabilistic bound was met.
    Confidence,
    /// The connected-component schedule was used up with instances found.
    SamplerExhausted,
    /// The proposal cap was reached.
    ProposalCap,
}

/// Outcome of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model_type: ModelType,
    pub instances: Vec<ModelInstance>,
    /// Compound quality of each instance against all the others.
    pub qualities: Vec<f64>,
    /// Nearest instance per point, `None` when no residual is below epsilon.
    pub min_residual_assignment: Vec<Option<usize>>,
    /// `loss_matrix[j][i]`: loss of point `i` under instance `j`.
    pub loss_matrix: Vec<Vec<f64>>,
    pub iterations: usize,
    pub proposals_tried: usize,
    pub sampler_draws: usize,
    pub fallback_samples: usize,
    pub termination: Termination,
    /// Seconds.
    pub wall_time: f64,
}

impl FitReport {
    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Indices of the points with loss below 1 under instance `j`.
    pub fn inliers(&self, j: usize) -> Vec<usize> {
        self.loss_matrix[j].iter().enumerate().filter(|(_, &l)| l < 1.0).map(|(i, _)| i).collect()
    }

    /// Builds assignment and loss matrix for a given instance list.
    pub fn assign(points: &PointSet, instances: &[ModelInstance], loss: &LossFunction) -> (Vec<Option<usize>>, Vec<Vec<f64>>) {
        let eps = loss.cutoff();
        let assignment = points
            .iter()
            .map(|p| {
                let mut best: Option<(usize, f64)> = None;
                for (j, h) in instances.iter().enumerate() {
                    let r = h.residual(p);
                    if r < eps && best.is_none_or(|(_, b)| r < b) {
                        best = Some((j, r));
                    }
                }
                best.map(|b| b.0)
            })
            .collect();
        let losses = instances.iter().map(|h| points.iter().map(|p| loss.loss(h.residual(p))).collect()).collect();
        (assignment, losses)
    }
}

struct Fitter<'a> {
    points: &'a PointSet,
    model_type: ModelType,
    cfg: &'a EngineConfig,
    loss: LossFunction,
    m: usize,
}

impl Fitter<'_> {
    /// Candidate models from one sample, already completed against all points.
    fn hypotheses(&self, sample: &[usize], rng: &mut ChaCha8Rng) -> Vec<ModelInstance> {
        if sample.len() == self.m {
            return self.hypotheses_from(&self.points.select(sample));
        }
        let pts = self.points.select(sample);
        let weights: Vec<f64> = pts.iter().map(|p| p.weight).collect();
        let mut out: Vec<ModelInstance> = fit_nonminimal(self.model_type, &pts, &weights).into_iter().collect();
        for h in &mut out {
            h.finalize(self.points.points(), self.loss.cutoff());
        }
        for _ in 0..self.cfg.local_trials {
            let sub: Vec<DataPoint> = index::sample(rng, pts.len(), self.m).into_iter().map(|k| pts[k]).collect();
            out.extend(self.hypotheses_from(&sub));
        }
        out
    }

    fn hypotheses_from(&self, sample: &[DataPoint]) -> Vec<ModelInstance> {
        if sample_degenerate_with(self.model_type, sample, self.cfg.collinearity_area) {
            return Vec::new();
        }
        if self.model_type == ModelType::Homography && !sample_cheirality_ok(sample) {
            return Vec::new();
        }
        let Ok(mut models) = fit_minimal(self.model_type, sample) else {
            return Vec::new();
        };
        if self.model_type == ModelType::FundamentalMatrix {
            if fundamental_plane_degenerate(sample, self.cfg.epsilon) {
                return Vec::new();
            }
            models.retain(|h| oriented_epipolar_ok(h, sample));
        }
        for h in &mut models {
            h.finalize(self.points.points(), self.loss.cutoff());
        }
        models
    }

    /// Scores hypotheses of a sample on the sample itself, then checks the
    /// winner's dominance on all points.
    fn propose(&self, sample: &[usize], active: &ActiveSet, rng: &mut ChaCha8Rng) -> Option<(ModelInstance, f64)> {
        let hyps = self.hypotheses(sample, rng);
        let best = if hyps.len() <= 1 || sample.len() == self.m {
            hyps.into_iter()
                .map(|h| (h, quality_f(&h, self.points, active, &self.loss)))
                .fold(None, |best: Option<(ModelInstance, f64)>, c| match best {
                    Some(b) if b.1 >= c.1 => Some(b),
                    _ => Some(c),
                })?
        } else {
            let local = PointSet::new(self.points.select(sample));
            let mut local_active = ActiveSet::new(local.len(), self.loss);
            for (k, &i) in sample.iter().enumerate() {
                local_active.set_min_loss(k, active.min_loss(i));
            }
            let mut best: Option<(ModelInstance, f64)> = None;
            for h in hyps {
                let q = quality_f(&h, &local, &local_active, &self.loss);
                if best.is_none_or(|b| q > b.1) {
                    best = Some((h, q));
                }
            }
            let h = best?.0;
            (h, quality_f(&h, self.points, active, &self.loss))
        };
        is_dominant(best.1, self.cfg.q_min).then_some(best)
    }

    fn refine(&self, h: &ModelInstance) -> ModelInstance {
        refine_irls(h, self.points, &self.loss, self.cfg.max_irls_iters, self.cfg.irls_tol).instance
    }

    /// Q_f of every instance against all the others.
    fn mutual_qualities(&self, instances: &[ModelInstance]) -> Vec<f64> {
        (0..instances.len())
            .map(|j| {
                let others: Vec<ModelInstance> =
                    instances.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, h)| *h).collect();
                let set = ActiveSet::from_instances(self.points, self.loss, &others);
                quality_f(&instances[j], self.points, &set, &self.loss)
            })
            .collect()
    }

    /// Drops the weakest instance until all reach `q_min`.
    fn enforce_q_min(&self, mut instances: Vec<ModelInstance>) -> (Vec<ModelInstance>, Vec<f64>) {
        loop {
            let q = self.mutual_qualities(&instances);
            let weakest = q
                .iter()
                .enumerate()
                .fold(None, |w: Option<(usize, f64)>, (j, &v)| match w {
                    Some(b) if b.1 <= v => Some(b),
                    _ => Some((j, v)),
                });
            match weakest {
                Some((j, v)) if !is_dominant(v, self.cfg.q_min) => {
                    instances.remove(j);
                }
                _ => return (instances, q),
            }
        }
    }

    /// Alternates consensus clustering and refinement until no two instances merge.
    fn consolidate(&self, instances: Vec<ModelInstance>) -> (Vec<ModelInstance>, Vec<f64>) {
        let refined: Vec<ModelInstance> = instances.iter().map(|h| self.refine(h)).collect();
        let (mut current, mut qualities) = self.enforce_q_min(refined);
        for _ in 0..self.cfg.max_inner_passes {
            let prefs: Vec<PreferenceVector> =
                current.iter().map(|h| PreferenceVector::from_instance(h, self.points, &self.loss)).collect();
            let clusters = cluster_instances(&prefs, self.cfg.tau, self.cfg.tau_semantics, self.cfg.c_min);
            if clusters.iter().all(|c| c.len() == 1) {
                break;
            }
            let member_q: Vec<f64> = {
                let mut q = vec![0.0; current.len()];
                for c in &clusters {
                    let others: Vec<ModelInstance> =
                        (0..current.len()).filter(|k| !c.contains(k)).map(|k| current[k]).collect();
                    let set = ActiveSet::from_instances(self.points, self.loss, &others);
                    for &j in c {
                        q[j] = quality_f(&current[j], self.points, &set, &self.loss);
                    }
                }
                q
            };
            let reps: Vec<ModelInstance> = select_representatives(&clusters, &member_q)
                .into_iter()
                .map(|c| self.refine(&current[c.representative]))
                .collect();
            debug_assert!(reps.len() < current.len());
            (current, qualities) = self.enforce_q_min(reps);
        }
        (current, qualities)
    }
}

/// Fits multiple instances of `model_type` to `points`.
pub fn fit(points: &PointSet, model_type: ModelType, cfg: &EngineConfig) -> Result<FitReport> {
    let start = Instant::now();
    cfg.validate()?;
    let m = model_type.sample_size();
    if points.len() < m {
        return Err(Error::ExhaustedData { needed: m, available: points.len() });
    }
    if points.dim() != model_type.point_dim() {
        return Err(Error::DimensionMismatch { expected: model_type.point_dim(), found: points.dim() });
    }
    let loss = cfg.loss_function(model_type)?;
    let fitter = Fitter { points, model_type, cfg, loss, m };
    let mut sampler: Box<dyn Sampler> = make_sampler(cfg.sampler, points, m, &cfg.neighborhood)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut active = ActiveSet::new(points.len(), loss);
    let mut qualities = Vec::new();
    let mut iterations = 0;
    let mut proposals = 0;
    let draw_budget = 50 * cfg.batch_size;

    let termination = loop {
        iterations += 1;
        let mut accepted = 0;
        let mut draws = 0;
        while accepted < cfg.batch_size && draws < draw_budget && proposals < cfg.max_proposals {
            if sampler.is_exhausted() && !active.is_empty() {
                break;
            }
            let sample = sampler.next_sample(&mut rng)?;
            draws += 1;
            proposals += 1;
            if let Some((h, _)) = fitter.propose(&sample, &active, &mut rng) {
                active.insert(h, points);
                accepted += 1;
            }
        }
        if accepted > 0 {
            let (kept, q) = fitter.consolidate(active.instances().to_vec());
            active.replace(kept, points);
            qualities = q;
        }
        let united = active.united_inlier_count(cfg.epsilon);
        let k = match cfg.k_counts {
            KCounts::Samples => sampler.draws(),
            KCounts::Iterations => iterations,
        };
        if should_terminate(points.len(), united, k.max(1), m, cfg.confidence, cfg.q_min)? {
            break Termination::Confidence;
        }
        if sampler.is_exhausted() && !active.is_empty() {
            break Termination::SamplerExhausted;
        }
        if proposals >= cfg.max_proposals {
            break Termination::ProposalCap;
        }
    };

    let instances = active.instances().to_vec();
    let (min_residual_assignment, loss_matrix) = FitReport::assign(points, &instances, &loss);
    Ok(FitReport {
        model_type,
        instances,
        qualities,
        min_residual_assignment,
        loss_matrix,
        iterations,
        proposals_tried: proposals,
        sampler_draws: sampler.draws(),
        fallback_samples: sampler.fallback_samples(),
        termination,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
