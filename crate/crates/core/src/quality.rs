//! Compound instance quality against the set of kept instances.

use crate::loss::LossFunction;
use crate::models::ModelInstance;
use crate::point::PointSet;

/// The kept dominant instances together with per-point minimum-loss and
/// minimum-residual caches.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    loss: LossFunction,
    instances: Vec<ModelInstance>,
    min_loss: Vec<f64>,
    min_residual: Vec<f64>,
}

impl ActiveSet {
    pub fn new(n_points: usize, loss: LossFunction) -> Self {
        Self { loss, instances: Vec::new(), min_loss: vec![1.0; n_points], min_residual: vec![f64::INFINITY; n_points] }
    }

    pub fn from_instances(points: &PointSet, loss: LossFunction, instances: &[ModelInstance]) -> Self {
        let mut set = Self::new(points.len(), loss);
        for h in instances {
            set.insert(*h, points);
        }
        set
    }

    pub fn loss_function(&self) -> &LossFunction {
        &self.loss
    }

    pub fn instances(&self) -> &[ModelInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// `f(I, p_i)`; 1 when the set is empty.
    #[inline]
    pub fn min_loss(&self, i: usize) -> f64 {
        self.min_loss[i]
    }

    /// `phi(I, p_i)`; infinite when the set is empty.
    #[inline]
    pub fn min_residual(&self, i: usize) -> f64 {
        self.min_residual[i]
    }

    /// Overrides one cached minimum loss; used to score against a subset of points.
    pub(crate) fn set_min_loss(&mut self, i: usize, value: f64) {
        self.min_loss[i] = value;
    }

    pub fn min_losses(&self) -> &[f64] {
        &self.min_loss
    }

    pub fn min_residuals(&self) -> &[f64] {
        &self.min_residual
    }

    /// O(|P|) cache update.
    pub fn insert(&mut self, h: ModelInstance, points: &PointSet) {
        debug_assert_eq!(points.len(), self.min_loss.len());
        for (i, p) in points.iter().enumerate() {
            let r = h.residual(p);
            if r < self.min_residual[i] {
                self.min_residual[i] = r;
            }
            let l = self.loss.loss(r);
            if l < self.min_loss[i] {
                self.min_loss[i] = l;
            }
        }
        self.instances.push(h);
    }

    /// Removes instance `idx` and rebuilds the caches.
    pub fn remove(&mut self, idx: usize, points: &PointSet) -> ModelInstance {
        let h = self.instances.remove(idx);
        self.rebuild(points);
        h
    }

    /// Replaces all instances and rebuilds the caches.
    pub fn replace(&mut self, instances: Vec<ModelInstance>, points: &PointSet) {
        self.instances = instances;
        self.rebuild(points);
    }

    pub fn clear(&mut self) {
        self.instances.clear();
        self.min_loss.fill(1.0);
        self.min_residual.fill(f64::INFINITY);
    }

    fn rebuild(&mut self, points: &PointSet) {
        let instances = std::mem::take(&mut self.instances);
        self.clear();
        for h in instances {
            self.insert(h, points);
        }
    }

    /// Number of points that are inliers (`residual < eps`) of at least one kept instance.
    pub fn united_inlier_count(&self, eps: f64) -> usize {
        self.min_residual.iter().filter(|&&r| r < eps).count()
    }
}

/// RANSAC-like compound quality: inliers of `h` that no kept instance explains.
pub fn quality_rsc(h: &ModelInstance, points: &PointSet, active: &ActiveSet, eps: f64) -> usize {
    points
        .iter()
        .enumerate()
        .filter(|(i, p)| h.residual(p) < eps && active.min_residual(*i) >= eps)
        .count()
}

/// Loss-based compound quality `|P| - sum max(f(h,p), 1 - f(I,p))`, in `[0, |P|]`.
pub fn quality_f(h: &ModelInstance, points: &PointSet, active: &ActiveSet, loss: &LossFunction) -> f64 {
    let penalty: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| loss.loss(h.residual(p)).max(1.0 - active.min_loss(i)))
        .sum();
    (points.len() as f64 - penalty).max(0.0)
}

#[inline]
pub fn is_dominant(q: f64, q_min: f64) -> bool {
    q >= q_min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossKind;
    use crate::models::Line2;
    use crate::point::DataPoint;

    fn line(a: f64, b: f64, c: f64) -> ModelInstance {
        ModelInstance::Line2D(Line2::from_coefficients(a, b, c).unwrap())
    }

    fn scene() -> PointSet {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(DataPoint::xy(i as f64 * 3.0, 0.0));
            pts.push(DataPoint::xy(0.0, 1.0 + i as f64 * 3.0));
        }
        PointSet::new(pts)
    }

    #[test]
    fn empty_set_is_plain_inlier_count() {
        let pts = scene();
        let loss = LossFunction::hard(0.5).unwrap();
        let active = ActiveSet::new(pts.len(), loss);
        let h = line(0.0, 1.0, 0.0);
        assert_eq!(quality_rsc(&h, &pts, &active, 0.5), 10);
        assert_eq!(quality_f(&h, &pts, &active, &loss), 10.0);
    }

    #[test]
    fn duplicate_of_kept_instance_scores_zero() {
        let pts = scene();
        let loss = LossFunction::new(LossKind::MagsacPP, 0.5, 2).unwrap();
        let h = line(0.0, 1.0, 0.0);
        let active = ActiveSet::from_instances(&pts, loss, &[h]);
        assert_eq!(quality_rsc(&h, &pts, &active, 0.5), 0);
        assert_eq!(quality_f(&h, &pts, &active, &loss), 0.0);
    }

    #[test]
    fn dominance_is_inclusive() {
        assert!(is_dominant(25.0, 20.0));
        assert!(is_dominant(20.0, 20.0));
        assert!(!is_dominant(0.0, 20.0));
    }

    #[test]
    fn removal_rebuilds_caches() {
        let pts = scene();
        let loss = LossFunction::new(LossKind::Msac, 1.0, 1).unwrap();
        let mut active = ActiveSet::from_instances(&pts, loss, &[line(0.0, 1.0, 0.0), line(1.0, 0.0, 0.0)]);
        active.remove(0, &pts);
        let fresh = ActiveSet::from_instances(&pts, loss, &[line(1.0, 0.0, 0.0)]);
        assert_eq!(active.min_losses(), fresh.min_losses());
        assert_eq!(active.min_residuals(), fresh.min_residuals());
        assert_eq!(active.united_inlier_count(1.0), 11);
    }
}
