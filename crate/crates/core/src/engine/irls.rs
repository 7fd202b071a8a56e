use crate::loss::LossFunction;
use crate::models::{fit_nonminimal, ModelInstance};
use crate::point::PointSet;

/// Result of [`refine_irls`].
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsOutcome {
    /// Best iterate by total loss; the input when nothing improved on it.
    pub instance: ModelInstance,
    pub iterations: usize,
    pub converged: bool,
    /// A weighted fit was degenerate and refinement stopped early.
    pub degenerate: bool,
    /// Total loss of the input followed by that of every iterate.
    pub loss_trace: Vec<f64>,
}

pub(crate) fn total_loss(h: &ModelInstance, points: &PointSet, loss: &LossFunction) -> f64 {
    points.iter().map(|p| loss.loss(h.residual(p))).sum()
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / norm.max(f64::MIN_POSITIVE)
}

/// Iteratively re-weighted least squares from `h`. Robust weights are
/// multiplied by the points' own weights.
pub fn refine_irls(h: &ModelInstance, points: &PointSet, loss: &LossFunction, max_iters: usize, tol: f64) -> IrlsOutcome {
    let model_type = h.model_type();
    let mut best = *h;
    let mut best_loss = total_loss(h, points, loss);
    let mut trace = vec![best_loss];
    let mut current = *h;
    let mut weights = vec![0.0; points.len()];
    let mut out = IrlsOutcome { instance: *h, iterations: 0, converged: false, degenerate: false, loss_trace: Vec::new() };
    for it in 1..=max_iters {
        for (w, p) in weights.iter_mut().zip(points.iter()) {
            *w = loss.weight(current.residual(p)) * p.weight;
        }
        let mut next = match fit_nonminimal(model_type, points.points(), &weights) {
            Ok(next) => next,
            Err(_) => {
                out.degenerate = true;
                break;
            }
        };
        next.finalize(points.points(), loss.cutoff());
        out.iterations = it;
        let l = total_loss(&next, points, loss);
        trace.push(l);
        if l < best_loss {
            best_loss = l;
            best = next;
        }
        let change = relative_change(&current.params(), &next.params());
        current = next;
        if change < tol {
            out.converged = true;
            break;
        }
    }
    out.instance = best;
    out.loss_trace = trace;
    out
}
