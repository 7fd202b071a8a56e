use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of points assigned to the wrong ground-truth cluster under the
/// best one-to-one matching of predicted instances to ground-truth instances.
///
/// `assignment[i]` is the predicted instance of point `i` (`None` for
/// outliers); `labels[i]` is its ground-truth label, 0 meaning outlier.
/// Outliers are always matched to outliers.
pub fn misclassification_error(assignment: &[Option<usize>], labels: &[u32]) -> Result<f64> {
    let m = Matching::new(assignment, labels)?;
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(1.0 - (m.outliers_correct + m.matched) as f64 / labels.len() as f64)
}

/// Ground-truth label matched to each predicted instance under the matching
/// used by [`misclassification_error`]; `None` when an instance is left over.
pub fn match_instances(assignment: &[Option<usize>], labels: &[u32]) -> Result<Vec<Option<u32>>> {
    let m = Matching::new(assignment, labels)?;
    Ok((0..m.n_pred).map(|j| m.label_of[j].filter(|&l| l as usize <= m.n_gt)).collect())
}

/// Per-instance precision and recall against its matched ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub instance: usize,
    pub label: Option<u32>,
    pub assigned: usize,
    pub precision: f64,
    pub recall: f64,
}

pub fn instance_scores(assignment: &[Option<usize>], labels: &[u32]) -> Result<Vec<InstanceScore>> {
    let matched = match_instances(assignment, labels)?;
    Ok(matched
        .iter()
        .enumerate()
        .map(|(j, &label)| {
            let assigned = assignment.iter().filter(|a| **a == Some(j)).count();
            let (hits, truth) = match label {
                Some(l) => (
                    assignment.iter().zip(labels).filter(|(a, &t)| **a == Some(j) && t == l).count(),
                    labels.iter().filter(|&&t| t == l).count(),
                ),
                None => (0, 0),
            };
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            InstanceScore { instance: j, label, assigned, precision: ratio(hits, assigned), recall: ratio(hits, truth) }
        })
        .collect())
}

struct Matching {
    n_gt: usize,
    n_pred: usize,
    outliers_correct: usize,
    matched: usize,
    /// Label (1-based) matched to each predicted column.
    label_of: Vec<Option<u32>>,
}

impl Matching {
    fn new(assignment: &[Option<usize>], labels: &[u32]) -> Result<Self> {
        if assignment.len() != labels.len() {
            return Err(Error::LabelMismatch { labels: labels.len(), points: assignment.len() });
        }
        let n_gt = labels.iter().copied().max().unwrap_or(0) as usize;
        let n_pred = assignment.iter().flatten().map(|&j| j + 1).max().unwrap_or(0);
        let size = n_gt.max(n_pred);
        let mut table = Matrix::new(size.max(1), size.max(1), 0i64);
        let mut outliers_correct = 0usize;
        for (a, &l) in assignment.iter().zip(labels) {
            match (a, l) {
                (None, 0) => outliers_correct += 1,
                (Some(j), l) if l > 0 => table[(l as usize - 1, *j)] += 1,
                _ => {}
            }
        }
        let mut label_of = vec![None; n_pred];
        let mut matched = 0;
        if size > 0 {
            let (total, rows) = kuhn_munkres(&table);
            matched = total as usize;
            for (row, &col) in rows.iter().enumerate() {
                if col < n_pred {
                    label_of[col] = Some(row as u32 + 1);
                }
            }
        }
        Ok(Self { n_gt, n_pred, outliers_correct, matched, label_of })
    }
}
