//! Consensus space: sparse preference vectors, Tanimoto similarity and
//! density-based clustering of instance hypotheses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::models::ModelInstance;
use crate::point::PointSet;

/// Sparse vector with entries `1 - loss(residual)`; only nonzero entries are stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreferenceVector {
    len: usize,
    entries: Vec<(usize, f64)>,
}

impl PreferenceVector {
    pub fn from_instance(h: &ModelInstance, points: &PointSet, loss: &LossFunction) -> Self {
        let entries = points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let v = 1.0 - loss.loss(h.residual(p));
                (v > 0.0).then_some((i, v))
            })
            .collect();
        Self { len: points.len(), entries }
    }

    /// Entries are sorted by index; zero values are dropped.
    pub fn from_entries(len: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.retain(|e| e.1 != 0.0);
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConfig("duplicate preference index".into()));
        }
        if let Some(e) = entries.iter().find(|e| e.0 >= len || !(0.0..=1.0).contains(&e.1)) {
            return Err(Error::InvalidConfig(format!("invalid preference entry {e:?}")));
        }
        Ok(Self { len, entries })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum()
    }

    /// Sparse dot product; walks the shorter support and binary-searches the longer.
    pub fn dot(&self, other: &Self) -> f64 {
        let (short, long) = if self.nnz() <= other.nnz() { (self, other) } else { (other, self) };
        short
            .entries
            .iter()
            .filter_map(|&(i, v)| long.entries.binary_search_by_key(&i, |e| e.0).ok().map(|k| v * long.entries[k].1))
            .sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

pub fn preference_vector(h: &ModelInstance, points: &PointSet, loss: &LossFunction) -> PreferenceVector {
    PreferenceVector::from_instance(h, points, loss)
}

/// Tanimoto similarity `<a,b> / (|a|^2 + |b|^2 - <a,b>)`.
pub fn tanimoto(a: &PreferenceVector, b: &PreferenceVector) -> Result<f64> {
    if a.len != b.len {
        return Err(Error::DimensionMismatch { expected: a.len, found: b.len });
    }
    if a.is_zero() && b.is_zero() {
        return Err(Error::UndefinedSimilarity);
    }
    let ab = a.dot(b);
    let den = a.norm_sq() + b.norm_sq() - ab;
    Ok((ab / den).clamp(0.0, 1.0))
}

/// How the model-to-model threshold is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauSemantics {
    /// Neighbours iff Tanimoto similarity `>= tau`.
    #[default]
    Similarity,
    /// Neighbours iff Tanimoto distance `1 - similarity < tau`.
    Distance,
}

impl TauSemantics {
    pub fn neighbors(self, similarity: f64, tau: f64) -> bool {
        match self {
            TauSemantics::Similarity => similarity >= tau,
            TauSemantics::Distance => 1.0 - similarity < tau,
        }
    }
}

impl fmt::Display for TauSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauSemantics::Similarity => "similarity",
            TauSemantics::Distance => "distance",
        })
    }
}

impl FromStr for TauSemantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "similarity" => Ok(TauSemantics::Similarity),
            "distance" => Ok(TauSemantics::Distance),
            other => Err(Error::InvalidConfig(format!("unknown tau semantics '{other}'"))),
        }
    }
}

fn is_neighbor(a: &PreferenceVector, b: &PreferenceVector, tau: f64, semantics: TauSemantics) -> bool {
    match tanimoto(a, b) {
        Ok(s) => semantics.neighbors(s, tau),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCluster {
    pub members: Vec<usize>,
    pub representative: usize,
}

/// DBSCAN over preference vectors with `c_min` as the core-point count
/// (the point itself included).
///
/// Returns clusters as sorted member lists, ordered by smallest member. Noise
/// points, which only exist for `c_min > 1`, become singleton clusters.
pub fn cluster_instances(
    prefs: &[PreferenceVector],
    tau: f64,
    semantics: TauSemantics,
    c_min: usize,
) -> Vec<Vec<usize>> {
    let n = prefs.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if is_neighbor(&prefs[i], &prefs[j], tau, semantics) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let core: Vec<bool> = adj.iter().map(|a| a.len() + 1 >= c_min.max(1)).collect();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start].is_some() || !core[start] {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![start];
        label[start] = Some(id);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            if !core[u] {
                continue;
            }
            for &v in &adj[u] {
                if label[v].is_none() {
                    label[v] = Some(id);
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        clusters.push(members);
    }
    for (i, l) in label.iter().enumerate() {
        if l.is_none() {
            clusters.push(vec![i]);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Picks the highest-quality member of every cluster, lowest index on ties.
pub fn select_representatives(clusters: &[Vec<usize>], qualities: &[f64]) -> Vec<InstanceCluster> {
    clusters
        .iter()
        .map(|members| {
            let mut best = members[0];
            for &i in &members[1..] {
                if qualities[i] > qualities[best] || (qualities[i] == qualities[best] && i < best) {
                    best = i;
                }
            }
            InstanceCluster { members: members.clone(), representative: best }
        })
        .collect()
}
