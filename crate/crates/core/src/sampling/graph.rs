use std::collections::HashMap;

use crate::point::{DataPoint, PointSet, MAX_DIM};

/// Radius-annotated neighbourhood graph over a point set.
///
/// Edges are stored once with `i < j`, sorted by `(i, j)`; distances are
/// Euclidean in the joint coordinate space (4D for correspondences).
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    n_points: usize,
    r_max: f64,
    edges: Vec<(usize, usize, f64)>,
}

impl NeighborhoodGraph {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbours of every point within `r_max`, nearest first (ties by index).
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let mut lists: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.n_points];
        for &(i, j, d) in &self.edges {
            lists[i].push((d, j));
            lists[j].push((d, i));
        }
        lists
            .into_iter()
            .map(|mut l| {
                l.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                l.into_iter().map(|(_, j)| j).collect()
            })
            .collect()
    }
}

/// All pairs with distance `<= r_max`, via a uniform grid of cell size `r_max`.
pub fn build_neighborhood(points: &PointSet, r_max: f64) -> NeighborhoodGraph {
    build_neighborhood_scaled(points, r_max, 1.0)
}

/// As [`build_neighborhood`], with every coordinate multiplied by `scale` first.
pub fn build_neighborhood_scaled(points: &PointSet, r_max: f64, scale: f64) -> NeighborhoodGraph {
    assert!(r_max > 0.0, "neighbourhood radius must be positive");
    let scaled: Vec<DataPoint> = if scale == 1.0 {
        points.points().to_vec()
    } else {
        points.iter().map(|p| DataPoint::new(&p.coords().iter().map(|c| c * scale).collect::<Vec<_>>())).collect()
    };
    let dim = points.dim();
    let cell_of = |p: &DataPoint| {
        let mut key = [0i64; MAX_DIM];
        for (k, c) in p.coords().iter().enumerate() {
            key[k] = (c / r_max).floor() as i64;
        }
        key
    };
    let mut grid: HashMap<[i64; MAX_DIM], Vec<usize>> = HashMap::new();
    for (i, p) in scaled.iter().enumerate() {
        grid.entry(cell_of(p)).or_default().push(i);
    }
    let offsets = neighbour_offsets(dim);
    let mut edges = Vec::new();
    for (i, p) in scaled.iter().enumerate() {
        let key = cell_of(p);
        for off in &offsets {
            let mut k = key;
            for d in 0..dim {
                k[d] += off[d];
            }
            if let Some(bucket) = grid.get(&k) {
                for &j in bucket {
                    if j > i {
                        let d = p.distance(&scaled[j]);
                        if d <= r_max {
                            edges.push((i, j, d));
                        }
                    }
                }
            }
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    NeighborhoodGraph { n_points: points.len(), r_max, edges }
}

fn neighbour_offsets(dim: usize) -> Vec<[i64; MAX_DIM]> {
    let mut out = vec![[0i64; MAX_DIM]];
    for d in 0..dim {
        out = out
            .into_iter()
            .flat_map(|o| {
                [-1, 0, 1].into_iter().map(move |v| {
                    let mut o = o;
                    o[d] = v;
                    o
                })
            })
            .collect();
    }
    out
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, which keeps roots equal to component minima.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the subgraph with edges of length `<= r`.
///
/// Singletons are dropped; members are sorted ascending; components are
/// ordered by size descending, ties by smallest member.
pub fn connected_components(graph: &NeighborhoodGraph, r: f64) -> Vec<Vec<usize>> {
    let mut sets = DisjointSets::new(graph.n_points);
    for &(i, j, d) in &graph.edges {
        if d <= r {
            sets.union(i, j);
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..graph.n_points {
        let root = sets.find(i);
        by_root.entry(root).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = by_root.into_values().filter(|c| c.len() > 1).collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_edges() {
        let pts = PointSet::new(vec![DataPoint::xy(0.0, 0.0), DataPoint::xy(10.0, 0.0), DataPoint::xy(30.0, 0.0)]);
        let g = build_neighborhood(&pts, 15.0);
        assert_eq!(g.edges(), &[(0, 1, 10.0)]);
        assert_eq!(connected_components(&g, 15.0), vec![vec![0, 1]]);
        assert!(connected_components(&g, 0.0).is_empty());
    }

    #[test]
    fn empty_graph() {
        let g = build_neighborhood(&PointSet::default(), 5.0);
        assert!(g.edges().is_empty());
        assert!(connected_components(&g, 5.0).is_empty());
    }

    #[test]
    fn scale_factor_applies() {
        let pts = PointSet::new(vec![DataPoint::xy(0.0, 0.0), DataPoint::xy(10.0, 0.0)]);
        assert_eq!(build_neighborhood_scaled(&pts, 6.0, 0.5).edges().len(), 1);
        assert!(build_neighborhood(&pts, 6.0).edges().is_empty());
    }

    #[test]
    fn ordering_of_components() {
        let mut pts = Vec::new();
        for i in 0..3 {
            pts.push(DataPoint::xy(100.0 + i as f64, 0.0));
        }
        for i in 0..2 {
            pts.push(DataPoint::xy(i as f64, 0.0));
        }
        for i in 0..2 {
            pts.push(DataPoint::xy(-100.0 + i as f64, 0.0));
        }
        let g = build_neighborhood(&PointSet::new(pts), 2.0);
        assert_eq!(connected_components(&g, 2.0), vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
    }
}
