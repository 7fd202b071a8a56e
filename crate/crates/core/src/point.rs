use serde::{Deserialize, Serialize};

/// Maximum coordinate dimension of a data point (a 2D-2D correspondence).
pub const MAX_DIM: usize = 4;

/// A single observation: a 2D point, a 3D point or a correspondence
/// `(u1, v1, u2, v2)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    coords: [f64; MAX_DIM],
    dim: u8,
    pub weight: f64,
    /// Lower is better. Used by PROSAC-style samplers.
    pub quality_rank: Option<u32>,
}

impl DataPoint {
    /// Panics if `coords` is empty or longer than [`MAX_DIM`].
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self { coords: c, dim: coords.len() as u8, weight: 1.0, quality_rank: None }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::new(&[x, y])
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self::new(&[x, y, z])
    }

    pub fn correspondence(u1: f64, v1: f64, u2: f64, v2: f64) -> Self {
        Self::new(&[u1, v1, u2, v2])
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_rank(mut self, rank: u32) -> Self {
        self.quality_rank = Some(rank);
        self
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.coords[2]
    }

    /// First image of a correspondence.
    #[inline]
    pub fn p1(&self) -> (f64, f64) {
        (self.coords[0], self.coords[1])
    }

    /// Second image of a correspondence.
    #[inline]
    pub fn p2(&self) -> (f64, f64) {
        (self.coords[2], self.coords[3])
    }

    pub fn is_valid(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite()) && self.weight >= 0.0 && self.weight.is_finite()
    }

    pub fn distance(&self, other: &DataPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// An immutable collection of same-dimension data points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<DataPoint>,
}

impl PointSet {
    /// Panics if the points do not share one dimension or carry non-finite values.
    pub fn new(points: Vec<DataPoint>) -> Self {
        if let Some(first) = points.first() {
            let d = first.dim();
            assert!(points.iter().all(|p| p.dim() == d), "mixed point dimensions");
        }
        assert!(points.iter().all(DataPoint::is_valid), "non-finite coordinate or negative weight");
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the points, 0 for an empty set.
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, DataPoint::dim)
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &DataPoint {
        &self.points[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DataPoint> {
        self.points.iter()
    }

    pub fn is_ranked(&self) -> bool {
        self.points.iter().any(|p| p.quality_rank.is_some())
    }

    pub fn select(&self, indices: &[usize]) -> Vec<DataPoint> {
        indices.iter().map(|&i| self.points[i]).collect()
    }
}

impl std::ops::Index<usize> for PointSet {
    type Output = DataPoint;
    fn index(&self, i: usize) -> &DataPoint {
        &self.points[i]
    }
}

impl From<Vec<DataPoint>> for PointSet {
    fn from(points: Vec<DataPoint>) -> Self {
        Self::new(points)
    }
}
