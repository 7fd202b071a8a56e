use crate::error::{Error, Result};
use crate::point::DataPoint;

/// Infinite 2D line `a x + b y + c = 0` with `a^2 + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line2 {
    /// Normalises arbitrary homogeneous coefficients. Fails for a zero normal.
    pub fn from_coefficients(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = a.hypot(b);
        if !(n > 1e-300) || !n.is_finite() || !c.is_finite() {
            return Err(Error::DegenerateSample("line normal vanishes"));
        }
        let (mut a, mut b, mut c) = (a / n, b / n, c / n);
        if (a.abs() >= b.abs() && a < 0.0) || (b.abs() > a.abs() && b < 0.0) {
            a = -a;
            b = -b;
            c = -c;
        }
        Ok(Self { a, b, c })
    }

    pub fn through(p: (f64, f64), q: (f64, f64)) -> Result<Self> {
        let a = p.1 - q.1;
        let b = q.0 - p.0;
        let c = p.0 * q.1 - q.0 * p.1;
        Self::from_coefficients(a, b, c)
    }

    /// Weighted total least squares: the line through the weighted centroid along
    /// the principal axis of the weighted scatter matrix.
    pub fn fit_tls(points: &[DataPoint], weights: &[f64]) -> Result<Self> {
        let (mut sw, mut mx, mut my) = (0.0, 0.0, 0.0);
        for (p, &w) in points.iter().zip(weights) {
            sw += w;
            mx += w * p.x();
            my += w * p.y();
        }
        if !(sw > 0.0) {
            return Err(Error::DegenerateSample("no positive weights"));
        }
        mx /= sw;
        my /= sw;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (p, &w) in points.iter().zip(weights) {
            let (dx, dy) = (p.x() - mx, p.y() - my);
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
        let spread = sxx + syy;
        if !(spread > 1e-24 * sw) {
            return Err(Error::DegenerateSample("points coincide"));
        }
        // Direction of largest spread, closed form for a symmetric 2x2 matrix.
        let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let (s, c) = theta.sin_cos();
        let (a, b) = (-s, c);
        Self::from_coefficients(a, b, -(a * mx + b * my))
    }

    #[inline]
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        (self.a * x + self.b * y + self.c).abs()
    }

    /// Coordinate of the orthogonal projection of `(x, y)` along the direction `(-b, a)`.
    #[inline]
    pub fn project(&self, x: f64, y: f64) -> f64 {
        -self.b * x + self.a * y
    }

    /// Point at parameter `t` along the line.
    #[inline]
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (-self.a * self.c - self.b * t, -self.b * self.c + self.a * t)
    }

    pub fn params(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// Line segment: a supporting line plus the parameter interval `[t_min, t_max]`
/// measured along the line direction `(-b, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub line: Line2,
    pub t_min: f64,
    pub t_max: f64,
}

impl Segment2 {
    pub fn new(line: Line2, t0: f64, t1: f64) -> Self {
        Self { line, t_min: t0.min(t1), t_max: t0.max(t1) }
    }

    /// Builds from raw coefficients, re-expressing the interval if normalisation flips the line.
    pub fn from_params(p: &[f64]) -> Result<Self> {
        let n = p[0].hypot(p[1]);
        if !(n > 1e-300) {
            return Err(Error::DegenerateSample("line normal vanishes"));
        }
        let line = Line2::from_coefficients(p[0], p[1], p[2])?;
        // Parameters were expressed w.r.t. the direction of the unnormalised normal.
        let flipped = (line.a * p[0] + line.b * p[1]) < 0.0;
        let (t0, t1) = if flipped { (-p[4], -p[3]) } else { (p[3], p[4]) };
        Ok(Self::new(line, t0, t1))
    }

    pub fn endpoints(&self) -> ((f64, f64), (f64, f64)) {
        (self.line.point_at(self.t_min), self.line.point_at(self.t_max))
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let t = self.line.project(x, y).clamp(self.t_min, self.t_max);
        let (qx, qy) = self.line.point_at(t);
        (x - qx).hypot(y - qy)
    }

    pub fn params(&self) -> [f64; 5] {
        [self.line.a, self.line.b, self.line.c, self.t_min, self.t_max]
    }

    pub fn length(&self) -> f64 {
        self.t_max - self.t_min
    }

    /// Re-derives the extent from the points within `eps` of the supporting line.
    /// Inlier projections are split wherever consecutive ones are more than
    /// `max_gap` apart; the run with the largest total weight defines the interval.
    /// Leaves the segment unchanged when no point is within `eps`.
    pub fn extend_to_inliers(&mut self, points: &[DataPoint], eps: f64, max_gap: f64) {
        let mut proj: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| self.line.distance(p.x(), p.y()) < eps)
            .map(|p| (self.line.project(p.x(), p.y()), p.weight.max(1e-12)))
            .collect();
        if proj.is_empty() {
            return;
        }
        proj.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (0.0, proj[0].0, proj[0].0);
        let (mut start, mut acc) = (0usize, 0.0);
        for i in 0..proj.len() {
            if i > start && proj[i].0 - proj[i - 1].0 > max_gap {
                start = i;
                acc = 0.0;
            }
            acc += proj[i].1;
            if acc > best.0 {
                best = (acc, proj[start].0, proj[i].0);
            }
        }
        self.t_min = best.1;
        self.t_max = best.2;
    }
}
