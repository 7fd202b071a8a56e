use rand::seq::index;
use rand::RngCore;

use super::Sampler;
use crate::error::{Error, Result};
use crate::point::PointSet;

/// Number of draws after which PROSAC's schedule has grown to the full set.
pub const PROSAC_T_N: f64 = 200_000.0;

/// PROSAC: samples drawn from progressively larger prefixes of the
/// quality-ordered points, becoming uniform once the prefix covers everything.
#[derive(Debug, Clone)]
pub struct ProsacSampler {
    order: Vec<usize>,
    m: usize,
    ranked: bool,
    /// Current prefix size.
    n: usize,
    /// Draw at which the prefix grows next.
    t_prime: f64,
    t_n: f64,
    t: usize,
}

impl ProsacSampler {
    /// Points without a rank are ordered after ranked ones. A point set with no
    /// ranks at all is sampled uniformly.
    pub fn new(points: &PointSet, m: usize) -> Result<Self> {
        let n_points = points.len();
        if m == 0 || n_points < m {
            return Err(Error::ExhaustedData { needed: m.max(1), available: n_points });
        }
        let ranked = points.is_ranked();
        let mut order: Vec<usize> = (0..n_points).collect();
        order.sort_by_key(|&i| (points[i].quality_rank.unwrap_or(u32::MAX), i));
        let mut t_n = PROSAC_T_N;
        for i in 0..m {
            t_n *= (m - i) as f64 / (n_points - i) as f64;
        }
        Ok(Self { order, m, ranked, n: m, t_prime: 1.0, t_n, t: 0 })
    }

    /// Current size of the sampled prefix.
    pub fn prefix_len(&self) -> usize {
        self.n
    }

    fn grow(&mut self) {
        let n_total = self.order.len();
        while self.n < n_total && (self.t as f64) > self.t_prime {
            let next = self.t_n * (self.n + 1) as f64 / (self.n + 1 - self.m) as f64;
            self.t_prime += (next - self.t_n).ceil().max(1.0);
            self.t_n = next;
            self.n += 1;
        }
    }
}

impl Sampler for ProsacSampler {
    fn next_sample(&mut self, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        self.t += 1;
        let n_total = self.order.len();
        if !self.ranked {
            return Ok(index::sample(rng, n_total, self.m).into_vec());
        }
        self.grow();
        let sample = if self.n == self.m && self.t == 1 {
            self.order[..self.m].to_vec()
        } else if self.n == n_total && (self.t as f64) > self.t_prime {
            index::sample(rng, n_total, self.m).into_iter().map(|k| self.order[k]).collect()
        } else {
            // The newest point of the prefix plus m - 1 from the rest of it.
            let mut s: Vec<usize> =
                index::sample(rng, self.n - 1, self.m - 1).into_iter().map(|k| self.order[k]).collect();
            s.push(self.order[self.n - 1]);
            s
        };
        Ok(sample)
    }

    fn draws(&self) -> usize {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::DataPoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ranked(n: usize) -> PointSet {
        PointSet::new((0..n).map(|i| DataPoint::xy(i as f64, 0.0).with_rank((n - 1 - i) as u32)).collect())
    }

    #[test]
    fn first_draw_is_top_ranked() {
        let pts = ranked(50);
        let mut s = ProsacSampler::new(&pts, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut first = s.next_sample(&mut rng).unwrap();
        first.sort();
        assert_eq!(first, vec![46, 47, 48, 49]);
    }

    #[test]
    fn prefix_grows_monotonically() {
        let pts = ranked(30);
        let mut s = ProsacSampler::new(&pts, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut last = 0;
        for _ in 0..1000 {
            s.next_sample(&mut rng).unwrap();
            assert!(s.prefix_len() >= last);
            last = s.prefix_len();
        }
        assert!(last > 2);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(ProsacSampler::new(&ranked(3), 4), Err(Error::ExhaustedData { .. })));
    }
}
