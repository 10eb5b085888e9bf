//! Weighted sufficient statistics shared by the learners.

use std::f64::consts::PI;

pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Weighted running mean and variance (West's incremental update).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedGaussian {
    mass: f64,
    mean: f64,
    m2: f64,
}

impl WeightedGaussian {
    pub fn add(&mut self, x: f64, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        let mass = self.mass + weight;
        let delta = x - self.mean;
        let r = delta * weight / mass;
        self.mean += r;
        self.m2 += self.mass * delta * r;
        self.mass = mass;
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance of the weighted sample.
    pub fn variance(&self) -> f64 {
        if self.mass > 0.0 {
            (self.m2 / self.mass).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let var = self.variance().max(VARIANCE_FLOOR);
        let d = x - self.mean;
        -d * d / (2.0 * var) - 0.5 * (2.0 * PI * var).ln()
    }

    /// Weighted mass expected at or below `x` under the Gaussian fit.
    pub fn mass_below(&self, x: f64) -> f64 {
        if self.mass <= 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd <= VARIANCE_FLOOR.sqrt() {
            return if x >= self.mean { self.mass } else { 0.0 };
        }
        let z = (x - self.mean) / (sd * std::f64::consts::SQRT_2);
        self.mass * 0.5 * (1.0 + libm::erf(z))
    }
}

/// Binary entropy in bits of a two-class mass distribution.
pub fn entropy(dist: [f64; 2]) -> f64 {
    let total = dist[0] + dist[1];
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let p = m / total;
            -p * p.log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_batch_moments() {
        let xs = [1.0, 2.0, 4.0, 7.0, 11.0];
        let mut g = WeightedGaussian::default();
        xs.iter().for_each(|&x| g.add(x, 1.0));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert_relative_eq!(g.mean(), mean, epsilon = 1e-12);
        assert_relative_eq!(g.variance(), var, epsilon = 1e-12);
    }

    #[test]
    fn integer_weight_equals_copies() {
        let mut a = WeightedGaussian::default();
        let mut b = WeightedGaussian::default();
        for (x, w) in [(1.0, 3.0), (-2.0, 2.0), (5.5, 1.0)] {
            a.add(x, w);
            for _ in 0..w as usize {
                b.add(x, 1.0);
            }
        }
        assert_relative_eq!(a.mass(), b.mass());
        assert_relative_eq!(a.mean(), b.mean(), epsilon = 1e-12);
        assert_relative_eq!(a.variance(), b.variance(), epsilon = 1e-12);
    }

    #[test]
    fn cdf_and_entropy() {
        let mut g = WeightedGaussian::default();
        for x in [-1.0, 1.0] {
            g.add(x, 5.0);
        }
        assert_relative_eq!(g.mass_below(0.0), 5.0, epsilon = 1e-9);
        assert_relative_eq!(entropy([1.0, 1.0]), 1.0);
        assert_eq!(entropy([3.0, 0.0]), 0.0);
    }
}
