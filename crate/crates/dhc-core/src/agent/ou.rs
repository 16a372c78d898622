//! Ornstein-Uhlenbeck exploration noise.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Temporally correlated two-dimensional noise process:
/// `x <- x + theta*(mu - x)*dt + sigma*sqrt(dt)*xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuState {
    pub x: [f64; 2],
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
}

impl OuState {
    pub fn new(theta: f64, sigma: f64, mu: f64, dt: f64) -> Self {
        OuState {
            x: [mu, mu],
            theta,
            sigma,
            mu,
            dt,
        }
    }

    /// Re-centers the process on its mean (episode boundaries).
    pub fn reset(&mut self) {
        self.x = [self.mu, self.mu];
    }

    /// Advances the process one step and returns the new noise value.
    pub fn next(&mut self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let sdt = self.dt.sqrt();
        for v in self.x.iter_mut() {
            let xi: f64 = StandardNormal.sample(rng);
            *v += self.theta * (self.mu - *v) * self.dt + self.sigma * sdt * xi;
        }
        self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_sigma_at_mean_is_a_fixed_point() {
        let mut ou = OuState::new(0.15, 0.0, 0.3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            assert_eq!(ou.next(&mut rng), [0.3, 0.3]);
        }
    }

    #[test]
    fn zero_sigma_decays_toward_mean() {
        let mut ou = OuState::new(0.15, 0.0, 0.0, 1.0);
        ou.x = [1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = ou.next(&mut rng);
        assert!((x[0] - 0.85).abs() < 1e-12);
        assert!((x[1] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn long_run_std_matches_stationary_variance() {
        let theta = 0.15;
        let sigma = 0.2;
        let dt = 1.0;
        let mut ou = OuState::new(theta, sigma, 0.0, dt);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut sum_sq = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let x = ou.next(&mut rng);
            sum_sq += x[0] * x[0];
        }
        let observed = (sum_sq / n as f64).sqrt();
        let expected = sigma * (dt / (2.0 * theta * dt - theta * theta * dt * dt)).sqrt();
        assert!(
            (observed - expected).abs() <= 0.1 * expected,
            "observed {observed} vs stationary {expected}"
        );
    }
}
