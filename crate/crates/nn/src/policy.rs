//! Diagonal Gaussian policy over the two normalised action dimensions and a
//! separate state-value network.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use lognav_core::world::{VelocityCommand, OMEGA_MAX, V_MAX};

use crate::error::Result;
use crate::net::{Cache, NetSpec, Trunk};
use crate::params::ParamSet;
use crate::real::Real;

pub const ACTION_DIM: usize = 2;
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const DEFAULT_LOG_STD: f64 = -0.5;

const POLICY_HEAD_GAIN: f64 = 0.01;
const VALUE_HEAD_GAIN: f64 = 1.0;

/// `ln(2π)/2`.
fn half_ln_2pi() -> f64 {
    0.5 * (2.0 * PI).ln()
}

/// Maps a raw Gaussian sample to wheel commands: `v = 0.3·(1 + a0)` and
/// `ω = 0.9·a1`, both clipped into their ranges.
pub fn action_to_command(a: [f64; ACTION_DIM]) -> VelocityCommand {
    VelocityCommand::new(0.5 * V_MAX * (1.0 + a[0]), OMEGA_MAX * a[1])
}

/// Log-density of `x` under independent normals.
pub fn gaussian_log_prob(x: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((&x, &m), &ls)| {
            let z = (x - m) / ls.exp();
            -0.5 * z * z - ls - half_ln_2pi()
        })
        .sum()
}

/// Differential entropy of a diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|&ls| ls + 0.5 + half_ln_2pi()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub mean: [f64; ACTION_DIM],
    pub log_std: [f64; ACTION_DIM],
}

impl ActionDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; ACTION_DIM] {
        let mut a = [0.0; ACTION_DIM];
        for (d, a) in a.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *a = self.mean[d] + self.log_std[d].exp() * z;
        }
        a
    }

    pub fn log_prob(&self, a: &[f64; ACTION_DIM]) -> f64 {
        gaussian_log_prob(a, &self.mean, &self.log_std)
    }

    pub fn entropy(&self) -> f64 {
        gaussian_entropy(&self.log_std)
    }
}

/// Actor: convolutional trunk producing the action mean plus a
/// state-independent log standard deviation.
#[derive(Debug, Clone)]
pub struct PolicyNet<T> {
    pub trunk: Trunk,
    pub params: ParamSet<T>,
    log_std_off: usize,
}

impl<T: Real> PolicyNet<T> {
    pub fn new(spec: &NetSpec, log_std_init: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamSet::default();
        let trunk = Trunk::build(spec, ACTION_DIM, POLICY_HEAD_GAIN, &mut params, &mut rng)?;
        let log_std_off = params.add("log_std", &[ACTION_DIM]);
        params.data[log_std_off..log_std_off + ACTION_DIM].fill(T::lit(log_std_init));
        Ok(Self {
            trunk,
            params,
            log_std_off,
        })
    }

    pub fn log_std_offset(&self) -> usize {
        self.log_std_off
    }

    /// Clamped log standard deviation.
    pub fn log_std(&self) -> [f64; ACTION_DIM] {
        let raw = &self.params.data[self.log_std_off..self.log_std_off + ACTION_DIM];
        [
            raw[0].as_f64().clamp(LOG_STD_MIN, LOG_STD_MAX),
            raw[1].as_f64().clamp(LOG_STD_MIN, LOG_STD_MAX),
        ]
    }

    /// Batched means into `cache.out` (`batch × 2`).
    pub fn forward(&self, maps: &[T], goals: &[T], batch: usize, cache: &mut Cache<T>) {
        self.trunk.forward(&self.params.data, maps, goals, batch, cache);
    }

    pub fn distributions(&self, maps: &[T], goals: &[T], batch: usize, cache: &mut Cache<T>) -> Vec<ActionDistribution> {
        self.forward(maps, goals, batch, cache);
        let log_std = self.log_std();
        cache
            .out
            .chunks(ACTION_DIM)
            .map(|m| ActionDistribution {
                mean: [m[0].as_f64(), m[1].as_f64()],
                log_std,
            })
            .collect()
    }

    /// Back-propagates mean gradients (`batch × 2`) and a log-std gradient
    /// (with respect to the clamped value) into `grad`.
    pub fn backward(&self, cache: &Cache<T>, d_mean: &[T], d_log_std: [T; ACTION_DIM], grad: &mut [T]) {
        self.trunk.backward(&self.params.data, cache, d_mean, grad);
        let raw = &self.params.data[self.log_std_off..self.log_std_off + ACTION_DIM];
        for d in 0..ACTION_DIM {
            let x = raw[d].as_f64();
            if x > LOG_STD_MIN && x < LOG_STD_MAX {
                grad[self.log_std_off + d] += d_log_std[d];
            }
        }
    }
}

/// Critic: same body with a scalar head and its own parameters.
#[derive(Debug, Clone)]
pub struct ValueNet<T> {
    pub trunk: Trunk,
    pub params: ParamSet<T>,
}

impl<T: Real> ValueNet<T> {
    pub fn new(spec: &NetSpec, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamSet::default();
        let trunk = Trunk::build(spec, 1, VALUE_HEAD_GAIN, &mut params, &mut rng)?;
        Ok(Self { trunk, params })
    }

    pub fn forward(&self, maps: &[T], goals: &[T], batch: usize, cache: &mut Cache<T>) {
        self.trunk.forward(&self.params.data, maps, goals, batch, cache);
    }

    pub fn values(&self, maps: &[T], goals: &[T], batch: usize, cache: &mut Cache<T>) -> Vec<f64> {
        self.forward(maps, goals, batch, cache);
        cache.out.iter().map(|v| v.as_f64()).collect()
    }

    pub fn backward(&self, cache: &Cache<T>, d_value: &[T], grad: &mut [T]) {
        self.trunk.backward(&self.params.data, cache, d_value, grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NetSpec {
        NetSpec {
            in_channels: 3,
            height: 8,
            width: 8,
            conv_channels: vec![4, 4],
            hidden: 8,
            goal_dim: 3,
        }
    }

    #[test]
    fn log_prob_of_mean_with_unit_std() {
        let d = ActionDistribution {
            mean: [0.3, -0.2],
            log_std: [0.0, 0.0],
        };
        assert!((d.log_prob(&d.mean) - (-(2.0 * PI).ln())).abs() < 1e-12);
        assert!((d.log_prob(&d.mean) + 1.8379).abs() < 1e-4);
    }

    #[test]
    fn density_integrates_to_one() {
        // 2D midpoint rule over ±8σ
        let d = ActionDistribution {
            mean: [0.1, -0.4],
            log_std: [-0.5, 0.2],
        };
        let (s0, s1) = (d.log_std[0].exp(), d.log_std[1].exp());
        let n = 400;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = d.mean[0] - 8.0 * s0 + (i as f64 + 0.5) * 16.0 * s0 / n as f64;
                let y = d.mean[1] - 8.0 * s1 + (j as f64 + 0.5) * 16.0 * s1 / n as f64;
                total += d.log_prob(&[x, y]).exp();
            }
        }
        total *= 16.0 * s0 / n as f64 * 16.0 * s1 / n as f64;
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn entropy_matches_closed_form() {
        let ls: [f64; 2] = [-0.5, 0.3];
        let want: f64 = ls.iter().map(|l| 0.5 * (2.0 * PI * std::f64::consts::E * (2.0 * l).exp()).ln()).sum();
        assert!((gaussian_entropy(&ls) - want).abs() < 1e-12);
    }

    #[test]
    fn action_mapping() {
        let c = action_to_command([0.0, 0.0]);
        assert!((c.v() - 0.3).abs() < 1e-12 && c.omega() == 0.0);
        let c = action_to_command([5.0, -5.0]);
        assert_eq!((c.v(), c.omega()), (0.6, -0.9));
        let c = action_to_command([-3.0, 0.5]);
        assert_eq!(c.v(), 0.0);
        assert!((c.omega() - 0.45).abs() < 1e-12);
    }

    #[test]
    fn zeroed_policy_outputs_zero_mean() {
        let mut p = PolicyNet::<f32>::new(&tiny(), DEFAULT_LOG_STD, 1).unwrap();
        p.params.data.iter_mut().for_each(|x| *x = 0.0);
        let maps = vec![0.5f32; 2 * 3 * 64];
        let goals = vec![1.0f32; 6];
        let d = p.distributions(&maps, &goals, 2, &mut Cache::default());
        assert_eq!(d[0].mean, [0.0, 0.0]);
        assert_eq!(d[1].log_std, [0.0, 0.0]);
    }

    #[test]
    fn init_is_seeded_and_small_head() {
        let a = PolicyNet::<f32>::new(&tiny(), DEFAULT_LOG_STD, 4).unwrap();
        let b = PolicyNet::<f32>::new(&tiny(), DEFAULT_LOG_STD, 4).unwrap();
        let c = PolicyNet::<f32>::new(&tiny(), DEFAULT_LOG_STD, 5).unwrap();
        assert_eq!(a.params, b.params);
        assert_ne!(a.params, c.params);
        assert_eq!(a.log_std(), [-0.5, -0.5]);
        let head = a.params.get("head.weight").unwrap();
        let norm: f32 = head.iter().map(|x| x * x).sum::<f32>().sqrt();
        // two orthonormal rows scaled by 0.01
        assert!((norm - 0.01 * 2f32.sqrt()).abs() < 1e-5);
        assert!(a.params.get("fc1.bias").unwrap().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn full_size_parameter_count() {
        let spec = NetSpec::for_frames(3, 48, 48);
        let v = ValueNet::<f32>::new(&spec, 0).unwrap();
        let conv = (32 * 27 + 32) + (64 * 288 + 64) + (64 * 576 + 64);
        let dense = (512 * 2304 + 512) + (512 * 515 + 512) + (512 + 1);
        assert_eq!(v.params.len(), conv + dense);
    }

    #[test]
    fn clamped_log_std_blocks_gradient() {
        let mut p = PolicyNet::<f64>::new(&tiny(), DEFAULT_LOG_STD, 1).unwrap();
        let off = p.log_std_offset();
        p.params.data[off] = 3.0;
        assert_eq!(p.log_std()[0], LOG_STD_MAX);
        let mut cache = Cache::default();
        p.forward(&vec![0.0; 3 * 64], &[0.0; 3], 1, &mut cache);
        let mut g = p.params.zeros_like();
        p.backward(&cache, &[0.0, 0.0], [1.0, 1.0], &mut g);
        assert_eq!(g[off], 0.0);
        assert_eq!(g[off + 1], 1.0);
    }
}
