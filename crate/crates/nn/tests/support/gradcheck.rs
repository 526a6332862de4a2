//! Central finite-difference check of the full actor/critic losses on a
//! reduced network (3×8×8 input, 4/4/4 channels), in f64.

use lognav_nn::loss::{clipped_surrogate, entropy_penalty, value_mse};
use lognav_nn::policy::gaussian_log_prob;
use lognav_nn::{Cache, NetSpec, PolicyNet, ValueNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
const BATCH: usize = 6;
const CLIP: f64 = 0.2;

pub fn reduced_spec() -> NetSpec {
    NetSpec {
        in_channels: 3,
        height: 8,
        width: 8,
        conv_channels: vec![4, 4, 4],
        hidden: 8,
        goal_dim: 3,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    /// Worst per-coordinate relative error.
    pub max_rel: f64,
    /// Relative error of the whole gradient vector.
    pub vector_rel: f64,
    pub n_params: usize,
}

impl GradCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel < tol && self.vector_rel < tol
    }
}

fn compare(analytic: &[f64], numeric: &[f64]) -> GradCheck {
    let mut max_rel = 0.0f64;
    let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
    for (&a, &n) in analytic.iter().zip(numeric) {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
        max_rel = max_rel.max(rel);
        diff2 += (a - n) * (a - n);
        a2 += a * a;
        n2 += n * n;
    }
    GradCheck {
        max_rel,
        vector_rel: diff2.sqrt() / f64::max(a2.sqrt(), n2.sqrt()).max(1e-12),
        n_params: analytic.len(),
    }
}

fn numeric(params: &mut [f64], f: &mut dyn FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            let x = params[i];
            params[i] = x + FD_STEP;
            let up = f(params);
            params[i] = x - FD_STEP;
            let down = f(params);
            params[i] = x;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

struct Inputs {
    maps: Vec<f64>,
    goals: Vec<f64>,
    actions: Vec<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
}

fn inputs(spec: &NetSpec, rng: &mut ChaCha8Rng) -> Inputs {
    // ternary occupancy values, as the encoders produce
    let maps = (0..BATCH * spec.input_len()).map(|_| [0.0, 0.5, 1.0][rng.random_range(0..3)]).collect();
    let goals = (0..BATCH * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
    let actions = (0..BATCH * 2).map(|_| rng.random_range(-1.5..1.5)).collect();
    let advantages = (0..BATCH).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * rng.random_range(0.2..2.0)).collect();
    let returns = (0..BATCH).map(|_| rng.random_range(-3.0..3.0)).collect();
    Inputs {
        maps,
        goals,
        actions,
        advantages,
        returns,
    }
}

/// Policy loss (clipped surrogate + entropy bonus) over all policy parameters,
/// log-std included. Old log-probs are offset from the current ones so both
/// the clipped and unclipped branches occur, away from the kinks.
pub fn check_policy(seed: u64, ent_coef: f64) -> GradCheck {
    let spec = reduced_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = inputs(&spec, &mut rng);
    let mut net = PolicyNet::<f64>::new(&spec, -0.3, seed).unwrap();
    let mut cache = Cache::default();

    net.forward(&x.maps, &x.goals, BATCH, &mut cache);
    let ls = net.log_std();
    let offsets = [-0.5, 0.05, 0.5, -0.05, 0.4, -0.4];
    let old: Vec<f64> = (0..BATCH)
        .map(|i| gaussian_log_prob(&x.actions[2 * i..2 * i + 2], &cache.out[2 * i..2 * i + 2], &ls) + offsets[i])
        .collect();

    let loss_of = |net: &PolicyNet<f64>, cache: &mut Cache<f64>| {
        net.forward(&x.maps, &x.goals, BATCH, cache);
        let ls = net.log_std();
        let s = clipped_surrogate(&cache.out, ls, &x.actions, &old, &x.advantages, CLIP);
        let (e, de) = entropy_penalty(ls, ent_coef);
        (s, e, de)
    };

    let (s, _, de) = loss_of(&net, &mut cache);
    let mut grad = net.params.zeros_like();
    net.backward(&cache, &s.d_mean, [s.d_log_std[0] + de[0], s.d_log_std[1] + de[1]], &mut grad);

    let mut params = net.params.data.clone();
    let num = numeric(&mut params, &mut |p| {
        net.params.data.copy_from_slice(p);
        let (s, e, _) = loss_of(&net, &mut cache);
        s.loss + e
    });
    compare(&grad, &num)
}

/// Entropy term alone: only the log-std coordinates carry gradient.
pub fn check_entropy(seed: u64) -> GradCheck {
    let spec = reduced_spec();
    let mut net = PolicyNet::<f64>::new(&spec, -0.7, seed).unwrap();
    let off = net.log_std_offset();
    net.params.data[off + 1] = 0.3;
    let mut cache = Cache::default();
    let x = inputs(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
    net.forward(&x.maps, &x.goals, BATCH, &mut cache);
    let (_, de) = entropy_penalty(net.log_std(), 1.0);
    let mut grad = net.params.zeros_like();
    net.backward(&cache, &[0.0; BATCH * 2], de, &mut grad);
    let mut params = net.params.data.clone();
    let num = numeric(&mut params, &mut |p| {
        net.params.data.copy_from_slice(p);
        entropy_penalty(net.log_std(), 1.0).0
    });
    compare(&grad, &num)
}

pub fn check_value(seed: u64) -> GradCheck {
    let spec = reduced_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = inputs(&spec, &mut rng);
    let mut net = ValueNet::<f64>::new(&spec, seed).unwrap();
    let mut cache = Cache::default();
    net.forward(&x.maps, &x.goals, BATCH, &mut cache);
    let (_, dv) = value_mse(&cache.out, &x.returns);
    let mut grad = net.params.zeros_like();
    net.backward(&cache, &dv, &mut grad);
    let mut params = net.params.data.clone();
    let num = numeric(&mut params, &mut |p| {
        net.params.data.copy_from_slice(p);
        net.forward(&x.maps, &x.goals, BATCH, &mut cache);
        value_mse(&cache.out, &x.returns).0
    });
    compare(&grad, &num)
}
