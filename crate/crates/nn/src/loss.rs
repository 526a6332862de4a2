//! PPO objectives with their analytic output gradients.

use crate::policy::{gaussian_entropy, ACTION_DIM};

/// Clipped surrogate loss over a minibatch, to be minimised:
/// `-mean(min(r·A, clip(r, 1-ε, 1+ε)·A))` with `r = exp(log π − log π_old)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateLoss {
    pub loss: f64,
    /// `∂loss/∂μ`, `batch × 2`.
    pub d_mean: Vec<f64>,
    /// `∂loss/∂log σ` (of the clamped log std).
    pub d_log_std: [f64; ACTION_DIM],
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
}

pub fn clipped_surrogate(
    means: &[f64],
    log_std: [f64; ACTION_DIM],
    actions: &[f64],
    old_log_probs: &[f64],
    advantages: &[f64],
    clip: f64,
) -> SurrogateLoss {
    let n = advantages.len();
    assert_eq!(means.len(), n * ACTION_DIM);
    assert_eq!(actions.len(), n * ACTION_DIM);
    assert_eq!(old_log_probs.len(), n);
    let inv_var = log_std.map(|l| (-2.0 * l).exp());
    let mut out = SurrogateLoss {
        loss: 0.0,
        d_mean: vec![0.0; n * ACTION_DIM],
        d_log_std: [0.0; ACTION_DIM],
        approx_kl: 0.0,
        clip_fraction: 0.0,
        mean_ratio: 0.0,
    };
    if n == 0 {
        return out;
    }
    let scale = 1.0 / n as f64;
    for i in 0..n {
        let m = &means[i * ACTION_DIM..(i + 1) * ACTION_DIM];
        let a = &actions[i * ACTION_DIM..(i + 1) * ACTION_DIM];
        let logp = crate::policy::gaussian_log_prob(a, m, &log_std);
        let ratio = (logp - old_log_probs[i]).exp();
        let adv = advantages[i];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * adv;
        out.loss -= scale * unclipped.min(clipped);
        out.approx_kl += scale * (old_log_probs[i] - logp);
        out.mean_ratio += scale * ratio;
        if (ratio - 1.0).abs() > clip {
            out.clip_fraction += scale;
        }
        if unclipped <= clipped {
            // ∂loss/∂logp
            let g = -scale * unclipped;
            for d in 0..ACTION_DIM {
                let diff = a[d] - m[d];
                out.d_mean[i * ACTION_DIM + d] = g * diff * inv_var[d];
                out.d_log_std[d] += g * (diff * diff * inv_var[d] - 1.0);
            }
        }
    }
    out
}

/// Mean squared error `mean((v − R)²)` and its gradient.
pub fn value_mse(values: &[f64], returns: &[f64]) -> (f64, Vec<f64>) {
    let n = values.len();
    assert_eq!(returns.len(), n);
    if n == 0 {
        return (0.0, Vec::new());
    }
    let scale = 1.0 / n as f64;
    let mut loss = 0.0;
    let grad = values
        .iter()
        .zip(returns)
        .map(|(v, r)| {
            let e = v - r;
            loss += scale * e * e;
            2.0 * scale * e
        })
        .collect();
    (loss, grad)
}

/// Entropy bonus term `−c·H(π)` and its gradient with respect to log σ.
pub fn entropy_penalty(log_std: [f64; ACTION_DIM], coef: f64) -> (f64, [f64; ACTION_DIM]) {
    (-coef * gaussian_entropy(&log_std), [-coef; ACTION_DIM])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_one_gives_negative_mean_advantage() {
        let means = [0.1, 0.2, -0.3, 0.0];
        let actions = [0.0, 0.5, -0.1, 0.2];
        let ls = [-0.5, -0.5];
        let old: Vec<f64> = (0..2)
            .map(|i| {
                crate::policy::gaussian_log_prob(&actions[2 * i..2 * i + 2], &means[2 * i..2 * i + 2], &ls)
            })
            .collect();
        let s = clipped_surrogate(&means, ls, &actions, &old, &[1.0, -3.0], 0.2);
        assert!((s.loss - 1.0).abs() < 1e-12);
        assert_eq!(s.clip_fraction, 0.0);
        assert!(s.approx_kl.abs() < 1e-12);
    }

    #[test]
    fn clipped_branch_has_zero_gradient() {
        // ratio = e ≈ 2.72 > 1.2 with a positive advantage
        let s = clipped_surrogate(&[0.0, 0.0], [0.0, 0.0], &[0.0, 0.0], &[-(2.0 * std::f64::consts::PI).ln() - 1.0], &[1.0], 0.2);
        assert!((s.loss + 1.2).abs() < 1e-12);
        assert_eq!(s.d_mean, vec![0.0, 0.0]);
        assert_eq!(s.d_log_std, [0.0, 0.0]);
        assert_eq!(s.clip_fraction, 1.0);
    }

    #[test]
    fn surrogate_gradient_matches_finite_difference() {
        let means = vec![0.1, -0.2, 0.4, 0.3, -0.5, 0.05];
        let actions = vec![0.3, -0.1, 0.2, 0.6, -0.4, -0.2];
        let ls = [-0.4, -0.7];
        let old = vec![-0.3, 0.1, -0.2];
        let adv = vec![0.7, -1.2, 0.4];
        let f = |m: &[f64], l: [f64; 2]| clipped_surrogate(m, l, &actions, &old, &adv, 0.2).loss;
        let s = clipped_surrogate(&means, ls, &actions, &old, &adv, 0.2);
        let h = 1e-6;
        for i in 0..means.len() {
            let mut up = means.clone();
            up[i] += h;
            let mut dn = means.clone();
            dn[i] -= h;
            let fd = (f(&up, ls) - f(&dn, ls)) / (2.0 * h);
            assert!((fd - s.d_mean[i]).abs() < 1e-7, "{i}: {fd} vs {}", s.d_mean[i]);
        }
        for d in 0..2 {
            let (mut up, mut dn) = (ls, ls);
            up[d] += h;
            dn[d] -= h;
            let fd = (f(&means, up) - f(&means, dn)) / (2.0 * h);
            assert!((fd - s.d_log_std[d]).abs() < 1e-7);
        }
    }

    #[test]
    fn value_loss_gradient() {
        let (l, g) = value_mse(&[1.0, 2.0], &[0.0, 4.0]);
        assert_eq!(l, 2.5);
        assert_eq!(g, vec![1.0, -2.0]);
    }
}
