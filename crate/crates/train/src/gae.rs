//! Generalised advantage estimation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageEstimate {
    pub advantages: Vec<f64>,
    /// Value-function targets, `A + V`.
    pub returns: Vec<f64>,
}

/// Backward recursion over one trajectory segment.
///
/// `δ_t = r_t + γ·V_{t+1}·(1 − done_t) − V_t`,
/// `A_t = δ_t + γλ·(1 − done_t)·A_{t+1}`, with `V_T = last_value`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<AdvantageEstimate> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(Error::Usage(format!(
            "gae inputs misaligned: {n} rewards, {} values, {} dones",
            values.len(),
            dones.len()
        )));
    }
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(AdvantageEstimate { advantages, returns })
}

/// Rescales to zero mean and unit variance (population statistics).
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt() + 1e-8;
    xs.iter_mut().for_each(|x| *x = (*x - mean) / std);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_step() {
        let e = compute_gae(&[1.0], &[0.0], &[true], 123.0, 0.99, 0.95).unwrap();
        assert_eq!(e.advantages, vec![1.0]);
        assert_eq!(e.returns, vec![1.0]);
    }

    #[test]
    fn lambda_zero_is_td_error() {
        let r = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -0.4];
        let e = compute_gae(&r, &v, &[false; 3], 0.7, 0.9, 0.0).unwrap();
        let next = [0.1, -0.4, 0.7];
        for t in 0..3 {
            assert!((e.advantages[t] - (r[t] + 0.9 * next[t] - v[t])).abs() < 1e-15);
        }
    }

    #[test]
    fn misaligned_is_error() {
        assert!(compute_gae(&[1.0, 2.0], &[0.0], &[false, false], 0.0, 0.99, 0.95).is_err());
    }

    #[test]
    fn normalization() {
        let mut xs = vec![1.0, 2.0, 3.0, 4.0];
        normalize(&mut xs);
        let mean: f64 = xs.iter().sum::<f64>() / 4.0;
        let var: f64 = xs.iter().map(|x| x * x).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-6);
    }
}
