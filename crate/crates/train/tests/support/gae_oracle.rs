//! Non-recursive advantage estimate:
//! `A_t = Σ_l (γλ)^l δ_{t+l}`, truncated after the first terminal step.

pub fn direct_gae(rewards: &[f64], values: &[f64], dones: &[bool], last_value: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let value_after = |t: usize| if t + 1 < n { values[t + 1] } else { last_value };
    let delta = |t: usize| {
        let next = if dones[t] { 0.0 } else { value_after(t) };
        rewards[t] + gamma * next - values[t]
    };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            for l in 0..n - t {
                sum += (gamma * lambda).powi(l as i32) * delta(t + l);
                if dones[t + l] {
                    break;
                }
            }
            sum
        })
        .collect()
}

/// `(rewards, values, dones, last_value)` for a random 50-step sequence.
pub fn random_sequence(rng: &mut impl rand::Rng, len: usize) -> (Vec<f64>, Vec<f64>, Vec<bool>, f64) {
    let rewards = (0..len).map(|_| rng.random_range(-10.0..10.0)).collect();
    let values = (0..len).map(|_| rng.random_range(-20.0..20.0)).collect();
    let dones = (0..len).map(|_| rng.random_bool(0.1)).collect();
    (rewards, values, dones, rng.random_range(-20.0..20.0))
}
