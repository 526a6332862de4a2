//! Clipped-surrogate policy update and value regression.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use lognav_nn::loss::{clipped_surrogate, entropy_penalty, value_mse};
use lognav_nn::optim::clip_grad_norm;
use lognav_nn::policy::gaussian_entropy;
use lognav_nn::{Adam, Cache};

use crate::agent::Agent;
use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::gae::normalize;
use crate::rollout::Batch;

/// Minibatch averages over one update phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    pub grad_norm_policy: f64,
    pub grad_norm_value: f64,
    pub minibatches: usize,
}

fn gather(batch: &Batch, idx: &[usize], maps: &mut Vec<f32>, goals: &mut Vec<f32>) {
    maps.clear();
    goals.clear();
    let l = batch.obs_len;
    for &i in idx {
        maps.extend_from_slice(&batch.maps[i * l..(i + 1) * l]);
        goals.extend_from_slice(&batch.goals[i * 3..(i + 1) * 3]);
    }
}

fn check(what: &str, x: f64, stats: &UpdateStats) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.into(),
            diagnostics: serde_json::to_string(stats).unwrap_or_default(),
        })
    }
}

/// `update_epochs` passes of shuffled minibatches over `batch`, which must
/// already carry advantages and returns.
pub fn ppo_update<R: Rng>(
    agent: &mut Agent,
    adam_policy: &mut Adam,
    adam_value: &mut Adam,
    batch: &Batch,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    let n = batch.len();
    let mut stats = UpdateStats::default();
    if n == 0 {
        return Ok(stats);
    }
    if batch.advantages.len() != n || batch.returns.len() != n {
        return Err(Error::Usage("advantages not computed".into()));
    }
    let mut adv = batch.advantages.clone();
    normalize(&mut adv);

    let (mut maps, mut goals) = (Vec::new(), Vec::new());
    let (mut pc, mut vc) = (Cache::default(), Cache::default());
    let mut pgrad = agent.policy.params.zeros_like();
    let mut vgrad = agent.value.params.zeros_like();
    let mut order: Vec<usize> = (0..n).collect();
    let mb = cfg.minibatch_size.min(n);

    for _ in 0..cfg.update_epochs {
        order.shuffle(rng);
        for idx in order.chunks(mb) {
            let m = idx.len();
            gather(batch, idx, &mut maps, &mut goals);
            let actions: Vec<f64> = idx.iter().flat_map(|&i| [batch.actions[2 * i], batch.actions[2 * i + 1]]).collect();
            let old: Vec<f64> = idx.iter().map(|&i| batch.log_probs[i]).collect();
            let a: Vec<f64> = idx.iter().map(|&i| adv[i]).collect();
            let ret: Vec<f64> = idx.iter().map(|&i| batch.returns[i]).collect();

            // policy
            agent.policy.forward(&maps, &goals, m, &mut pc);
            let means: Vec<f64> = pc.out.iter().map(|&x| x as f64).collect();
            let log_std = agent.policy.log_std();
            let s = clipped_surrogate(&means, log_std, &actions, &old, &a, cfg.clip_ratio);
            let (ent_loss, d_ent) = entropy_penalty(log_std, cfg.ent_coef);
            let ploss = s.loss + ent_loss;
            check("policy loss", ploss, &stats)?;
            pgrad.fill(0.0);
            let d_mean: Vec<f32> = s.d_mean.iter().map(|&x| x as f32).collect();
            let d_ls = [(s.d_log_std[0] + d_ent[0]) as f32, (s.d_log_std[1] + d_ent[1]) as f32];
            agent.policy.backward(&pc, &d_mean, d_ls, &mut pgrad);
            let gp = match cfg.grad_clip() {
                Some(g) => clip_grad_norm(&mut pgrad, g),
                None => lognav_nn::optim::grad_norm(&pgrad),
            };
            check("policy gradient", gp, &stats)?;
            adam_policy.step(&mut agent.policy.params.data, &pgrad);

            // value
            agent.value.forward(&maps, &goals, m, &mut vc);
            let values: Vec<f64> = vc.out.iter().map(|&x| x as f64).collect();
            let (vloss, dv) = value_mse(&values, &ret);
            check("value loss", vloss, &stats)?;
            vgrad.fill(0.0);
            let dv: Vec<f32> = dv.iter().map(|&x| x as f32).collect();
            agent.value.backward(&vc, &dv, &mut vgrad);
            let gv = match cfg.grad_clip() {
                Some(g) => clip_grad_norm(&mut vgrad, g),
                None => lognav_nn::optim::grad_norm(&vgrad),
            };
            check("value gradient", gv, &stats)?;
            adam_value.step(&mut agent.value.params.data, &vgrad);

            stats.policy_loss += s.loss;
            stats.value_loss += vloss;
            stats.entropy += gaussian_entropy(&log_std);
            stats.approx_kl += s.approx_kl;
            stats.clip_fraction += s.clip_fraction;
            stats.mean_ratio += s.mean_ratio;
            stats.grad_norm_policy += gp;
            stats.grad_norm_value += gv;
            stats.minibatches += 1;
        }
    }
    let k = stats.minibatches.max(1) as f64;
    for x in [
        &mut stats.policy_loss,
        &mut stats.value_loss,
        &mut stats.entropy,
        &mut stats.approx_kl,
        &mut stats.clip_fraction,
        &mut stats.mean_ratio,
        &mut stats.grad_norm_policy,
        &mut stats.grad_norm_value,
    ] {
        *x /= k;
    }
    Ok(stats)
}
