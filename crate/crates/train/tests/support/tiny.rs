//! Small configurations that train in well under a second per epoch.

use lognav_core::EncoderKind;
use lognav_train::config::NetworkConfig;
use lognav_train::TrainConfig;

pub fn tiny_config(encoder: EncoderKind) -> TrainConfig {
    let mut cfg = TrainConfig {
        seed: 3,
        steps_per_epoch: 120,
        n_parallel_envs: 2,
        update_epochs: 2,
        minibatch_size: 40,
        epochs: 3,
        eval_every: 1,
        eval_episodes: 3,
        reward_scale: 0.01,
        network: NetworkConfig {
            conv_channels: vec![4, 4],
            hidden: 16,
        },
        ..TrainConfig::default()
    };
    cfg.env.encoder = encoder;
    cfg.env.scenario = "desk_crowd".into();
    cfg.env.max_steps = 60;
    cfg
}
