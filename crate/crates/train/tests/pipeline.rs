#[path = "support/tiny.rs"]
mod tiny;

use std::path::Path;

use lognav_core::{EncoderKind, EpisodeStatus};
use lognav_train::eval::{records_from_log, EvalReport};
use lognav_train::trainer::{EpochMetrics, BEST_CHECKPOINT, LATEST_CHECKPOINT, METRICS_FILE};
use lognav_train::{evaluate, load_checkpoint, Agent, ScenarioSource, Trainer, TrajectoryLog};
use tiny::tiny_config;

fn read_metrics(dir: &Path) -> Vec<EpochMetrics> {
    std::fs::read_to_string(dir.join(METRICS_FILE))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn zero_learning_rate_leaves_parameters_bitwise_unchanged() {
    let mut cfg = tiny_config(EncoderKind::LogMap);
    cfg.lr_policy = 0.0;
    cfg.lr_value = 0.0;
    cfg.eval_every = 100;
    let dir = tempfile::tempdir().unwrap();
    let mut t = Trainer::new(cfg, dir.path()).unwrap();
    let (p0, v0) = (t.agent.policy.params.data.clone(), t.agent.value.params.data.clone());
    let m = t.run_epoch().unwrap();
    assert!(m.update.minibatches > 0);
    assert!(m.update.grad_norm_policy > 0.0);
    assert_eq!(t.agent.policy.params.data, p0);
    assert_eq!(t.agent.value.params.data, v0);
}

#[test]
fn nonzero_learning_rate_moves_parameters() {
    let cfg = tiny_config(EncoderKind::AngularMap);
    let dir = tempfile::tempdir().unwrap();
    let mut t = Trainer::new(cfg, dir.path()).unwrap();
    let p0 = t.agent.policy.params.data.clone();
    t.run_epoch().unwrap();
    assert_ne!(t.agent.policy.params.data, p0);
}

#[test]
fn best_checkpoint_only_on_strict_improvement_and_latest_always() {
    let mut cfg = tiny_config(EncoderKind::AngularMap);
    cfg.epochs = 5;
    let dir = tempfile::tempdir().unwrap();
    let mut t = Trainer::new(cfg, dir.path()).unwrap();
    let summary = t.train(|_| {}).unwrap();
    assert_eq!(summary.epochs_completed, 5);

    let metrics = read_metrics(dir.path());
    assert_eq!(metrics.len(), 5);
    let mut best: Option<(usize, f64)> = None;
    for m in &metrics {
        let r = m.reach_rate.unwrap();
        let improves = best.is_none_or(|(_, b)| r > b);
        assert_eq!(m.new_best, improves, "epoch {}", m.epoch);
        if improves {
            best = Some((m.epoch, r));
        }
    }
    let (best_epoch, best_rate) = best.unwrap();
    let b = load_checkpoint(&dir.path().join(BEST_CHECKPOINT)).unwrap();
    assert_eq!(b.meta.epoch, best_epoch);
    assert_eq!(b.meta.reach_rate, Some(best_rate));
    let l = load_checkpoint(&dir.path().join(LATEST_CHECKPOINT)).unwrap();
    assert_eq!(l.meta.epoch, 5);
    assert_eq!(l.agent.policy.params.data, t.agent.policy.params.data);
    assert_eq!(summary.best_reach_rate, Some(best_rate));
}

#[test]
fn latest_checkpoint_written_even_without_evaluation() {
    let mut cfg = tiny_config(EncoderKind::AngularMap);
    cfg.epochs = 1;
    cfg.eval_every = 10;
    let dir = tempfile::tempdir().unwrap();
    Trainer::new(cfg, dir.path()).unwrap().train(|_| {}).unwrap();
    assert!(dir.path().join(LATEST_CHECKPOINT).exists());
    assert!(!dir.path().join(BEST_CHECKPOINT).exists());
}

#[test]
fn resume_continues_epoch_count_and_appends_metrics() {
    let mut cfg = tiny_config(EncoderKind::AngularMap);
    cfg.epochs = 2;
    let dir = tempfile::tempdir().unwrap();
    Trainer::new(cfg.clone(), dir.path()).unwrap().train(|_| {}).unwrap();
    cfg.epochs = 3;
    let mut t = Trainer::resume(cfg.clone(), &dir.path().join(LATEST_CHECKPOINT), dir.path()).unwrap();
    assert_eq!(t.epoch, 2);
    assert!(t.adam_policy.t > 0);
    t.train(|_| {}).unwrap();
    let epochs: Vec<usize> = read_metrics(dir.path()).iter().map(|m| m.epoch).collect();
    assert_eq!(epochs, vec![1, 2, 3]);

    // a different architecture cannot resume from it
    cfg.network.hidden = 8;
    assert!(Trainer::resume(cfg, &dir.path().join(LATEST_CHECKPOINT), dir.path()).is_err());
}

fn untrained_agent() -> (Agent, lognav_train::TrainConfig) {
    let cfg = tiny_config(EncoderKind::LogMap);
    (Agent::new(&cfg.net_spec().unwrap(), cfg.log_std_init, 8).unwrap(), cfg)
}

#[test]
fn logged_metrics_equal_online_metrics() {
    let (mut agent, cfg) = untrained_agent();
    let source = ScenarioSource::parse("desk_crowd").unwrap();
    let mut log = TrajectoryLog::default();
    let online = evaluate(&mut agent, &cfg.env, "desk_crowd", &source, 6, 21, 0, 200, Some(&mut log)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.jsonl");
    log.write_jsonl(&path).unwrap();
    let back = TrajectoryLog::read_jsonl(&path).unwrap();
    assert_eq!(back, log);
    let offline = EvalReport::from_records("desk_crowd", cfg.env.encoder, 21, records_from_log(&back).unwrap());

    assert_eq!(online.episodes, offline.episodes);
    assert_eq!(online.robots, offline.robots);
    let pairs = [
        (online.ar, offline.ar),
        (online.ar_episode, offline.ar_episode),
        (online.aav, offline.aav),
        (online.atd.unwrap_or(0.0), offline.atd.unwrap_or(0.0)),
        (online.collision_rate, offline.collision_rate),
        (online.timeout_rate, offline.timeout_rate),
        (online.mean_return, offline.mean_return),
    ];
    for (a, b) in pairs {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    for (a, b) in online.records.iter().zip(&offline.records) {
        assert_eq!(a.steps, b.steps);
        for (ra, rb) in a.robots.iter().zip(&b.robots) {
            assert_eq!(ra.status, rb.status);
            assert_eq!(ra.steps, rb.steps);
            assert!((ra.path_length - rb.path_length).abs() <= 1e-9);
        }
    }
}

#[test]
fn outcome_fractions_sum_to_one_and_eval_reproduces() {
    let (mut agent, cfg) = untrained_agent();
    for scenario in ["desk_crowd", "desk_narrow", "comb2"] {
        let source = ScenarioSource::parse(scenario).unwrap();
        let a = evaluate(&mut agent, &cfg.env, scenario, &source, 4, 2, 0, 200, None).unwrap();
        let b = evaluate(&mut agent, &cfg.env, scenario, &source, 4, 2, 0, 200, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!((a.ar + a.collision_rate + a.timeout_rate - 1.0).abs() < 1e-12, "{scenario}");
        for ep in &a.records {
            for r in &ep.robots {
                assert!(r.status.is_terminal());
                assert_ne!(r.status, EpisodeStatus::Running);
            }
        }
    }
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = lognav_train::TrainConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(lognav_train::TrainConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
            n += 1;
        }
    }
    assert!(n >= 4);
}
