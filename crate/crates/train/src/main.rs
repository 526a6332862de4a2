use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use lognav_core::lidar::raycast_scan;
use lognav_core::{Encoder, EncoderKind, LidarConfig, ScenarioSpec};
use lognav_train::config::ScenarioSource;
use lognav_train::render::{self, DEFAULT_PIXELS_PER_METER};
use lognav_train::{evaluate, load_checkpoint, scanio, trainer, TrainConfig, TrajectoryLog};

#[derive(Parser)]
#[command(name = "lognav", version, about = "Train and evaluate log-map navigation policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from a TOML config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from a checkpoint (parameters and optimizer state).
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Output directory for metrics and checkpoints [default: runs/<config name>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with greedy actions.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        /// Scenario preset, `comb1`/`comb2`, or `custom` for the checkpoint's own spec.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the trajectory log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Draw a logged episode, or a scenario layout when no log is given.
    Render {
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        episode: usize,
        /// Layout seed when rendering without a log.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_PIXELS_PER_METER)]
        ppm: f64,
    },
    /// Encode one scan CSV row and write it as a graymap.
    Encode {
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "logmap")]
        encoder: EncoderKind,
    },
    /// Dump a robot's initial scan in a generated scenario as CSV.
    Scan {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        robot: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            resume,
            out,
        } => {
            let mut cfg = TrainConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out.unwrap_or_else(|| {
                let stem = config.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
                Path::new("runs").join(stem)
            });
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(out.join("config.toml"), cfg.to_toml())?;
            let summary = trainer::train(cfg, &out, resume.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Eval {
            ckpt,
            scenario,
            episodes,
            seed,
            out,
            log,
        } => {
            let mut loaded = load_checkpoint(&ckpt)?;
            let meta = &loaded.meta;
            let source = if scenario == "custom" {
                match &meta.train.scenario_spec {
                    Some(s) => ScenarioSource::Single(s.clone()),
                    None => bail!("checkpoint carries no custom scenario"),
                }
            } else {
                ScenarioSource::parse(&scenario)?
            };
            let mut env = meta.env.clone();
            env.scenario = scenario.clone();
            let mut traj = log.as_ref().map(|_| TrajectoryLog::default());
            let report = evaluate(
                &mut loaded.agent,
                &env,
                &scenario,
                &source,
                episodes,
                seed,
                meta.epoch,
                meta.train.curriculum_boundary,
                traj.as_mut(),
            )?;
            if let (Some(path), Some(t)) = (&log, &traj) {
                t.write_jsonl(path)?;
            }
            match out {
                Some(p) => std::fs::write(&p, report.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => println!("{}", report.to_json()),
            }
        }
        Command::Render {
            log,
            scenario,
            out,
            episode,
            seed,
            ppm,
        } => {
            let img = match (log, scenario) {
                (Some(log), scenario) => {
                    let t = TrajectoryLog::read_jsonl(&log)?;
                    if let (Some(want), Some(have)) = (scenario.as_deref(), t.scenario()) {
                        if want != have {
                            bail!("log was recorded on '{have}', not '{want}'");
                        }
                    }
                    render::render_log(&t, episode, ppm)?
                }
                (None, Some(scenario)) => {
                    let spec = ScenarioSource::parse(&scenario)?.spec(0, 0, 0);
                    render::draw_layout(&spec.generate(seed)?, ppm)?.0
                }
                (None, None) => bail!("render needs --log or --scenario"),
            };
            render::save_rgb(&img, &out)?;
        }
        Command::Encode { scan, out, encoder } => {
            let lidar = LidarConfig::default();
            let scan = scanio::read_scan(&scan, &lidar)?;
            let frame = Encoder::new(encoder, LidarConfig { max_range: scan.max_range, fov: scan.fov, ..lidar })?.encode(&scan)?;
            render::save_frame_pgm(&frame, &out)?;
        }
        Command::Scan {
            scenario,
            seed,
            robot,
            out,
        } => {
            let world = ScenarioSpec::preset(&scenario)?.generate(seed)?;
            if robot >= world.robots.len() {
                bail!("scenario has {} robots", world.robots.len());
            }
            scanio::write_scan(&raycast_scan(&world, robot, &LidarConfig::default()), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
