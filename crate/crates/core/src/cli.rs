//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input or failed run.

use std::collections::hash_map::DefaultHasher;
use std::ffi::OsString;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ball::BallState;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::GridSpec;
use crate::interception::intercept_heatmap;
use crate::parallel::with_workers;
use crate::scene::Scene;
use crate::scoring::{read_weights, select_best, weights_to_text, write_weights, LinearScorer, Policy, Scorer};
use crate::search::{build_feasible_set, enumerate_actions, write_feasible_set, ActionGrid, SearchParams};
use crate::sim::{run_4v4, score_heatmap};
use crate::training::{read_episode_log, run_offline, run_selfplay, EpisodeLogWriter};

#[derive(Debug, Parser)]
#[command(name = "passplan", version, about = "Pass planning and scorer training for small-size robot soccer")]
pub struct Cli {
    /// Global TOML configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Main output file of the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainMode {
    Offline,
    Selfplay,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interception-time heat map for a rolling ball.
    Heatmap {
        #[arg(long)]
        scene: PathBuf,
        /// Initial ball speed, m/s.
        #[arg(long)]
        ball_speed: f64,
        /// Ball heading, radians.
        #[arg(long, default_value_t = 0.0)]
        direction: f64,
        /// Cells along the field length; defaults to the configured value.
        #[arg(long)]
        cols: Option<usize>,
    },
    /// Print the feasible set and the selected pass for a scene.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        /// Scorer weights; the linear baseline when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Pairs to list; all when absent.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Train the scorer from a log or by self-play.
    Train {
        #[arg(long, value_enum)]
        mode: TrainMode,
        /// Episode log: read in offline mode, appended to in self-play mode.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Self-play episodes.
        #[arg(long, default_value_t = 500)]
        episodes: u64,
        /// Start from these weights instead of a fresh network.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// 4v4 evaluation and optional score heat map.
    Eval {
        /// Scorer weights; the linear baseline when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Use a uniformly random choice instead of a scorer.
        #[arg(long, conflicts_with = "weights")]
        random: bool,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Scene for the score heat map written to `--out`.
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Time feasible-set construction.
    Bench {
        #[arg(long)]
        scene: PathBuf,
        /// Action grids as DIRECTIONSxSPEEDS, e.g. 128x16.
        #[arg(long, value_delimiter = ',', default_value = "128x16")]
        grids: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        worker_counts: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn load_scorer(weights: Option<&Path>) -> Result<Box<dyn Scorer>> {
    Ok(match weights {
        Some(p) => Box::new(read_weights(p)?),
        None => Box::new(LinearScorer::default()),
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli)?;
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match &cli.command {
        Command::Heatmap {
            scene,
            ball_speed,
            direction,
            cols,
        } => {
            let world = Scene::load(scene)?.to_world(&cfg)?;
            if !(ball_speed.is_finite() && *ball_speed >= 0.0) {
                return Err(Error::invalid("ball-speed", "must be non-negative"));
            }
            let ball = BallState {
                position: world.ball.position,
                velocity: Vec2::from_angle(*direction) * *ball_speed,
            };
            let spec = GridSpec::covering(&world.field, cols.unwrap_or(cfg.heatmap.cols));
            let params = cfg.search.params().intercept;
            let grid = with_workers(cfg.workers, || {
                intercept_heatmap(ball, &world.limits_ours, &cfg.physics, &params, &world.field, &spec)
            })??;
            let out = out_path(cli, "heatmap.grid");
            grid.write(&out)?;
            let feasible = grid.values.iter().filter(|v| v.is_finite()).count();
            writeln!(
                stdout,
                "wrote {} ({}x{} cells, {} feasible)",
                out.display(),
                spec.cols,
                spec.rows,
                feasible
            )
            .map_err(io)?;
        }
        Command::Plan { scene, weights, limit } => {
            let world = Scene::load(scene)?.to_world(&cfg)?;
            let scorer = load_scorer(weights.as_deref())?;
            let actions = enumerate_actions(&cfg.search.grid());
            let params = cfg.search.params();
            let set = with_workers(cfg.workers, || build_feasible_set(&world, &actions, &cfg.physics, &params))??;
            writeln!(
                stdout,
                "{} feasible pairs over {} actions ({} intercept evaluations)",
                set.cacops.len(),
                set.stats.actions,
                set.stats.intercept_evals
            )
            .map_err(io)?;
            writeln!(stdout, "action  mode  theta  v  receiver  x  y  t  margin  score").map_err(io)?;
            for c in set.cacops.iter().take(limit.unwrap_or(usize::MAX)) {
                let p = c.point();
                writeln!(
                    stdout,
                    "{} {:?} {:.4} {:.4} {} {:.3} {:.3} {:.4} {:.4} {:.6}",
                    c.action_index,
                    c.action.mode,
                    c.action.direction,
                    c.action.speed,
                    c.receiver_id,
                    p.x,
                    p.y,
                    c.time(),
                    c.opponent_margin,
                    scorer.score(&c.features)
                )
                .map_err(io)?;
            }
            match select_best(scorer.as_ref(), &set.cacops) {
                Some(b) => {
                    let p = b.point();
                    writeln!(
                        stdout,
                        "best action {} {:?} theta {:.4} v {:.4} -> robot {} at ({:.3}, {:.3}) t {:.4} score {:.6}",
                        b.action_index,
                        b.action.mode,
                        b.action.direction,
                        b.action.speed,
                        b.receiver_id,
                        p.x,
                        p.y,
                        b.time(),
                        scorer.score(&b.features)
                    )
                    .map_err(io)?;
                }
                None => writeln!(stdout, "best none").map_err(io)?,
            }
            if let Some(out) = &cli.out {
                let mut w = create(out)?;
                write_feasible_set(&mut w, &set.cacops).map_err(|e| Error::io(out, e))?;
                w.flush().map_err(|e| Error::io(out, e))?;
            }
        }
        Command::Train {
            mode,
            log,
            episodes,
            init,
        } => {
            let q = match init {
                Some(p) => read_weights(p)?,
                None => cfg.train.init_scorer()?,
            };
            let (q, report) = match mode {
                TrainMode::Offline => {
                    let path = log
                        .as_deref()
                        .ok_or_else(|| Error::invalid("log", "offline training needs --log"))?;
                    let parsed = read_episode_log(path)?;
                    if parsed.malformed > 0 {
                        writeln!(stdout, "warning: skipped {} malformed records", parsed.malformed).map_err(io)?;
                    }
                    let (q, mut report) = run_offline(&parsed.records, q, &cfg.train)?;
                    report.skipped_records = parsed.malformed;
                    (q, report)
                }
                TrainMode::Selfplay => {
                    let mut arena = cfg.arena();
                    with_workers(cfg.workers, || match log {
                        Some(p) => {
                            let mut w = EpisodeLogWriter::append(p)?;
                            run_selfplay(&mut arena, q, &cfg.train, *episodes, Some(&mut w))
                        }
                        None => run_selfplay::<std::io::Sink>(&mut arena, q, &cfg.train, *episodes, None),
                    })??
                }
            };
            let out = out_path(cli, "weights.qpw");
            write_weights(&q, &out)?;
            let text_path = out.with_extension("txt");
            std::fs::write(&text_path, weights_to_text(&q)).map_err(|e| Error::io(&text_path, e))?;
            let report_path = out.with_extension("report.txt");
            std::fs::write(&report_path, report.to_text()).map_err(|e| Error::io(&report_path, e))?;
            writeln!(
                stdout,
                "wrote {} ({} updates, {} episodes); report {}",
                out.display(),
                report.updates,
                report.rows.len(),
                report_path.display()
            )
            .map_err(io)?;
        }
        Command::Eval {
            weights,
            random,
            episodes,
            scene,
        } => {
            let scorer = load_scorer(weights.as_deref())?;
            let policy = if *random {
                Policy::Random
            } else {
                Policy::Greedy(scorer.as_ref())
            };
            let arena = cfg.arena();
            let seed = cfg.sim.seed;
            let report = with_workers(cfg.workers, || run_4v4(&arena, policy, *episodes, seed))??;
            write!(stdout, "{}", report.to_text()).map_err(io)?;
            if let Some(scene) = scene {
                let world = Scene::load(scene)?.to_world(&cfg)?;
                let spec = GridSpec::covering(&world.field, cfg.heatmap.cols);
                let params = cfg.search.params();
                let grid = with_workers(cfg.workers, || {
                    score_heatmap(&world, scorer.as_ref(), &spec, &cfg.physics, &params)
                })??;
                let out = out_path(cli, "scores.grid");
                grid.write(&out)?;
                writeln!(stdout, "wrote {}", out.display()).map_err(io)?;
            }
        }
        Command::Bench {
            scene,
            grids,
            worker_counts,
            repeats,
        } => {
            let world = Scene::load(scene)?.to_world(&cfg)?;
            let mut runs = Vec::new();
            for g in grids {
                let grid = parse_grid(g, &cfg.search.modes)?;
                let actions = enumerate_actions(&grid);
                for &workers in worker_counts {
                    for pruned in [false, true] {
                        let params = SearchParams {
                            pruned,
                            ..cfg.search.params()
                        };
                        runs.push(bench_one(&world, &actions, &cfg, &params, g, workers, (*repeats).max(1))?);
                    }
                }
            }
            let text = serde_json::to_string_pretty(&BenchReport { runs }).expect("bench report serializes");
            writeln!(stdout, "{text}").map_err(io)?;
            if let Some(out) = &cli.out {
                std::fs::write(out, text + "\n").map_err(|e| Error::io(out, e))?;
            }
        }
    }
    Ok(())
}

fn parse_grid(s: &str, modes: &[crate::ball::KickMode]) -> Result<ActionGrid> {
    let bad = || Error::invalid("grids", format!("{s:?} is not DIRECTIONSxSPEEDS"));
    let (d, v) = s.split_once('x').ok_or_else(bad)?;
    let grid = ActionGrid::new(
        d.trim().parse().map_err(|_| bad())?,
        v.trim().parse().map_err(|_| bad())?,
        modes.to_vec(),
    );
    grid.validate()?;
    Ok(grid)
}

#[derive(Debug, Serialize)]
struct BenchRun {
    grid: String,
    workers: usize,
    pruned: bool,
    actions: usize,
    feasible: usize,
    intercept_evals: usize,
    /// Hash of the serialized feasible set.
    digest: String,
    mean_ms: f64,
    min_ms: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    runs: Vec<BenchRun>,
}

fn bench_one(
    world: &crate::world::WorldSnapshot,
    actions: &[crate::search::KickAction],
    cfg: &Config,
    params: &SearchParams,
    grid: &str,
    workers: usize,
    repeats: usize,
) -> Result<BenchRun> {
    with_workers(Some(workers), || {
        let mut times = Vec::with_capacity(repeats);
        let mut last = None;
        for _ in 0..repeats {
            let t0 = Instant::now();
            let set = build_feasible_set(world, actions, &cfg.physics, params)?;
            times.push(t0.elapsed().as_secs_f64() * 1e3);
            last = Some(set);
        }
        let set = last.expect("at least one repeat");
        let mut bytes = Vec::new();
        write_feasible_set(&mut bytes, &set.cacops).expect("in-memory write");
        let mut h = DefaultHasher::new();
        bytes.hash(&mut h);
        Ok(BenchRun {
            grid: grid.to_string(),
            workers,
            pruned: params.pruned,
            actions: actions.len(),
            feasible: set.cacops.len(),
            intercept_evals: set.stats.intercept_evals,
            digest: format!("{:016x}", h.finish()),
            mean_ms: times.iter().sum::<f64>() / times.len() as f64,
            min_ms: times.iter().copied().fold(f64::INFINITY, f64::min),
        })
    })?
}
