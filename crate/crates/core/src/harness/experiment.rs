//! Alternating explore/exploit runs, replicates and their output files.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baseline::{run_q_trial, BaselineError, QTable};
use crate::envs::{optimal_moves, Environment, Start};
use crate::lcs::{run_mdp_trial, write_snapshot, LcsError, StatePolicy, TrialMode, TrialResult, Xcsf};
use crate::tcs::{run_tcs_trial, TraceEvent};

use super::config::{AgentKind, ConfigError, ControlMode, EnvKind, ExperimentConfig};
use super::metrics::{MetricsRow, MetricsWriter, Window};
use super::stability::StabilityTracker;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("trial {trial}: {source}")]
    Trial { trial: u32, source: LcsError },
    #[error("trial {trial}: {source}")]
    Baseline { trial: u32, source: BaselineError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Input(String),
}

impl HarnessError {
    /// 1 for bad configuration, 2 for anything that went wrong while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| HarnessError::Io { path: path.to_path_buf(), source }
    }
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under master seed `master`: the
/// `index + 1`-th output of a splitmix64 stream started at `master`.
pub fn replicate_seed(master: u64, index: u32) -> u64 {
    mix(master.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

enum Learner {
    Lcs(Box<Xcsf<f64>>),
    Table(QTable<f64>),
}

#[derive(Default)]
struct Windows {
    moves: Window,
    forms: Window,
    goals: Window,
    pmoves: Window,
    pforms: Window,
}

impl Windows {
    fn row(&mut self, trial: u32, tracker: &Option<StabilityTracker>, learner: &Learner) -> MetricsRow {
        MetricsRow {
            trial,
            exploit_moves: self.moves.take(),
            exploit_formations: self.forms.take(),
            exploit_goal_rate: self.goals.take(),
            probe_moves: self.pmoves.take(),
            probe_formations: self.pforms.take(),
            stable_at: tracker.as_ref().and_then(StabilityTracker::stable_at),
            population: match learner {
                Learner::Lcs(a) => Some(a.pop.stats()),
                Learner::Table(_) => None,
            },
        }
    }
}

/// Everything one replicate produced besides its files.
#[derive(Clone, Debug)]
pub struct ReplicateOutcome {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    /// Exploit trials in order.
    pub exploit: Vec<TrialResult>,
    /// `(trial, result)` for every probe.
    pub probes: Vec<(u32, TrialResult)>,
    pub stable_at: Option<u32>,
    /// Probe result counted as optimal, when probing.
    pub optimum: Option<u32>,
    /// Final population snapshot, or the Q-table dump.
    pub final_state: String,
}

pub fn build_env(cfg: &ExperimentConfig) -> Box<dyn Environment<f64> + Send> {
    match cfg.env {
        EnvKind::Grid => Box::new(cfg.grid()),
        EnvKind::MountainCar => Box::new(cfg.mountain_car()),
    }
}

pub fn build_agent(cfg: &ExperimentConfig, env: &dyn Environment<f64>) -> Xcsf<f64> {
    let mut a = Xcsf::new(cfg.xcsf, cfg.lif, cfg.representation, env.input_count(), env.codebook());
    a.genome_init = cfg.genome_init;
    a.adapt_init = cfg.adapt_init;
    a.state_policy = match cfg.mode {
        ControlMode::Mdp => StatePolicy::ResetEachActivation,
        ControlMode::Tcs => StatePolicy::Persist,
    };
    a
}

/// Probe value counted as optimal: the configured one, else two
/// formations under temporal control, else the shortest path from the
/// probe start.
pub fn stability_optimum(cfg: &ExperimentConfig) -> u32 {
    cfg.stability_optimum.unwrap_or_else(|| match cfg.mode {
        ControlMode::Tcs => 2,
        ControlMode::Mdp => {
            let g = cfg.grid();
            optimal_moves(&g, g.probe_start)
        }
    })
}

/// Runs one replicate. Rows go to `metrics` as they are produced; TCS
/// decision logs of exploit trials go to `trace` when given.
pub fn run_replicate<W: Write>(
    cfg: &ExperimentConfig,
    seed: u64,
    metrics: &mut MetricsWriter<W>,
    mut trace: Option<&mut dyn Write>,
) -> Result<ReplicateOutcome, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = build_env(cfg);
    let probing = cfg.probe && env.supports_probe();
    let mut learner = match cfg.agent {
        AgentKind::Lcs => Learner::Lcs(Box::new(build_agent(cfg, &*env))),
        AgentKind::QLearn => {
            let mut t = QTable::new(cfg.grid_step, env.input_count(), env.codebook().action_count());
            t.gamma = cfg.q_gamma;
            t.learn_rate = cfg.q_learn_rate;
            Learner::Table(t)
        }
    };
    let optimum = probing.then(|| stability_optimum(cfg));
    let mut tracker = optimum.map(|o| StabilityTracker::new(o, cfg.stability_window));
    let io_trace = Path::new("trace");
    if let Some(t) = trace.as_deref_mut() {
        writeln!(t, "trial\t{}", TraceEvent::<f64>::HEADER).map_err(HarnessError::io(io_trace))?;
    }

    let mut out = ReplicateOutcome {
        seed,
        rows: Vec::new(),
        exploit: Vec::new(),
        probes: Vec::new(),
        stable_at: None,
        optimum,
        final_state: String::new(),
    };
    let mut win = Windows::default();
    let mut trial = 0u32;
    let mut events = Vec::new();

    let run = |learner: &mut Learner,
                   env: &mut dyn Environment<f64>,
                   start: Start,
                   mode: TrialMode,
                   trial: u32,
                   rng: &mut ChaCha8Rng,
                   events: Option<&mut Vec<TraceEvent<f64>>>|
     -> Result<TrialResult, HarnessError> {
        match learner {
            Learner::Lcs(a) => match cfg.mode {
                ControlMode::Mdp => run_mdp_trial(a, env, start, mode, rng),
                ControlMode::Tcs => run_tcs_trial(a, env, start, mode, &cfg.tcs, rng, events),
            }
            .map_err(|source| HarnessError::Trial { trial, source }),
            Learner::Table(t) => {
                run_q_trial(t, env, start, mode, rng).map_err(|source| HarnessError::Baseline { trial, source })
            }
        }
    };

    let pairs = cfg.explore_trials.max(cfg.exploit_trials);
    for pair in 0..pairs {
        for (mode, budget) in [(TrialMode::Explore, cfg.explore_trials), (TrialMode::Exploit, cfg.exploit_trials)] {
            if pair >= budget {
                continue;
            }
            trial += 1;
            let tracing = trace.is_some() && mode == TrialMode::Exploit && cfg.mode == ControlMode::Tcs;
            events.clear();
            let res = run(&mut learner, &mut *env, Start::Random, mode, trial, &mut rng, tracing.then_some(&mut events))?;
            if mode == TrialMode::Exploit {
                win.moves.push(res.moves as f64);
                win.forms.push(res.formations as f64);
                win.goals.push(res.reached_goal as u8 as f64);
                out.exploit.push(res);
                if let Some(t) = trace.as_deref_mut() {
                    for e in &events {
                        writeln!(t, "{trial}\t{e}").map_err(HarnessError::io(io_trace))?;
                    }
                }
                if probing {
                    let p = run(&mut learner, &mut *env, Start::Probe, TrialMode::Probe, trial, &mut rng, None)?;
                    win.pmoves.push(p.moves as f64);
                    win.pforms.push(p.formations as f64);
                    let score = match cfg.mode {
                        ControlMode::Mdp => p.moves,
                        ControlMode::Tcs => p.formations,
                    };
                    // a capped probe never counts as optimal
                    let score = if p.reached_goal { score } else { u32::MAX };
                    if let Some(tr) = tracker.as_mut() {
                        tr.observe(trial, score);
                    }
                    out.probes.push((trial, p));
                }
            }
            if trial % cfg.sample_period == 0 {
                let row = win.row(trial, &tracker, &learner);
                metrics.write(&row)?;
                out.rows.push(row);
            }
        }
    }
    if trial % cfg.sample_period != 0 {
        let row = win.row(trial, &tracker, &learner);
        metrics.write(&row)?;
        out.rows.push(row);
    }
    out.stable_at = tracker.and_then(|t| t.stable_at());
    out.final_state = match &learner {
        Learner::Lcs(a) => write_snapshot(&a.pop, &a.params, a.time),
        Learner::Table(t) => t.dump(),
    };
    Ok(out)
}

/// Files of replicate `i` inside `dir`.
pub fn replicate_paths(dir: &Path, i: u32, cfg: &ExperimentConfig) -> (PathBuf, PathBuf, PathBuf) {
    let state = match cfg.agent {
        AgentKind::Lcs => format!("replicate_{i}.snapshot"),
        AgentKind::QLearn => format!("replicate_{i}.qtable.tsv"),
    };
    (dir.join(format!("replicate_{i}.csv")), dir.join(state), dir.join(format!("replicate_{i}.trace.tsv")))
}

/// Runs every replicate in parallel and writes, per replicate, the metrics
/// CSV, the final population (or Q-table) and, if asked for, the TCS trace.
/// A `seeds.tsv` in `dir` lists the seed each replicate used.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<ReplicateOutcome>, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let seeds: Vec<u64> = (0..cfg.replicates).map(|i| replicate_seed(cfg.seed, i)).collect();
    let manifest = dir.join("seeds.tsv");
    let listing: String = std::iter::once("replicate\tseed\n".to_string())
        .chain(seeds.iter().enumerate().map(|(i, s)| format!("{i}\t{s}\n")))
        .collect();
    fs::write(&manifest, listing).map_err(HarnessError::io(&manifest))?;

    (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let (csv_path, state_path, trace_path) = replicate_paths(dir, i, cfg);
            let file = File::create(&csv_path).map_err(HarnessError::io(&csv_path))?;
            let mut metrics = MetricsWriter::new(file)?;
            let mut trace_file = if cfg.trace && cfg.mode == ControlMode::Tcs {
                Some(BufWriter::new(File::create(&trace_path).map_err(HarnessError::io(&trace_path))?))
            } else {
                None
            };
            let outcome =
                run_replicate(cfg, seeds[i as usize], &mut metrics, trace_file.as_mut().map(|w| w as &mut dyn Write))?;
            if let Some(mut w) = trace_file {
                w.flush().map_err(HarnessError::io(&trace_path))?;
            }
            fs::write(&state_path, &outcome.final_state).map_err(HarnessError::io(&state_path))?;
            Ok(outcome)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Desk-sized run; keys in `text` replace the small defaults.
    fn small(text: &str) -> ExperimentConfig {
        let base = ["population = 300", "explore_trials = 30", "exploit_trials = 30", "sample_period = 10"];
        let mut lines: Vec<&str> =
            base.into_iter().filter(|l| !text.contains(l.split(' ').next().unwrap())).collect();
        lines.extend(text.lines());
        ExperimentConfig::parse(&lines.join("\n")).unwrap()
    }

    #[test]
    fn replicate_seeds_differ_and_repeat() {
        let a: Vec<u64> = (0..10).map(|i| replicate_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 10);
        assert_eq!(a, (0..10).map(|i| replicate_seed(7, i)).collect::<Vec<_>>());
        assert_ne!(replicate_seed(7, 0), replicate_seed(8, 0));
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of splitmix64 seeded with 0
        assert_eq!(replicate_seed(0, 0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(replicate_seed(0, 1), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn rows_cover_the_schedule() {
        let cfg = small("");
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        let out = run_replicate(&cfg, 3, &mut w, None).unwrap();
        let trials: Vec<u32> = out.rows.iter().map(|r| r.trial).collect();
        assert_eq!(trials, vec![10, 20, 30, 40, 50, 60]);
        assert_eq!(out.exploit.len(), 30);
        assert_eq!(out.probes.len(), 30);
        assert_eq!(out.optimum, Some(29));
        assert!(out.rows.iter().all(|r| r.population.is_some()));
    }

    #[test]
    fn uneven_schedule_gets_a_final_row() {
        let cfg = small("explore_trials = 7\nexploit_trials = 3");
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        let out = run_replicate(&cfg, 3, &mut w, None).unwrap();
        assert_eq!(out.rows.last().unwrap().trial, 10);
        assert_eq!(out.exploit.len(), 3);
    }

    #[test]
    fn same_seed_same_csv() {
        let cfg = small("mode = tcs");
        let run = || {
            let mut w = MetricsWriter::new(Vec::new()).unwrap();
            run_replicate(&cfg, 9, &mut w, None).unwrap();
            w.into_inner()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn qlearner_leaves_neural_columns_empty() {
        let cfg = small("agent = qlearn");
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        let out = run_replicate(&cfg, 1, &mut w, None).unwrap();
        assert!(out.rows.iter().all(|r| r.population.is_none()));
        assert!(out.final_state.starts_with("state\tc0\tc1"));
    }

    #[test]
    fn mountain_car_has_no_probe() {
        let cfg = small("env = mountain-car\nmode = tcs\npopulation = 200\nexplore_trials = 3\nexploit_trials = 3\nsample_period = 2");
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        let out = run_replicate(&cfg, 1, &mut w, None).unwrap();
        assert!(out.probes.is_empty() && out.optimum.is_none());
        assert!(out.rows.iter().all(|r| r.probe_moves.is_none()));
    }

    #[test]
    fn experiment_writes_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small("replicates = 2\nmode = tcs\ntrace = true");
        let outs = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(outs.len(), 2);
        for i in 0..2 {
            let (c, s, t) = replicate_paths(dir.path(), i, &cfg);
            assert!(c.exists() && s.exists() && t.exists());
            let trace = fs::read_to_string(t).unwrap();
            assert!(trace.lines().count() > 1);
        }
        assert!(dir.path().join("seeds.tsv").exists());
    }
}
