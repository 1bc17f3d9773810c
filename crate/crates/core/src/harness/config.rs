//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Every key has a default, unknown keys are rejected, and a key may
//! appear once. Environment variables named `NXCSF_<KEY>` (key upper
//! cased) override the file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::envs::{GridWorld, MountainCar, NoiseModel};
use crate::lcs::{GaClock, SelfAdaptive, XcsfParams};
use crate::neuronet::{GenomeInit, LifParams, Representation, WeightMutation};
use crate::tcs::{PayoffClock, TcsParams};

/// Prefix for environment overrides.
pub const ENV_PREFIX: &str = "NXCSF_";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{origin}: {msg}")]
pub struct ConfigError {
    /// Where the offending entry came from, e.g. `line 4` or
    /// `NXCSF_BETA`.
    pub origin: String,
    pub msg: String,
}

impl ConfigError {
    fn new(origin: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError { origin: origin.into(), msg: msg.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Grid,
    MountainCar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlMode {
    /// A new match set on every move.
    Mdp,
    /// Temporal macro-actions.
    Tcs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Lcs,
    QLearn,
}

macro_rules! keyword_enum {
    ($ty:ident { $($text:literal => $variant:ident),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($ty::$variant),)+
                    _ => Err(format!("expected one of {}, got {s:?}", [$($text),+].join(", "))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                // first spelling listed is canonical
                #[allow(unreachable_patterns)]
                let s = match self { $($ty::$variant => $text,)+ };
                f.write_str(s)
            }
        }
    };
}

keyword_enum!(EnvKind { "grid" => Grid, "mountain-car" => MountainCar, "mcar" => MountainCar });
keyword_enum!(ControlMode { "mdp" => Mdp, "tcs" => Tcs });
keyword_enum!(AgentKind { "lcs" => Lcs, "qlearn" => QLearn });

fn parse_rep(s: &str) -> Result<Representation, String> {
    match s {
        "snn" => Ok(Representation::Spiking),
        "mlp" => Ok(Representation::Mlp),
        _ => Err(format!("expected snn or mlp, got {s:?}")),
    }
}

fn parse_noise_model(s: &str) -> Result<NoiseModel, String> {
    match s {
        "multiplicative" => Ok(NoiseModel::Multiplicative),
        "additive" => Ok(NoiseModel::Additive),
        _ => Err(format!("expected multiplicative or additive, got {s:?}")),
    }
}

/// `redraw` or `gaussian:<sigma>`.
fn parse_weight_mutation(s: &str) -> Result<WeightMutation<f64>, String> {
    match s.split_once(':') {
        None if s == "redraw" => Ok(WeightMutation::Redraw),
        Some(("gaussian", sigma)) => sigma
            .parse()
            .map(|sigma| WeightMutation::Gaussian { sigma })
            .map_err(|_| format!("bad gaussian sigma {sigma:?}")),
        _ => Err(format!("expected redraw or gaussian:<sigma>, got {s:?}")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {s:?}")),
    }
}

/// Everything a run needs. Scalars are `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    /// Grid move length.
    pub grid_step: f64,
    pub noise: f64,
    pub noise_model: NoiseModel,
    pub reward: f64,
    /// Moves before a trial is abandoned; environment default when `None`.
    pub move_cap: Option<u32>,
    pub representation: Representation,
    pub mode: ControlMode,
    pub agent: AgentKind,
    pub xcsf: XcsfParams<f64>,
    pub lif: LifParams<f64>,
    pub tcs: TcsParams<f64>,
    pub q_gamma: f64,
    pub q_learn_rate: f64,
    pub explore_trials: u32,
    pub exploit_trials: u32,
    pub replicates: u32,
    pub seed: u64,
    /// Trials (explore and exploit together) between metrics rows.
    pub sample_period: u32,
    pub genome_init: GenomeInit<f64>,
    /// Upper bounds of the covering draws for the self-adaptive rates.
    pub adapt_init: SelfAdaptive<f64>,
    /// Probe from the fixed start after every exploit trial, where the
    /// environment has one.
    pub probe: bool,
    /// Probe result counted as optimal; derived from the environment when
    /// `None`.
    pub stability_optimum: Option<u32>,
    /// Consecutive optimal probes that make a run stable.
    pub stability_window: u32,
    /// Write per-trial TCS decision logs.
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvKind::Grid,
            grid_step: 0.05,
            noise: 0.05,
            noise_model: NoiseModel::Multiplicative,
            reward: 1000.0,
            move_cap: None,
            representation: Representation::Spiking,
            mode: ControlMode::Mdp,
            agent: AgentKind::Lcs,
            xcsf: XcsfParams::default(),
            lif: LifParams::default(),
            tcs: TcsParams::default(),
            q_gamma: 0.99,
            q_learn_rate: 0.2,
            explore_trials: 10_000,
            exploit_trials: 10_000,
            replicates: 10,
            seed: 1,
            sample_period: 50,
            genome_init: GenomeInit::default(),
            adapt_init: SelfAdaptive::splat(1.0),
            probe: true,
            stability_optimum: None,
            stability_window: 50,
            trace: false,
        }
    }
}

/// Raw entries with their origin, consumed key by key.
struct Entries {
    map: BTreeMap<String, (String, String)>,
}

impl Entries {
    fn take<T>(&mut self, key: &str, slot: &mut T, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<(), ConfigError> {
        if let Some((value, origin)) = self.map.remove(key) {
            *slot = parse(&value).map_err(|m| ConfigError::new(origin, format!("{key}: {m}")))?;
        }
        Ok(())
    }

    fn num<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError> {
        self.take(key, slot, |v| v.parse().map_err(|_| format!("cannot parse {v:?}")))
    }
}

/// Every key the format accepts, in documentation order.
pub const KEYS: &[&str] = &[
    "env", "grid_step", "noise", "noise_model", "reward", "move_cap",
    "representation", "mode", "agent",
    "population", "beta", "epsilon0", "theta_ga", "theta_del", "x0", "eta", "gamma", "alpha", "nu", "delta",
    "init_fitness", "init_error", "offspring_fitness", "cover_attempts", "weight_mutation", "adapt_floor", "ga_clock",
    "lif_a", "lif_b", "lif_c", "lif_c_ini", "lif_threshold", "lif_window",
    "tcs_phi", "tcs_rho", "tcs_timeout", "tcs_clock",
    "q_gamma", "q_learn_rate",
    "explore_trials", "exploit_trials", "replicates", "seed", "sample_period",
    "init_hidden", "init_enable_prob", "mu", "psi", "omega", "tau",
    "probe", "stability_optimum", "stability_window", "trace",
];

impl ExperimentConfig {
    /// Parses `text` without environment overrides.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_env(text, std::iter::empty::<(String, String)>())
    }

    /// Parses `text`, then applies every `NXCSF_*` pair in `env`.
    pub fn parse_with_env<K, V>(text: &str, env: impl IntoIterator<Item = (K, V)>) -> Result<Self, ConfigError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let origin = format!("line {}", i + 1);
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&origin, format!("expected key = value, got {line:?}")))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(ConfigError::new(origin, "empty key"));
            }
            if map.contains_key(&k) {
                return Err(ConfigError::new(origin, format!("duplicate key {k}")));
            }
            map.insert(k, (v, origin));
        }
        for (k, v) in env {
            if let Some(key) = k.as_ref().strip_prefix(ENV_PREFIX) {
                map.insert(key.to_lowercase(), (v.as_ref().trim().to_string(), k.as_ref().to_string()));
            }
        }
        let cfg = Self::from_entries(Entries { map })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_entries(mut e: Entries) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::default();
        e.take("env", &mut c.env, str::parse)?;
        // environment-specific defaults before the explicit keys
        if c.env == EnvKind::MountainCar {
            c.xcsf.max_micro = 1000;
            c.explore_trials = 2500;
            c.exploit_trials = 2500;
            c.probe = false;
            c.tcs = TcsParams::long();
        }
        e.num("grid_step", &mut c.grid_step)?;
        if c.env == EnvKind::Grid && c.grid_step < 0.05 - 1e-12 {
            c.tcs.timeout = TcsParams::<f64>::long().timeout;
        }
        e.num("noise", &mut c.noise)?;
        e.take("noise_model", &mut c.noise_model, parse_noise_model)?;
        e.num("reward", &mut c.reward)?;
        e.take("move_cap", &mut c.move_cap, |v| v.parse().map(Some).map_err(|_| format!("cannot parse {v:?}")))?;
        e.take("representation", &mut c.representation, parse_rep)?;
        e.take("mode", &mut c.mode, str::parse)?;
        e.take("agent", &mut c.agent, str::parse)?;

        let x = &mut c.xcsf;
        e.num("population", &mut x.max_micro)?;
        e.num("beta", &mut x.beta)?;
        e.num("epsilon0", &mut x.epsilon0)?;
        e.num("theta_ga", &mut x.theta_ga)?;
        e.num("theta_del", &mut x.theta_del)?;
        e.num("x0", &mut x.x0)?;
        e.num("eta", &mut x.eta)?;
        e.num("gamma", &mut x.gamma)?;
        e.num("alpha", &mut x.alpha)?;
        e.num("nu", &mut x.nu)?;
        e.num("delta", &mut x.delta)?;
        e.num("init_fitness", &mut x.init_fitness)?;
        e.num("init_error", &mut x.init_error)?;
        e.num("offspring_fitness", &mut x.offspring_fitness)?;
        e.num("cover_attempts", &mut x.cover_attempts)?;
        e.take("weight_mutation", &mut x.weight_mutation, parse_weight_mutation)?;
        e.num("adapt_floor", &mut x.adapt_floor)?;
        e.take("ga_clock", &mut x.ga_clock, GaClock::from_str)?;

        let l = &mut c.lif;
        e.num("lif_a", &mut l.a)?;
        e.num("lif_b", &mut l.b)?;
        e.num("lif_c", &mut l.c)?;
        e.num("lif_c_ini", &mut l.c_ini)?;
        e.num("lif_threshold", &mut l.threshold)?;
        e.num("lif_window", &mut l.window)?;

        e.num("tcs_phi", &mut c.tcs.phi)?;
        e.num("tcs_rho", &mut c.tcs.rho)?;
        e.num("tcs_timeout", &mut c.tcs.timeout)?;
        e.take("tcs_clock", &mut c.tcs.clock, PayoffClock::from_str)?;

        e.num("q_gamma", &mut c.q_gamma)?;
        e.num("q_learn_rate", &mut c.q_learn_rate)?;
        e.num("explore_trials", &mut c.explore_trials)?;
        e.num("exploit_trials", &mut c.exploit_trials)?;
        e.num("replicates", &mut c.replicates)?;
        e.num("seed", &mut c.seed)?;
        e.num("sample_period", &mut c.sample_period)?;
        e.num("init_hidden", &mut c.genome_init.hidden_nodes)?;
        e.num("init_enable_prob", &mut c.genome_init.enable_prob)?;
        e.num("mu", &mut c.adapt_init.mu)?;
        e.num("psi", &mut c.adapt_init.psi)?;
        e.num("omega", &mut c.adapt_init.omega)?;
        e.num("tau", &mut c.adapt_init.tau)?;
        e.take("probe", &mut c.probe, parse_bool)?;
        e.take("stability_optimum", &mut c.stability_optimum, |v| {
            v.parse().map(Some).map_err(|_| format!("cannot parse {v:?}"))
        })?;
        e.num("stability_window", &mut c.stability_window)?;
        e.take("trace", &mut c.trace, parse_bool)?;

        if let Some((k, (_, origin))) = e.map.into_iter().next() {
            return Err(ConfigError::new(origin, format!("unknown key {k}")));
        }
        Ok(c)
    }

    /// Range checks; errors name the key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::new("config", msg));
        self.xcsf.validate().or_else(bad)?;
        self.lif.validate().map_err(|e| ConfigError::new("config", format!("lif: {e}")))?;
        self.tcs.validate().or_else(bad)?;
        for (name, v) in [("mu", self.adapt_init.mu), ("psi", self.adapt_init.psi), ("omega", self.adapt_init.omega), ("tau", self.adapt_init.tau)] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} = {v} must lie in (0, 1]"));
            }
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return bad(format!("grid_step = {} must lie in (0, 1]", self.grid_step));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad(format!("noise = {} must lie in [0, 1)", self.noise));
        }
        if !(self.reward.is_finite() && self.reward > 0.0) {
            return bad(format!("reward = {} must be positive", self.reward));
        }
        if self.move_cap == Some(0) {
            return bad("move_cap must be at least 1".into());
        }
        if !(self.q_gamma > 0.0 && self.q_gamma < 1.0) {
            return bad(format!("q_gamma = {} must lie in (0, 1)", self.q_gamma));
        }
        if !(self.q_learn_rate > 0.0 && self.q_learn_rate <= 1.0) {
            return bad(format!("q_learn_rate = {} must lie in (0, 1]", self.q_learn_rate));
        }
        if self.explore_trials == 0 && self.exploit_trials == 0 {
            return bad("explore_trials and exploit_trials are both zero".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.sample_period == 0 {
            return bad("sample_period must be at least 1".into());
        }
        if self.genome_init.hidden_nodes == 0 {
            return bad("init_hidden must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.genome_init.enable_prob) {
            return bad(format!("init_enable_prob = {} must lie in [0, 1]", self.genome_init.enable_prob));
        }
        if self.stability_window == 0 {
            return bad("stability_window must be at least 1".into());
        }
        if self.trace && self.mode != ControlMode::Tcs {
            return bad("trace needs mode = tcs".into());
        }
        if self.agent == AgentKind::QLearn && self.env != EnvKind::Grid {
            return bad("agent = qlearn needs env = grid".into());
        }
        if self.agent == AgentKind::QLearn && self.mode == ControlMode::Tcs {
            return bad("agent = qlearn runs in mode = mdp only".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> GridWorld<f64> {
        let mut g = GridWorld::new(self.grid_step);
        g.noise = self.noise;
        g.noise_model = self.noise_model;
        g.reward = self.reward;
        if let Some(cap) = self.move_cap {
            g.move_cap = cap;
        }
        g
    }

    pub fn mountain_car(&self) -> MountainCar<f64> {
        let mut m = MountainCar::default();
        m.reward = self.reward;
        if let Some(cap) = self.move_cap {
            m.move_cap = cap;
        }
        m
    }

    /// Total trials, explore and exploit together.
    pub fn total_trials(&self) -> u32 {
        self.explore_trials + self.exploit_trials
    }
}
