//! Experiment configuration, scheduling, metrics and summaries.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod stability;
pub mod summary;

pub use config::{AgentKind, ConfigError, ControlMode, EnvKind, ExperimentConfig};
pub use experiment::{
    build_agent, build_env, replicate_paths, replicate_seed, run_experiment, run_replicate, stability_optimum,
    HarnessError, ReplicateOutcome,
};
pub use metrics::{MetricsRow, MetricsWriter, COLUMNS};
pub use stability::StabilityTracker;
pub use summary::{describe, summarize, welch, Describe, Endpoint, SummaryTable, Welch};
