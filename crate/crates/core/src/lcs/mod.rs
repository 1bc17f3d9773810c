//! XCSF population machinery: matching, covering, computed prediction,
//! reinforcement, the GA and macroclassifier accounting.

mod agent;
mod classifier;
mod ga;
mod params;
mod population;
mod sets;
mod snapshot;
mod trial;
mod update;

use thiserror::Error;

use crate::neuronet::NetError;

pub use agent::Xcsf;
pub use classifier::{compute_prediction, Classifier, ClassifierId, StatePolicy};
pub use ga::{breed, ga_due, run_ga};
pub use params::{GaClock, SelfAdaptive, XcsfParams};
pub use population::{roulette, Merge, Population, PopulationStats};
pub use sets::{build_prediction_array, select_action, ActionSet, MatchSet, PredictionArray, SelectMode};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use trial::{run_mdp_trial, TrialMode, TrialResult};
pub(crate) use trial::{tick_move, tick_step, tick_trial};
pub use update::update_action_set;

#[derive(Debug, Error)]
pub enum LcsError {
    #[error("covering found no network advocating action {action} in {attempts} attempts")]
    CoverFailure { action: usize, attempts: usize },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },
}
