//! Classifier networks: encodings, simulation and topology operators.

mod genome;
mod lif;
mod mlp;
mod ops;
mod text;

use thiserror::Error;

use crate::real::Real;

pub use genome::{Genome, Link, MlpGenome, NodeKind, Representation, SpikingGenome, OUTPUTS};
pub use lif::{input_signature, input_spike_train, lif_step, snn_activate, LifParams, NetState, TernaryActivation};
pub use mlp::{mlp_activate, mlp_outputs};
pub use ops::{
    connection_selection_event, connectivity_stats, constructivism_event, mutate_weights, random_genome,
    ConnectivityStats, ConstructivismOutcome, GenomeInit, WeightMutation, NEW_NODE_ENABLE_PROB,
};
pub use text::parse_genome;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("genome has no hidden nodes")]
    NoHiddenNodes,
    #[error("illegal link {from} -> {to}")]
    IllegalLink { from: usize, to: usize },
    #[error("weight {weight} on link {from} -> {to} is outside the legal range")]
    WeightOutOfRange { from: usize, to: usize, weight: f64 },
    #[error("disabled link {from} -> {to} carries a nonzero weight")]
    StaleDisabledWeight { from: usize, to: usize },
    #[error("invalid LIF parameters: {0}")]
    InvalidParams(&'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl<R: Real> Genome<R> {
    /// Runs the network on `input`. Spiking genomes advance `state`; MLPs
    /// ignore it.
    pub fn activate(
        &self,
        input: &[R],
        state: &mut NetState<R>,
        lif: &LifParams<R>,
    ) -> Result<TernaryActivation, NetError> {
        match self {
            Genome::Spiking(g) => snn_activate(g, input, state, lif),
            Genome::Mlp(g) => mlp_activate(g, input),
        }
    }

    /// A reset state sized for this genome.
    pub fn fresh_state(&self, lif: &LifParams<R>) -> NetState<R> {
        NetState::fresh(self.state_size(), lif)
    }
}
