//! Spiking neural XCSF: learning classifier systems whose conditions and
//! actions are evolved spiking (or MLP) networks, with temporal
//! macro-action control and a tabular Q-learning comparator.

pub mod baseline;
pub mod envs;
pub mod harness;
pub mod lcs;
pub mod neuronet;
pub mod real;
pub mod tcs;

pub use real::Real;

pub type Xcsf64 = lcs::Xcsf<f64>;
pub type Xcsf32 = lcs::Xcsf<f32>;
pub type Genome64 = neuronet::Genome<f64>;
pub type Genome32 = neuronet::Genome<f32>;
pub type QTable64 = baseline::QTable<f64>;
pub type QTable32 = baseline::QTable<f32>;
