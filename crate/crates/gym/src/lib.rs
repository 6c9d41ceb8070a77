//! Labelled tabular environments, Q-learning over environment-monitor
//! products, and experiment batching.

pub mod envs;
pub mod experiment;
pub mod grid;
pub mod learn;

pub use envs::{make_env, EnvName, LabelledMdp, Variant};
pub use experiment::{summarize, Experiment, SummaryRow};
pub use learn::{train, EmaConfig, EmaConvergence, QLearnConfig, QTable, RewardSource, RunResult};
