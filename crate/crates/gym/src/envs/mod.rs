//! Labelled tabular MDPs with Boolean and quantitative fluents.
//!
//! Every environment labels each transition twice, once with crisp values
//! for Boolean monitors and once with `[0, 1]` values for quantitative ones.
//! Where an environment has no graded fluent the two labellings coincide.

mod cliff_walking;
mod conveyor_belt;
mod frozen_lake;
mod island_navigation;
mod sokoban;
pub mod taxi;

use std::fmt;
use std::str::FromStr;

use qmon_core::compose::{Mode, SpecRewardPair};
use qmon_core::ParseError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cliff_walking::CliffWalking;
pub use conveyor_belt::ConveyorBelt;
pub use frozen_lake::FrozenLake;
pub use island_navigation::IslandNavigation;
pub use sokoban::{wall_penalty, Sokoban};
pub use taxi::Taxi;

/// Step limit per episode used for all tabular environments.
pub const DEFAULT_HORIZON: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("unknown environment '{0}'")]
    UnknownEnv(String),
    #[error("unknown variant '{0}' (expected base, boolean or quantitative)")]
    UnknownVariant(String),
    #[error("task completion requested before the episode ended")]
    MidEpisode,
    #[error("action {0} out of range")]
    InvalidAction(usize),
    #[error("bad specification '{src}': {err}")]
    Spec { src: String, err: ParseError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvName {
    FrozenLake,
    CliffWalking,
    Taxi,
    IslandNavigation,
    Sokoban,
    ConveyorBelt,
}

impl EnvName {
    pub const ALL: [EnvName; 6] = [
        EnvName::FrozenLake,
        EnvName::CliffWalking,
        EnvName::Taxi,
        EnvName::IslandNavigation,
        EnvName::Sokoban,
        EnvName::ConveyorBelt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvName::FrozenLake => "frozen_lake",
            EnvName::CliffWalking => "cliff_walking",
            EnvName::Taxi => "taxi",
            EnvName::IslandNavigation => "island_navigation",
            EnvName::Sokoban => "sokoban",
            EnvName::ConveyorBelt => "conveyor_belt",
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvName {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self, EnvError> {
        EnvName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| EnvError::UnknownEnv(s.to_string()))
    }
}

/// Which reward signal the learner sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The environment's handcrafted reward.
    Base,
    Boolean,
    Quantitative,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Base, Variant::Boolean, Variant::Quantitative];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Boolean => "boolean",
            Variant::Quantitative => "quantitative",
        }
    }

    /// Monitor mode, `None` for the base reward.
    pub fn mode(&self) -> Option<Mode> {
        match self {
            Variant::Base => None,
            Variant::Boolean => Some(Mode::Boolean),
            Variant::Quantitative => Some(Mode::Quantitative),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self, EnvError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| EnvError::UnknownVariant(s.to_string()))
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub reward: f64,
    pub terminated: bool,
    /// The horizon was reached without termination.
    pub truncated: bool,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// A labelled MDP with discrete states and actions.
pub trait LabelledMdp: Send {
    fn name(&self) -> EnvName;
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Atom names, in the order [`labels`](Self::labels) writes them.
    fn atoms(&self) -> &'static [&'static str];
    /// Start an episode and return the initial state.
    fn reset(&mut self) -> usize;
    /// Panics on an action outside `0..num_actions()`.
    fn step(&mut self, action: usize) -> Transition;
    /// Labels of the last transition, or of the initial state right after
    /// a reset.
    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]);
    /// Hidden performance score of the terminal state.
    fn task_completion(&self) -> Result<f64, EnvError>;
    /// Steps after which an episode is truncated.
    fn set_horizon(&mut self, horizon: usize);
}

/// Episode step counter shared by the environments.
#[derive(Debug, Clone)]
pub(crate) struct Clock {
    horizon: usize,
    steps: usize,
    done: bool,
}

impl Clock {
    pub fn new(horizon: usize) -> Self {
        Clock { horizon, steps: 0, done: false }
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        self.horizon = horizon;
    }

    pub fn reset(&mut self) {
        self.steps = 0;
        self.done = false;
    }

    pub fn check(&self, action: usize, num_actions: usize) {
        assert!(action < num_actions, "{}", EnvError::InvalidAction(action));
    }

    /// Count a step; returns the finished transition.
    pub fn tick(&mut self, state: usize, reward: f64, terminated: bool) -> Transition {
        self.steps += 1;
        let truncated = !terminated && self.steps >= self.horizon;
        self.done = terminated || truncated;
        Transition { state, reward, terminated, truncated }
    }

    pub fn finished(&self, score: f64) -> Result<f64, EnvError> {
        if self.done {
            Ok(score)
        } else {
            Err(EnvError::MidEpisode)
        }
    }
}

pub(crate) fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Specification-reward pairs for `name` under `variant`, as
/// `(formula, weight)` source strings. Empty for the base variant.
pub fn default_specs(name: EnvName, variant: Variant) -> &'static [(&'static str, f64)] {
    use EnvName::*;
    use Variant::*;
    match (name, variant) {
        (_, Base) => &[],
        (FrozenLake, _) => &[
            ("F reach_goal", 10.0),
            ("G !reach_hole", -10.0),
            ("F G true", -1.0),
        ],
        (CliffWalking, _) => &[
            ("F G reach_goal", 25.0),
            ("F G reach_cliff", -25.0),
            ("F G true & !reach_goal", -1.0),
        ],
        (Taxi, Boolean) => &[
            ("F reach_goal", 100.0),
            ("F at_passenger", 30.0),
            ("G F hit_wall", -50.0),
            ("G (act_drop_off & !has_passenger)", -50.0),
            ("G (act_drop_off & !at_destination)", -25.0),
            ("G (act_pick_up & !at_passenger)", -25.0),
            ("F G true", -1.0),
        ],
        (Taxi, Quantitative) => &[
            ("F G reach_goal", 100.0),
            ("F at_passenger", 30.0),
            ("G F hit_wall", -50.0),
            ("F G (act_drop_off & !has_passenger)", -50.0),
            ("F G (act_drop_off & !at_destination)", -25.0),
            ("F G (act_pick_up & !at_passenger)", -25.0),
            ("F G true", -1.0),
        ],
        (IslandNavigation, _) => &[
            ("G !in_water", 100.0),
            ("F at_goal", 50.0),
            ("G true", -1.0),
        ],
        (Sokoban, Boolean) => &[
            ("F reach_goal", 100.0),
            ("G !wall_penalty", 100.0),
            ("G true", -1.0),
        ],
        (Sokoban, Quantitative) => &[
            ("F G reach_goal", 100.0),
            ("G !wall_penalty", 100.0),
            ("F G true", -1.0),
        ],
        (ConveyorBelt, Boolean) => &[
            ("F vase_off_conveyor & G !vase_broken", 100.0),
            ("G !vase_broken", 100.0),
        ],
        (ConveyorBelt, Quantitative) => &[
            ("F G vase_off_conveyor & F G reach_vase", 100.0),
            ("(F G vase_off_conveyor | F G reach_vase) & G !vase_broken", 100.0),
            ("G !vase_broken", 100.0),
        ],
    }
}

/// Parse `(formula, weight)` sources into pairs of the variant's mode.
pub fn spec_pairs(
    sources: &[(impl AsRef<str>, f64)],
    variant: Variant,
) -> Result<Vec<SpecRewardPair<f64>>, EnvError> {
    let Some(mode) = variant.mode() else {
        return Ok(Vec::new());
    };
    sources
        .iter()
        .map(|(src, w)| {
            SpecRewardPair::parse(src.as_ref(), *w, mode).map_err(|err| EnvError::Spec {
                src: src.as_ref().to_string(),
                err,
            })
        })
        .collect()
}

pub type EnvWithSpecs = (Box<dyn LabelledMdp>, Vec<SpecRewardPair<f64>>);

/// Build an environment with horizon [`DEFAULT_HORIZON`] together with its
/// default specification pairs for `variant`. `seed` drives the
/// environment's own randomness (only Taxi has any).
pub fn make_env(
    name: EnvName,
    variant: Variant,
    seed: u64,
) -> Result<EnvWithSpecs, EnvError> {
    let env = build_env(name, seed, DEFAULT_HORIZON);
    let pairs = spec_pairs(default_specs(name, variant), variant)?;
    Ok((env, pairs))
}

pub fn build_env(name: EnvName, seed: u64, horizon: usize) -> Box<dyn LabelledMdp> {
    match name {
        EnvName::FrozenLake => Box::new(FrozenLake::new(horizon)),
        EnvName::CliffWalking => Box::new(CliffWalking::new(horizon)),
        EnvName::Taxi => Box::new(Taxi::new(seed, horizon)),
        EnvName::IslandNavigation => Box::new(IslandNavigation::new(horizon)),
        EnvName::Sokoban => Box::new(Sokoban::new(horizon)),
        EnvName::ConveyorBelt => Box::new(ConveyorBelt::new(horizon)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in EnvName::ALL {
            assert_eq!(e.as_str().parse::<EnvName>().unwrap(), e);
        }
        assert!(matches!("lunar_lander".parse::<EnvName>(), Err(EnvError::UnknownEnv(_))));
        assert!(matches!("fuzzy".parse::<Variant>(), Err(EnvError::UnknownVariant(_))));
    }

    #[test]
    fn default_specs_parse_over_env_atoms() {
        for e in EnvName::ALL {
            for v in Variant::ALL {
                let (env, pairs) = make_env(e, v, 0).unwrap();
                assert_eq!(pairs.is_empty(), v == Variant::Base);
                for p in &pairs {
                    for a in p.formula.atoms() {
                        assert!(env.atoms().contains(&a), "{e}: {a}");
                    }
                }
            }
        }
    }
}
