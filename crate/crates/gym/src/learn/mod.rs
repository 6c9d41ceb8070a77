//! Tabular epsilon-greedy Q-learning on the product of an environment and
//! a composite reward monitor.

mod ema;
mod qtable;

use std::time::Instant;

use qmon_core::compose::CompositeMonitor;
use qmon_core::MonitorError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{EnvError, LabelledMdp, Variant};

pub use ema::{EmaConfig, EmaConvergence, EmaSeed};
pub use qtable::{Key, QLearnConfig, QTable};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("monitor atoms {monitor:?} do not match environment atoms {env:?}")]
    AtomMismatch { monitor: Vec<String>, env: Vec<String> },
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Where the learner's reward comes from.
#[derive(Debug, Clone)]
pub enum RewardSource {
    Base,
    Monitor(CompositeMonitor<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub variant: Variant,
    pub seed: u64,
    pub returns: Vec<f64>,
    pub task_completion: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub steps: Vec<usize>,
    /// Episode (1-based) at which the return EMA was declared converged.
    pub convergence_episode: Option<usize>,
    /// Training wall-clock seconds up to the convergence episode.
    pub convergence_secs: Option<f64>,
    /// Distinct composite control states seen.
    pub monitor_states: usize,
}

impl RunResult {
    pub fn episodes(&self) -> usize {
        self.returns.len()
    }

    /// Mean task completion over the last `window` episodes, or all of them.
    pub fn mean_completion(&self, window: Option<usize>) -> Option<f64> {
        let n = self.task_completion.len();
        let w = window.unwrap_or(n).min(n);
        (w > 0).then(|| self.task_completion[n - w..].iter().sum::<f64>() / w as f64)
    }
}

/// Train one agent. Fully determined by `cfg.seed` and the environment's
/// own seed.
pub fn train(
    env: &mut dyn LabelledMdp,
    mut source: RewardSource,
    variant: Variant,
    cfg: &QLearnConfig,
    ema: &EmaConfig,
) -> Result<RunResult, LearnError> {
    cfg.validate()?;
    if ema.span == 0 {
        return Err(LearnError::Config("EMA span must be positive".into()));
    }
    if let RewardSource::Monitor(cm) = &source {
        if cm.atoms().iter().map(String::as_str).ne(env.atoms().iter().copied()) {
            return Err(LearnError::AtomMismatch {
                monitor: cm.atoms().to_vec(),
                env: env.atoms().iter().map(|a| a.to_string()).collect(),
            });
        }
    }
    env.set_horizon(cfg.max_steps);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = QTable::new(env.num_states(), env.num_actions());
    let mut detector = EmaConvergence::new(ema.clone());
    let n_atoms = env.atoms().len();
    let (mut crisp, mut quant) = (vec![0.0; n_atoms], vec![0.0; n_atoms]);
    let mut out = RunResult {
        variant,
        seed: cfg.seed,
        returns: Vec::with_capacity(cfg.episodes),
        task_completion: Vec::with_capacity(cfg.episodes),
        epsilon: Vec::with_capacity(cfg.episodes),
        steps: Vec::with_capacity(cfg.episodes),
        convergence_episode: None,
        convergence_secs: None,
        monitor_states: 0,
    };
    let start = Instant::now();
    let mut seen_states = 0u32;

    for e in 0..cfg.episodes {
        let eps = cfg.epsilon(e);
        let s0 = env.reset();
        let m0 = match &mut source {
            RewardSource::Base => 0,
            RewardSource::Monitor(cm) => {
                env.labels(&mut crisp, &mut quant);
                cm.reset(&crisp, &quant)?;
                cm.state_index()
            }
        };
        let mut key = Key { env: s0, monitor: m0 };
        let (mut ret, mut steps) = (0.0, 0);
        loop {
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..env.num_actions())
            } else {
                q.greedy(key)
            };
            let t = env.step(a);
            let (r, m) = match &mut source {
                RewardSource::Base => (t.reward, 0),
                RewardSource::Monitor(cm) => {
                    env.labels(&mut crisp, &mut quant);
                    let r = cm.step(&crisp, &quant)?;
                    (r, cm.state_index())
                }
            };
            seen_states = seen_states.max(m + 1);
            let next = Key { env: t.state, monitor: m };
            q.update(key, a, r, (!t.terminated).then_some(next), cfg.alpha, cfg.gamma);
            ret += r;
            steps += 1;
            key = next;
            if t.done() {
                break;
            }
        }
        out.returns.push(ret);
        out.task_completion.push(env.task_completion()?);
        out.epsilon.push(eps);
        out.steps.push(steps);
        if out.convergence_episode.is_none() {
            if let Some(c) = detector.push(ret) {
                out.convergence_episode = Some(c);
                out.convergence_secs = Some(start.elapsed().as_secs_f64());
            }
        }
    }
    out.monitor_states = seen_states.max(1) as usize;
    Ok(out)
}
