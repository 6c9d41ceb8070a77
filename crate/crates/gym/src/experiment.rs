//! Batches of independent training runs and their summary statistics.

use std::collections::BTreeMap;

use qmon_core::compose::{compose, ComposeError, CompositeMonitor, SpecRewardPair};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{build_env, default_specs, spec_pairs, EnvError, EnvName, Variant};
use crate::learn::{train, EmaConfig, LearnError, QLearnConfig, RewardSource, RunResult};

/// Gap in mean task completion, below the best variant, beyond which a
/// variant counts as having converged to a suboptimal policy.
pub const SUBOPTIMAL_GAP: f64 = 0.02;

/// Moving-average window for learning curves.
pub const CURVE_WINDOW: usize = 21;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("no variants selected")]
    NoVariants,
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("workers must be at least 1")]
    NoWorkers,
    #[error("{variant}: {err}")]
    Compose { variant: Variant, err: ComposeError },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub env: EnvName,
    pub variants: Vec<Variant>,
    /// Per-variant `(formula, weight)` overrides of the default lists.
    pub specs: BTreeMap<Variant, Vec<(String, f64)>>,
    pub zeta: f64,
    pub qlearn: QLearnConfig,
    pub ema: EmaConfig,
    pub runs: usize,
    /// Run `i` trains with seed `seed + i`.
    pub seed: u64,
    /// Seed of the environment's own randomness, shared by all runs.
    pub env_seed: u64,
}

impl Experiment {
    pub fn new(env: EnvName) -> Self {
        Experiment {
            env,
            variants: Variant::ALL.to_vec(),
            specs: BTreeMap::new(),
            zeta: 0.0,
            qlearn: QLearnConfig::default(),
            ema: EmaConfig::default(),
            runs: 1,
            seed: 0,
            env_seed: 0,
        }
    }

    pub fn pairs(&self, variant: Variant) -> Result<Vec<SpecRewardPair<f64>>, EnvError> {
        match self.specs.get(&variant) {
            Some(list) => spec_pairs(list, variant),
            None => spec_pairs(default_specs(self.env, variant), variant),
        }
    }

    /// Check everything that can fail before any training starts. Returns
    /// one composite template per variant (`None` for base).
    pub fn prepare(&self) -> Result<Vec<Option<CompositeMonitor<f64>>>, ExperimentError> {
        if self.variants.is_empty() {
            return Err(ExperimentError::NoVariants);
        }
        if self.runs == 0 {
            return Err(ExperimentError::NoRuns);
        }
        self.qlearn.validate()?;
        let env = build_env(self.env, self.env_seed, self.qlearn.max_steps);
        let atoms: Vec<String> = env.atoms().iter().map(|a| a.to_string()).collect();
        self.variants
            .iter()
            .map(|&v| {
                if v == Variant::Base {
                    return Ok(None);
                }
                let pairs = self.pairs(v)?;
                compose(&pairs, self.zeta, &atoms)
                    .map(Some)
                    .map_err(|err| ExperimentError::Compose { variant: v, err })
            })
            .collect()
    }

    /// Train every `(variant, run)` pair on `workers` threads. Results are
    /// ordered by variant, then run.
    pub fn run(&self, workers: usize) -> Result<Vec<RunResult>, ExperimentError> {
        if workers == 0 {
            return Err(ExperimentError::NoWorkers);
        }
        let templates = self.prepare()?;
        let jobs: Vec<(Variant, Option<&CompositeMonitor<f64>>, usize)> = self
            .variants
            .iter()
            .zip(&templates)
            .flat_map(|(&v, t)| (0..self.runs).map(move |i| (v, t.as_ref(), i)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|&(v, template, i)| {
                    let mut env = build_env(self.env, self.env_seed, self.qlearn.max_steps);
                    let source = template.map_or(RewardSource::Base, |t| RewardSource::Monitor(t.clone()));
                    let cfg = QLearnConfig { seed: self.seed.wrapping_add(i as u64), ..self.qlearn.clone() };
                    train(env.as_mut(), source, v, &cfg, &self.ema).map_err(ExperimentError::from)
                })
                .collect()
        })
    }
}

/// One row of the convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub env: EnvName,
    pub variant: Variant,
    pub runs: usize,
    pub converged_runs: usize,
    /// Mean over converged runs.
    pub mean_convergence_episode: Option<f64>,
    pub mean_convergence_secs: Option<f64>,
    /// Mean over runs of each run's mean task completion.
    pub completion_mean: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub completion_ci: f64,
    /// Trails the best variant's completion by more than [`SUBOPTIMAL_GAP`].
    pub suboptimal: bool,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Half-width `1.96 * s / sqrt(n)` with the sample standard deviation.
pub fn ci95(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    1.96 * (var / n as f64).sqrt()
}

/// Summarise results grouped by variant, in first-seen order. Each run's
/// completion is its mean over the last `window` episodes (all if `None`).
pub fn summarize(env: EnvName, results: &[RunResult], window: Option<usize>) -> Vec<SummaryRow> {
    let mut order: Vec<Variant> = Vec::new();
    for r in results {
        if !order.contains(&r.variant) {
            order.push(r.variant);
        }
    }
    let mut rows: Vec<SummaryRow> = order
        .into_iter()
        .map(|v| {
            let runs: Vec<&RunResult> = results.iter().filter(|r| r.variant == v).collect();
            let eps: Vec<f64> = runs.iter().filter_map(|r| r.convergence_episode).map(|e| e as f64).collect();
            let secs: Vec<f64> = runs.iter().filter_map(|r| r.convergence_secs).collect();
            let comp: Vec<f64> = runs.iter().filter_map(|r| r.mean_completion(window)).collect();
            SummaryRow {
                env,
                variant: v,
                runs: runs.len(),
                converged_runs: eps.len(),
                mean_convergence_episode: mean(&eps),
                mean_convergence_secs: mean(&secs),
                completion_mean: mean(&comp).unwrap_or(0.0),
                completion_ci: ci95(&comp),
                suboptimal: false,
            }
        })
        .collect();
    let best = rows.iter().map(|r| r.completion_mean).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        r.suboptimal = r.completion_mean < best - SUBOPTIMAL_GAP;
    }
    rows
}

/// Trailing moving average; the first `window - 1` points average what is
/// available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        sum += x;
        if i >= w {
            sum -= xs[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}

/// Per-episode task completion averaged over the runs of `variant`.
pub fn mean_curve(results: &[RunResult], variant: Variant) -> Vec<f64> {
    let runs: Vec<&RunResult> = results.iter().filter(|r| r.variant == variant).collect();
    let len = runs.iter().map(|r| r.task_completion.len()).min().unwrap_or(0);
    (0..len)
        .map(|e| runs.iter().map(|r| r.task_completion[e]).sum::<f64>() / runs.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_small() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
        assert!(moving_average(&[], 21).is_empty());
    }

    #[test]
    fn ci_of_constant_is_zero() {
        assert_eq!(ci95(&[0.5; 10]), 0.0);
        let h = ci95(&[0.0, 1.0]);
        assert!((h - 1.96 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn validation_before_running() {
        let mut x = Experiment::new(EnvName::FrozenLake);
        x.runs = 0;
        assert!(matches!(x.run(1), Err(ExperimentError::NoRuns)));
        x.runs = 1;
        x.zeta = 1.0;
        assert!(matches!(x.run(1), Err(ExperimentError::Compose { .. })));
        x.zeta = 0.0;
        x.specs.insert(Variant::Boolean, vec![("F nowhere".into(), 1.0)]);
        assert!(matches!(x.run(1), Err(ExperimentError::Compose { .. })));
    }

    #[test]
    fn empty_runs_summarise_to_none() {
        let mut x = Experiment::new(EnvName::CliffWalking);
        x.qlearn.episodes = 0;
        let res = x.run(1).unwrap();
        let rows = summarize(x.env, &res, None);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.mean_convergence_episode.is_none()));
        assert!(mean_curve(&res, Variant::Base).is_empty());
    }
}
