//! Reward convergence by checkpointed exponential moving averages.

use serde::{Deserialize, Serialize};

/// How the average is initialised before the first return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmaSeed {
    /// `E_0` is the first return, so `E_1` equals it.
    FirstReturn,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmaConfig {
    /// Span `N`; also the checkpoint interval.
    pub span: usize,
    /// Number `P` of consecutive checkpoint pairs that must agree.
    pub pairs: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Lower bound on the checkpoint magnitude used for scaling.
    pub scale_floor: f64,
    pub seed: EmaSeed,
    /// Fixed relative tolerance instead of the noise-adapted one.
    pub tolerance: Option<f64>,
}

impl Default for EmaConfig {
    fn default() -> Self {
        EmaConfig {
            span: 32,
            pairs: 5,
            rho_min: 0.002,
            rho_max: 0.02,
            scale_floor: 1.0,
            seed: EmaSeed::FirstReturn,
            tolerance: None,
        }
    }
}

impl EmaConfig {
    pub fn beta(&self) -> f64 {
        1.0 - 2.0 / (self.span as f64 + 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct EmaConvergence {
    cfg: EmaConfig,
    beta: f64,
    value: Option<f64>,
    episodes: usize,
    checkpoints: Vec<f64>,
    converged_at: Option<usize>,
}

impl EmaConvergence {
    pub fn new(cfg: EmaConfig) -> Self {
        EmaConvergence {
            beta: cfg.beta(),
            value: match cfg.seed {
                EmaSeed::FirstReturn => None,
                EmaSeed::Value(v) => Some(v),
            },
            cfg,
            episodes: 0,
            checkpoints: Vec::new(),
            converged_at: None,
        }
    }

    /// Current average, `None` before any return with [`EmaSeed::FirstReturn`].
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    pub fn checkpoints(&self) -> &[f64] {
        &self.checkpoints
    }

    pub fn converged_at(&self) -> Option<usize> {
        self.converged_at
    }

    /// Feed the next episode return; returns the (first) episode at which
    /// convergence was declared, if any so far.
    pub fn push(&mut self, ret: f64) -> Option<usize> {
        self.episodes += 1;
        let prev = self.value.unwrap_or(ret);
        self.value = Some(self.beta * prev + (1.0 - self.beta) * ret);
        if self.episodes % self.cfg.span == 0 {
            self.checkpoints.push(self.value.expect("set above"));
            if self.converged_at.is_none() && self.check() {
                self.converged_at = Some(self.episodes);
            }
        }
        self.converged_at
    }

    fn check(&self) -> bool {
        let p = self.cfg.pairs;
        let c = &self.checkpoints;
        if p == 0 || c.len() < p + 1 {
            return false;
        }
        let recent = &c[c.len() - p - 1..];
        let deltas: Vec<f64> = recent.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let tau = self.cfg.tolerance.unwrap_or_else(|| {
            let mean = deltas.iter().sum::<f64>() / p as f64;
            let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / p as f64;
            let scale = recent[p].abs().max(self.cfg.scale_floor);
            (var.sqrt() / scale).clamp(self.cfg.rho_min, self.cfg.rho_max)
        });
        recent
            .windows(2)
            .zip(&deltas)
            .all(|(w, d)| *d <= tau * w[0].abs().max(self.cfg.scale_floor))
    }
}
