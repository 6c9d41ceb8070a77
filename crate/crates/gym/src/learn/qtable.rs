use serde::{Deserialize, Serialize};

use super::LearnError;

/// Learner state: environment state paired with the composite monitor's
/// control-state index (always 0 for the base reward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key {
    pub env: usize,
    pub monitor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearnConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for QLearnConfig {
    fn default() -> Self {
        QLearnConfig {
            alpha: 0.01,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_decay: 0.9985,
            epsilon_min: 0.05,
            episodes: 2000,
            max_steps: 100,
            seed: 0,
        }
    }
}

impl QLearnConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |what: &str| Err(LearnError::Config(what.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || self.epsilon_min > self.epsilon_start {
            return bad("need 0 <= epsilon_min <= epsilon_start");
        }
        if self.epsilon_start > 1.0 {
            return bad("epsilon_start must be at most 1");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must be in (0, 1]");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }

    /// Exploration rate of episode `e` (0-based).
    pub fn epsilon(&self, e: usize) -> f64 {
        (self.epsilon_start * self.epsilon_decay.powi(e as i32)).max(self.epsilon_min)
    }
}

/// Dense action-value table. Rows for new monitor states are allocated on
/// first use and start at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_env: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(num_env: usize, num_actions: usize) -> Self {
        QTable {
            num_env,
            num_actions,
            values: vec![0.0; num_env * num_actions],
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn offset(&self, k: Key) -> usize {
        (k.monitor as usize * self.num_env + k.env) * self.num_actions
    }

    pub fn row(&self, k: Key) -> Option<&[f64]> {
        let o = self.offset(k);
        self.values.get(o..o + self.num_actions)
    }

    fn row_mut(&mut self, k: Key) -> &mut [f64] {
        let o = self.offset(k);
        if o + self.num_actions > self.values.len() {
            let per_monitor = self.num_env * self.num_actions;
            let monitors = k.monitor as usize + 1;
            self.values.resize(monitors * per_monitor, 0.0);
        }
        &mut self.values[o..o + self.num_actions]
    }

    pub fn get(&self, k: Key, a: usize) -> f64 {
        self.row(k).map_or(0.0, |r| r[a])
    }

    pub fn set(&mut self, k: Key, a: usize, v: f64) {
        self.row_mut(k)[a] = v;
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy(&self, k: Key) -> usize {
        let Some(row) = self.row(k) else { return 0 };
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max(&self, k: Key) -> f64 {
        self.row(k)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// One Q-learning backup. `next = None` marks a terminal transition.
    pub fn update(&mut self, k: Key, a: usize, r: f64, next: Option<Key>, alpha: f64, gamma: f64) {
        let target = r + next.map_or(0.0, |n| gamma * self.max(n));
        let q = &mut self.row_mut(k)[a];
        *q += alpha * (target - *q);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
