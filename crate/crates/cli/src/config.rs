//! Experiment configuration files (TOML).

use std::collections::BTreeMap;
use std::path::PathBuf;

use qmon_gym::envs::{EnvName, Variant};
use qmon_gym::learn::{EmaConfig, QLearnConfig};
use qmon_gym::Experiment;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Keyword selecting an environment's built-in specification list.
pub const DEFAULT_SPECS: &str = "default";

/// Completion window used when the config does not set one.
pub const DEFAULT_COMPLETION_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntry {
    pub formula: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecList {
    /// Must be [`DEFAULT_SPECS`].
    Keyword(String),
    Pairs(Vec<SpecEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub environment: EnvName,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub specs: BTreeMap<Variant, SpecList>,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default)]
    pub qlearn: QLearnConfig,
    #[serde(default)]
    pub ema: EmaConfig,
    #[serde(default = "one")]
    pub runs: usize,
    /// Run `i` trains with seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub env_seed: u64,
    /// Task completion per run is averaged over this many final episodes;
    /// 0 means the whole run.
    #[serde(default = "default_window")]
    pub completion_window: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

fn one() -> usize {
    1
}

fn default_window() -> usize {
    DEFAULT_COMPLETION_WINDOW
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn window(&self) -> Option<usize> {
        (self.completion_window > 0).then_some(self.completion_window)
    }

    /// Build the experiment, reporting every problem found rather than the
    /// first.
    pub fn experiment(&self) -> Result<Experiment, Vec<String>> {
        let mut errors = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errors.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.variants.is_empty() {
            errors.push("variants: at least one variant is required".into());
        }
        if self.runs == 0 {
            errors.push("runs: must be at least 1".into());
        }
        if !(self.zeta.is_finite() && self.zeta <= 0.0) {
            errors.push(format!("zeta: must be finite and <= 0, got {}", self.zeta));
        }
        if let Err(e) = self.qlearn.validate() {
            errors.push(format!("qlearn: {e}"));
        }
        if self.ema.span == 0 {
            errors.push("ema.span: must be at least 1".into());
        }
        let mut x = Experiment::new(self.environment);
        x.variants = self.variants.clone();
        x.zeta = self.zeta;
        x.qlearn = self.qlearn.clone();
        x.ema = self.ema.clone();
        x.runs = self.runs;
        x.seed = self.seed;
        x.env_seed = self.env_seed;
        for (&v, list) in &self.specs {
            if v == Variant::Base {
                errors.push("specs.base: the base variant takes no specifications".into());
                continue;
            }
            match list {
                SpecList::Keyword(k) if k == DEFAULT_SPECS => {}
                SpecList::Keyword(k) => errors.push(format!(
                    "specs.{v}: unknown keyword '{k}' (use \"{DEFAULT_SPECS}\" or a list)"
                )),
                SpecList::Pairs(p) => {
                    x.specs.insert(v, p.iter().map(|e| (e.formula.clone(), e.weight)).collect());
                }
            }
        }
        if errors.is_empty() {
            // Formula and atom problems, one per variant.
            for &v in &x.variants {
                if v == Variant::Base {
                    continue;
                }
                let mut single = x.clone();
                single.variants = vec![v];
                single.runs = 1;
                if let Err(e) = single.prepare() {
                    errors.push(format!("specs.{v}: {e}"));
                }
            }
        }
        if errors.is_empty() {
            Ok(x)
        } else {
            Err(errors)
        }
    }
}
