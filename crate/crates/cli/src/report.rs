//! CSV outputs of an experiment and the summary recomputed from them.
//!
//! Layout under the output directory:
//! - `runs/<variant>_<run>.csv`: one row per episode, [`EPISODE_COLUMNS`].
//! - `runs.csv`: one row per run, [`RUN_COLUMNS`].
//! - `summary.csv`: one row per variant, [`SUMMARY_COLUMNS`].

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qmon_gym::envs::{EnvName, Variant};
use qmon_gym::experiment::summarize;
use qmon_gym::learn::{EmaConfig, EmaConvergence, RunResult};
use qmon_gym::SummaryRow;
use serde::{Deserialize, Serialize};

pub const EPISODE_COLUMNS: [&str; 5] = ["episode", "return", "task_completion", "epsilon", "steps"];
pub const RUN_COLUMNS: [&str; 7] = [
    "variant",
    "run",
    "seed",
    "convergence_episode",
    "convergence_secs",
    "completion",
    "monitor_states",
];
pub const SUMMARY_COLUMNS: [&str; 9] = [
    "env",
    "variant",
    "runs",
    "converged_runs",
    "mean_convergence_episode",
    "mean_convergence_secs",
    "completion_mean",
    "completion_ci",
    "suboptimal",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    /// 1-based.
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub task_completion: f64,
    pub epsilon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub variant: Variant,
    pub run: usize,
    pub seed: u64,
    pub convergence_episode: Option<usize>,
    pub convergence_secs: Option<f64>,
    pub completion: Option<f64>,
    pub monitor_states: usize,
}

pub fn episode_file(dir: &Path, variant: Variant, run: usize) -> PathBuf {
    dir.join("runs").join(format!("{variant}_{run:03}.csv"))
}

pub fn episode_rows(r: &RunResult) -> Vec<EpisodeRow> {
    (0..r.episodes())
        .map(|e| EpisodeRow {
            episode: e + 1,
            ret: r.returns[e],
            task_completion: r.task_completion[e],
            epsilon: r.epsilon[e],
            steps: r.steps[e],
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    // Written by hand so that empty files still carry the header.
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let got: Vec<&str> = r.headers()?.iter().collect();
    if got != header {
        bail!("{}: columns {got:?}, expected {header:?}", path.display());
    }
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// Write every CSV for `results`, which must be ordered by variant then run
/// as [`qmon_gym::Experiment::run`] returns them.
pub fn write_all(dir: &Path, env: EnvName, results: &[RunResult], window: Option<usize>) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir.join("runs")).with_context(|| format!("creating {}", dir.display()))?;
    let mut runs = Vec::with_capacity(results.len());
    let mut counter: Vec<(Variant, usize)> = Vec::new();
    for r in results {
        let i = match counter.iter_mut().find(|(v, _)| *v == r.variant) {
            Some((_, n)) => {
                *n += 1;
                *n - 1
            }
            None => {
                counter.push((r.variant, 1));
                0
            }
        };
        write_rows(&episode_file(dir, r.variant, i), &EPISODE_COLUMNS, &episode_rows(r))?;
        runs.push(RunRow {
            variant: r.variant,
            run: i,
            seed: r.seed,
            convergence_episode: r.convergence_episode,
            convergence_secs: r.convergence_secs,
            completion: r.mean_completion(window),
            monitor_states: r.monitor_states,
        });
    }
    write_rows(&dir.join("runs.csv"), &RUN_COLUMNS, &runs)?;
    let summary = summarize(env, results, window);
    write_rows(&dir.join("summary.csv"), &SUMMARY_COLUMNS, &summary)?;
    Ok(summary)
}

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRow>> {
    read_rows(path, &EPISODE_COLUMNS)
}

pub fn read_runs(dir: &Path) -> Result<Vec<RunRow>> {
    read_rows(&dir.join("runs.csv"), &RUN_COLUMNS)
}

pub fn read_summary(dir: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(&dir.join("summary.csv"), &SUMMARY_COLUMNS)
}

/// Rebuild the summary from the per-episode files alone, except for wall
/// clock times, which come from `runs.csv`. Convergence episodes are
/// recomputed by replaying the returns through the detector.
pub fn recompute_summary(dir: &Path, env: EnvName, ema: &EmaConfig, window: Option<usize>) -> Result<Vec<SummaryRow>> {
    let runs = read_runs(dir)?;
    let mut results = Vec::with_capacity(runs.len());
    for r in &runs {
        let rows = read_episodes(&episode_file(dir, r.variant, r.run))?;
        let mut det = EmaConvergence::new(ema.clone());
        let mut conv = None;
        for row in &rows {
            conv = det.push(row.ret);
        }
        results.push(RunResult {
            variant: r.variant,
            seed: r.seed,
            returns: rows.iter().map(|x| x.ret).collect(),
            task_completion: rows.iter().map(|x| x.task_completion).collect(),
            epsilon: rows.iter().map(|x| x.epsilon).collect(),
            steps: rows.iter().map(|x| x.steps).collect(),
            convergence_episode: conv,
            convergence_secs: conv.and(r.convergence_secs),
            monitor_states: r.monitor_states,
        });
    }
    Ok(summarize(env, &results, window))
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "None".into(), |v| format!("{v:.digits$}"))
}

/// Human-readable convergence table.
pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<18} {:<13} {:>5} {:>9} {:>12} {:>10} {:>20}\n",
        "env", "variant", "runs", "converged", "conv. ep.", "conv. s", "completion (%)"
    );
    for r in rows {
        let comp = format!(
            "{:.2} ± {:.2}{}",
            100.0 * r.completion_mean,
            100.0 * r.completion_ci,
            if r.suboptimal { " *" } else { "" }
        );
        out.push_str(&format!(
            "{:<18} {:<13} {:>5} {:>9} {:>12} {:>10} {:>20}\n",
            r.env.as_str(),
            r.variant.as_str(),
            r.runs,
            r.converged_runs,
            opt(r.mean_convergence_episode, 1),
            opt(r.mean_convergence_secs, 4),
            comp
        ));
    }
    out
}
