use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::harness::{EpisodeRecord, LevelResult};
use crate::error::{Error, Result};

/// One row of the per-level results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub state: String,
    pub score: f64,
    pub score_err: f64,
    pub final_score: f64,
    pub final_score_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub seeds: Vec<u64>,
    pub per_level: Vec<LevelSummary>,
    /// Every (level, seed) run, sorted by level then seed.
    pub runs: Vec<LevelResult>,
    pub aggregate_mean: f64,
    pub stderr_over_seeds: f64,
    pub final_aggregate_mean: f64,
    pub final_stderr_over_seeds: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation / sqrt(n)); zero
/// for a single value.
fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Averages each level over seeds, then levels together. The spread is the
/// standard error of the per-seed aggregates.
pub fn aggregate(results: &[LevelResult], seeds: &[u64]) -> Result<AggregateResult> {
    if seeds.is_empty() {
        return Err(Error::config("aggregate needs at least one seed"));
    }
    let seeds: Vec<u64> = seeds.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut cells: BTreeMap<(&str, u64), &LevelResult> = BTreeMap::new();
    for r in results {
        if !seeds.contains(&r.seed) {
            return Err(Error::config(format!(
                "result for {} uses unlisted seed {}",
                r.level, r.seed
            )));
        }
        if cells.insert((&r.level, r.seed), r).is_some() {
            return Err(Error::config(format!(
                "duplicate result for {} seed {}",
                r.level, r.seed
            )));
        }
    }
    let levels: BTreeSet<&str> = results.iter().map(|r| r.level.as_str()).collect();
    if levels.is_empty() {
        return Err(Error::config("aggregate needs at least one result"));
    }
    for &level in &levels {
        for &seed in &seeds {
            if !cells.contains_key(&(level, seed)) {
                return Err(Error::IncompleteMatrix {
                    level: level.to_string(),
                    seed,
                });
            }
        }
    }

    let mut per_level = Vec::new();
    for &level in &levels {
        let scores: Vec<f64> = seeds.iter().map(|&s| cells[&(level, s)].mean_score).collect();
        let finals: Vec<f64> = seeds.iter().map(|&s| cells[&(level, s)].final_score).collect();
        per_level.push(LevelSummary {
            state: level.to_string(),
            score: mean(&scores),
            score_err: stderr(&scores),
            final_score: mean(&finals),
            final_score_err: stderr(&finals),
        });
    }
    let per_seed = |f: fn(&LevelResult) -> f64| -> Vec<f64> {
        seeds
            .iter()
            .map(|&s| {
                let xs: Vec<f64> = levels.iter().map(|&l| f(cells[&(l, s)])).collect();
                mean(&xs)
            })
            .collect()
    };
    let seed_means = per_seed(|r| r.mean_score);
    let seed_finals = per_seed(|r| r.final_score);
    let level_scores: Vec<f64> = per_level.iter().map(|l| l.score).collect();
    let level_finals: Vec<f64> = per_level.iter().map(|l| l.final_score).collect();

    Ok(AggregateResult {
        runs: cells.values().map(|&r| r.clone()).collect(),
        seeds,
        aggregate_mean: mean(&level_scores),
        stderr_over_seeds: stderr(&seed_means),
        final_aggregate_mean: mean(&level_finals),
        final_stderr_over_seeds: stderr(&seed_finals),
        per_level,
    })
}

/// Instantaneous score: mean return of the episodes ending in each bucket
/// of `bucket` timesteps, keyed by the bucket's first timestep. Empty
/// buckets repeat the previous value; leading empty buckets are omitted.
pub fn learning_curve(episodes: &[EpisodeRecord], bucket: u64) -> Result<Vec<(u64, f64)>> {
    if bucket == 0 {
        return Err(Error::config("bucket size must be at least 1"));
    }
    let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for e in episodes {
        let b = e.end_timestep.saturating_sub(1) / bucket;
        let cell = sums.entry(b).or_default();
        cell.0 += e.total_return;
        cell.1 += 1;
    }
    let (Some(&first), Some(&last)) = (sums.keys().next(), sums.keys().next_back()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut prev = 0.0;
    for b in first..=last {
        if let Some(&(sum, n)) = sums.get(&b) {
            prev = sum / n as f64;
        }
        out.push((b * bucket, prev));
    }
    Ok(out)
}
