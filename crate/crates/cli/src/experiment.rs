//! Factor-rate experiments over a grid of minimum-degree vectors.

use anyhow::{bail, ensure, Result};
use ckblowup::exact::{max_tiling, Budget};
use ckblowup::generators::random_min_degree;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Inclusive grid `from ..= to` with a common step on every coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub step: usize,
}

impl GridSpec {
    pub fn points(&self, k: usize, n: usize) -> Result<Vec<Vec<usize>>> {
        ensure!(self.step >= 1, "grid step must be positive");
        ensure!(
            self.from.len() == k && self.to.len() == k,
            "grid corners need {k} coordinates, got {} and {}",
            self.from.len(),
            self.to.len()
        );
        for (a, b) in self.from.iter().zip(&self.to) {
            ensure!(
                a <= b && *b <= n,
                "grid coordinates must satisfy from <= to <= n, got {a}..{b} with n = {n}"
            );
        }
        let mut points = vec![Vec::new()];
        for (a, b) in self.from.iter().zip(&self.to) {
            let axis: Vec<usize> = (*a..=*b).step_by(self.step).collect();
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&d| {
                        let mut q = p.clone();
                        q.push(d);
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Per-trial budget for the exact tiler.
    pub budget_ms: u64,
    /// Refuse grids needing more than this many tiler runs.
    pub max_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub k: usize,
    pub n: usize,
    pub deltas: Vec<usize>,
    pub trials: usize,
    pub factor_rate: f64,
    pub mean_size: f64,
    pub mean_millis: f64,
    /// Trials whose search hit the budget before proving optimality.
    pub unproven: usize,
}

struct Trial {
    point: usize,
    factor: bool,
    size: usize,
    millis: u64,
    optimal: bool,
}

/// Samples `trials` graphs per grid point (trial `t` uses seed `seed + t`)
/// and runs the exact maximum tiling on each. Rows come back sorted by the
/// degree vector.
pub fn run(config: &ExperimentConfig, grid: &GridSpec) -> Result<Vec<Row>> {
    let points = grid.points(config.k, config.n)?;
    let runs = points.len() * config.trials;
    if runs > config.max_runs {
        bail!(
            "grid needs {runs} tiler runs ({} points x {} trials), up to {} s at the per-trial budget; limit is {}",
            points.len(),
            config.trials,
            runs as u64 * config.budget_ms / 1000,
            config.max_runs
        );
    }
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let trials: Vec<Trial> = jobs
        .par_iter()
        .map(|&(p, t)| -> Result<Trial> {
            let g = random_min_degree(config.k, config.n, &points[p], config.seed + t as u64)?;
            let r = max_tiling(&g, Budget::millis(config.budget_ms));
            Ok(Trial {
                point: p,
                factor: r.size == config.n,
                size: r.size,
                millis: r.millis,
                optimal: r.optimal,
            })
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<Row> = points
        .iter()
        .enumerate()
        .map(|(p, deltas)| {
            let mine: Vec<&Trial> = trials.iter().filter(|t| t.point == p).collect();
            let count = mine.len().max(1) as f64;
            Row {
                k: config.k,
                n: config.n,
                deltas: deltas.clone(),
                trials: mine.len(),
                factor_rate: mine.iter().filter(|t| t.factor).count() as f64 / count,
                mean_size: mine.iter().map(|t| t.size as f64).sum::<f64>() / count,
                mean_millis: mine.iter().map(|t| t.millis as f64).sum::<f64>() / count,
                unproven: mine.iter().filter(|t| !t.optimal && !t.factor).count(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.deltas.cmp(&b.deltas));
    Ok(rows)
}

/// CSV with columns `k,n,delta_1..delta_k,trials,factor_rate,mean_size,mean_millis`.
pub fn write_csv<W: Write>(rows: &[Row], k: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "n".to_string()];
    header.extend((1..=k).map(|i| format!("delta_{i}")));
    header.extend(["trials", "factor_rate", "mean_size", "mean_millis"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.k.to_string(), r.n.to_string()];
        rec.extend(r.deltas.iter().map(|d| d.to_string()));
        rec.push(r.trials.to_string());
        rec.push(format!("{:.4}", r.factor_rate));
        rec.push(format!("{:.4}", r.mean_size));
        rec.push(format!("{:.3}", r.mean_millis));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
