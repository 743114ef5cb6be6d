use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::expr::Expr;
use crate::truths::{AuxiliaryTruth, TruthProbes};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub mse: f64,
    pub truth_error: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    pub mse: f64,
    pub truth_error: f64,
}

fn mean_squared(outputs: &[f64], labels: &[f64]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let sum: f64 = outputs
        .iter()
        .zip(labels)
        .map(|(f, y)| (f - y) * (f - y) / n)
        .sum();
    if sum.is_finite() {
        sum
    } else {
        f64::MAX
    }
}

/// Mean squared error of `candidate` over the dataset; 0 when empty.
pub fn mse(candidate: &Expr, dataset: &Dataset) -> f64 {
    let outputs = candidate.compile().eval_columns(&dataset.columns(), dataset.len());
    mean_squared(&outputs, &dataset.labels())
}

/// `mse + lambda * truth_error` with both terms reported.
pub fn total_loss(
    candidate: &Expr,
    dataset: &Dataset,
    truths: &[AuxiliaryTruth],
    lambda: f64,
) -> LossBreakdown {
    let mse = mse(candidate, dataset);
    let truth_error = crate::truths::truth_error(truths, candidate, dataset);
    LossBreakdown {
        mse,
        truth_error,
        total: mse + lambda * truth_error,
    }
}

fn score_one(
    expr: &Expr,
    columns: &[Vec<f64>],
    labels: &[f64],
    probes: Option<&TruthProbes>,
) -> Score {
    let compiled = expr.compile();
    let outputs = compiled.eval_columns(columns, labels.len());
    Score {
        mse: mean_squared(&outputs, labels),
        truth_error: probes.map_or(0.0, |p| p.truth_error(&compiled, &outputs)),
    }
}

/// Scores every individual, evaluating each distinct tree once. Output order
/// matches `population` regardless of thread scheduling.
pub(crate) fn score_population(
    population: &[Expr],
    columns: &[Vec<f64>],
    labels: &[f64],
    probes: Option<&TruthProbes>,
) -> Vec<Score> {
    let mut slot: HashMap<&Expr, usize> = HashMap::new();
    let mut unique: Vec<&Expr> = Vec::new();
    let index: Vec<usize> = population
        .iter()
        .map(|e| {
            *slot.entry(e).or_insert_with(|| {
                unique.push(e);
                unique.len() - 1
            })
        })
        .collect();
    let scores: Vec<Score> = unique
        .par_iter()
        .map(|e| score_one(e, columns, labels, probes))
        .collect();
    index.into_iter().map(|i| scores[i]).collect()
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Total loss per individual. With `normalize`, each term is divided by its
/// population median when that median is positive.
pub(crate) fn combine(scores: &[Score], lambda: f64, normalize: bool) -> Vec<f64> {
    let (mse_scale, te_scale) = if normalize {
        let positive = |m: f64| if m > 0.0 && m.is_finite() { m } else { 1.0 };
        (
            positive(median(scores.iter().map(|s| s.mse))),
            positive(median(scores.iter().map(|s| s.truth_error))),
        )
    } else {
        (1.0, 1.0)
    };
    scores
        .iter()
        .map(|s| s.mse / mse_scale + lambda * s.truth_error / te_scale)
        .collect()
}
