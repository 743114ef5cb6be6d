//! The evolutionary loop: weighted loss, tournament selection, variation,
//! and counterexample mining from the best individual.

mod config;
mod fitness;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::expr::{crossover, mutate, ramped_half_and_half, Alphabet, Expr, ExprError};
use crate::truths::{AuxiliaryTruth, TruthProbes, TruthsError};

pub use config::{ConfigError, Mode, MutationWeights, RunConfig};
pub use fitness::{mse, total_loss, LossBreakdown};

use fitness::{combine, score_population, Score};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("the dataset is empty")]
    EmptyDataset,
    #[error("dataset has {dataset} variables but the alphabet has {alphabet}")]
    ArityMismatch { dataset: usize, alphabet: usize },
    #[error(transparent)]
    Alphabet(#[from] ExprError),
    #[error(transparent)]
    Truths(#[from] TruthsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Telemetry for one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    pub best_expression: String,
    pub best_mse: f64,
    pub best_truth_error: f64,
    pub total_loss: f64,
    pub best_complexity: usize,
    /// Size after this generation's counterexamples were appended.
    pub dataset_size: usize,
    pub counterexamples_added: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    GenerationLimit,
    TargetSize,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Expr,
    pub best_mse: f64,
    pub best_truth_error: f64,
    pub augmented: Dataset,
    pub reports: Vec<GenerationReport>,
    pub termination: Termination,
}

impl RunResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Ranking key: loss, then size, then position.
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .is_lt()
}

fn ranked(population: &[Expr], losses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&i, &j| {
        losses[i]
            .total_cmp(&losses[j])
            .then(population[i].complexity().cmp(&population[j].complexity()))
            .then(i.cmp(&j))
    });
    order
}

/// Parent pool of `population_size - fresh_count` individuals: the
/// `elitism` best first, then tournament winners. Entrants are distinct
/// when the tournament fits in the population. Ties on loss go to the
/// smaller tree.
pub fn select<R: Rng + ?Sized>(
    population: &[Expr],
    losses: &[f64],
    config: &RunConfig,
    rng: &mut R,
) -> Vec<Expr> {
    assert_eq!(population.len(), losses.len(), "one loss per individual");
    assert!(!population.is_empty(), "empty population");
    let size = config.population_size.saturating_sub(config.fresh_count());
    let elites = config.elitism.min(size).min(population.len());
    let mut pool: Vec<Expr> = ranked(population, losses)[..elites]
        .iter()
        .map(|&i| population[i].clone())
        .collect();
    let key = |i: usize| (losses[i], population[i].complexity(), i);
    let n = population.len();
    let k = config.tournament_size;
    while pool.len() < size {
        let entrants: Vec<usize> = if k <= n {
            rand::seq::index::sample(rng, n, k).into_vec()
        } else {
            (0..k).map(|_| rng.random_range(0..n)).collect()
        };
        let winner = entrants
            .into_iter()
            .reduce(|a, b| if better(key(b), key(a)) { b } else { a })
            .expect("tournament size is at least 1");
        pool.push(population[winner].clone());
    }
    pool
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Engine {
    config: RunConfig,
}

impl Engine {
    pub fn new(config: RunConfig) -> Result<Engine, ConfigError> {
        config.validate()?;
        Ok(Engine { config })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Runs with an RNG seeded from the config.
    pub fn run(
        &self,
        dataset: Dataset,
        truths: &[AuxiliaryTruth],
        alphabet: &Alphabet,
    ) -> Result<RunResult, EngineError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        self.run_observed(dataset, truths, alphabet, &mut rng, |_| {})
    }

    /// Runs with the given RNG, calling `observer` after every generation.
    pub fn run_observed<R: Rng + ?Sized>(
        &self,
        mut dataset: Dataset,
        truths: &[AuxiliaryTruth],
        alphabet: &Alphabet,
        rng: &mut R,
        mut observer: impl FnMut(&GenerationReport),
    ) -> Result<RunResult, EngineError> {
        let config = &self.config;
        let start = Instant::now();
        alphabet.validate()?;
        if dataset.is_empty() {
            return Err(EngineError::EmptyDataset);
        }
        if dataset.arity() != alphabet.arity() {
            return Err(EngineError::ArityMismatch {
                dataset: dataset.arity(),
                alphabet: alphabet.arity(),
            });
        }
        for t in truths {
            t.validate(dataset.arity())?;
        }
        let lambda = config.effective_lambda();
        let mine = config.mode.augments() && truths.iter().any(|t| t.is_generative());
        let cap = match config.augmentation_cap_factor {
            0 => usize::MAX,
            k => k.saturating_mul(dataset.len()),
        };
        let variation = config.variation();
        let fresh = config.fresh_count();

        let mut population: Vec<Expr> = (0..config.population_size)
            .map(|_| ramped_half_and_half(alphabet, config.init_depth, rng))
            .collect();
        let mut reports = Vec::new();
        let mut generation = 0;
        loop {
            let columns = dataset.columns();
            let labels = dataset.labels();
            let probes = (lambda > 0.0 && !truths.is_empty())
                .then(|| TruthProbes::new(truths, &dataset));
            let scores = score_population(&population, &columns, &labels, probes.as_ref());
            let losses = combine(&scores, lambda, config.normalize_loss);
            let pool = select(&population, &losses, config, rng);
            let best_index = ranked(&population, &losses)[0];
            let best = population[best_index].clone();
            let Score { mse: best_mse, .. } = scores[best_index];
            let best_truth_error = match &probes {
                Some(_) => scores[best_index].truth_error,
                None => crate::truths::truth_error(truths, &best, &dataset),
            };

            let added = if mine {
                mine_counterexamples(&mut dataset, truths, &best, config, generation, cap)?
            } else {
                0
            };
            let report = GenerationReport {
                generation,
                best_expression: best.to_text(alphabet.names.as_slice()),
                best_mse,
                best_truth_error,
                total_loss: best_mse + lambda * best_truth_error,
                best_complexity: best.complexity(),
                dataset_size: dataset.len(),
                counterexamples_added: added,
            };
            observer(&report);
            reports.push(report);

            let termination = if best_mse < config.epsilon_mse {
                Some(Termination::Converged)
            } else if config
                .target_dataset_size
                .is_some_and(|target| dataset.len() >= target)
            {
                Some(Termination::TargetSize)
            } else if generation + 1 >= config.num_generations {
                Some(Termination::GenerationLimit)
            } else if config
                .timeout_secs
                .is_some_and(|t| start.elapsed().as_secs_f64() >= t)
            {
                Some(Termination::Timeout)
            } else {
                None
            };
            if let Some(termination) = termination {
                return Ok(RunResult {
                    best,
                    best_mse,
                    best_truth_error,
                    augmented: dataset,
                    reports,
                    termination,
                });
            }

            let elites = config.elitism.min(pool.len());
            let mut offspring: Vec<Expr> = pool[elites..].to_vec();
            for i in (1..offspring.len()).step_by(2) {
                if rng.random_bool(config.p_crossover) {
                    let (a, b) = crossover(&offspring[i - 1], &offspring[i], rng, &variation);
                    offspring[i - 1] = a;
                    offspring[i] = b;
                }
            }
            for child in offspring.iter_mut() {
                if rng.random_bool(config.p_mutation) {
                    *child = mutate(child, alphabet, rng, &variation);
                }
            }
            population = pool[..elites].to_vec();
            population.append(&mut offspring);
            population.extend((0..fresh).map(|_| ramped_half_and_half(alphabet, config.init_depth, rng)));
            generation += 1;
        }
    }
}

/// Appends counterexamples for `best` over every point present at the start
/// of the generation, in dataset order, stopping after `cap` new points.
fn mine_counterexamples(
    dataset: &mut Dataset,
    truths: &[AuxiliaryTruth],
    best: &Expr,
    config: &RunConfig,
    generation: usize,
    cap: usize,
) -> Result<usize, EngineError> {
    let snapshot = dataset.len();
    let mut added = 0;
    let mut buffer = Vec::new();
    for i in 0..snapshot {
        if added >= cap {
            break;
        }
        let point = dataset.points()[i].clone();
        for t in truths {
            buffer.extend(t.generate_counterexamples(
                best,
                &point,
                config.violation_threshold,
                generation,
            )?);
        }
        if buffer.len() >= cap - added || i + 1 == snapshot {
            added += dataset.append_dedup_limited(
                std::mem::take(&mut buffer),
                config.dedup_tol,
                cap - added,
            )?;
        }
    }
    Ok(added)
}

/// Convenience wrapper over [`Engine::run_observed`] with a caller-owned RNG.
pub fn run<R: Rng + ?Sized>(
    dataset: Dataset,
    truths: &[AuxiliaryTruth],
    alphabet: &Alphabet,
    config: &RunConfig,
    rng: &mut R,
) -> Result<RunResult, EngineError> {
    Engine::new(config.clone())?.run_observed(dataset, truths, alphabet, rng, |_| {})
}

#[cfg(test)]
mod tests;
