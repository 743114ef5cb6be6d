use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{mse, Engine, Mode, RunConfig, RunResult, Termination};
use crate::expr::EquivalenceCheck;

use super::{derive_seed, slug_tag, BenchError, BenchmarkProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Experiment1Config {
    pub seeds: usize,
    pub initial_m: usize,
    /// Search settings shared by both arms; the mode is set per arm.
    /// The default uses a truth weight of 0.1.
    pub run: RunConfig,
    pub equivalence: EquivalenceCheck,
    /// Size of the held-out oracle sample used to compare final errors.
    pub test_points: usize,
    pub base_seed: u64,
}

impl Default for Experiment1Config {
    fn default() -> Self {
        Experiment1Config {
            seeds: 15,
            initial_m: 100,
            run: RunConfig {
                lambda_truth: 0.1,
                ..RunConfig::default()
            },
            equivalence: EquivalenceCheck::default(),
            test_points: 1000,
            base_seed: 0,
        }
    }
}

/// Final state of one run in one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmOutcome {
    pub expression: String,
    pub solved: bool,
    pub train_mse: f64,
    pub test_mse: f64,
    pub dataset_size: usize,
    pub generations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: usize,
    pub lgga: ArmOutcome,
    pub classic: ArmOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment1Result {
    pub problem: String,
    pub seeds: Vec<SeedOutcome>,
    pub lgga_solves: usize,
    pub classic_solves: usize,
    pub lgga_solved: bool,
    pub classic_solved: bool,
    /// Median held-out MSE of the truth-guided arm over that of the classic
    /// arm, recorded when neither arm solves.
    pub test_mse_ratio: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn outcome(
    problem: &BenchmarkProblem,
    result: &RunResult,
    config: &Experiment1Config,
    test: &crate::dataset::Dataset,
    seed: u64,
) -> ArmOutcome {
    ArmOutcome {
        expression: result.best.to_text(problem.names()),
        solved: problem.is_solved_by(&result.best, config.equivalence, seed),
        train_mse: result.best_mse,
        test_mse: mse(&result.best, test),
        dataset_size: result.augmented.len(),
        generations: result.reports.len(),
        termination: result.termination,
    }
}

fn run_seed(
    problem: &BenchmarkProblem,
    config: &Experiment1Config,
    index: usize,
) -> Result<SeedOutcome, BenchError> {
    let tag = |t: u64| derive_seed(config.base_seed, &[slug_tag(&problem.slug), index as u64, t]);
    let test = problem.sample(config.test_points.max(1), tag(4));

    let lgga = Engine::new(RunConfig {
        mode: Mode::LggaFull,
        seed: tag(1),
        ..config.run.clone()
    })?;
    let initial = problem.sample(config.initial_m, tag(0));
    let lgga_run = lgga.run(initial, &problem.truths, &problem.alphabet)?;
    let m_star = lgga_run.augmented.len();

    let classic = Engine::new(RunConfig {
        mode: Mode::Classic,
        seed: tag(3),
        ..config.run.clone()
    })?;
    let random = problem.sample(m_star, tag(2));
    let classic_run = classic.run(random, &[], &problem.alphabet)?;

    Ok(SeedOutcome {
        seed: index,
        lgga: outcome(problem, &lgga_run, config, &test, tag(5)),
        classic: outcome(problem, &classic_run, config, &test, tag(5)),
    })
}

/// For each problem and seed: a truth-guided run from `initial_m` oracle
/// points, then a classic run on a fresh oracle sample of the size the
/// guided run grew to. Results are in problem order, then seed order.
pub fn experiment_classic_vs_lgga(
    problems: &[BenchmarkProblem],
    config: &Experiment1Config,
) -> Result<Vec<Experiment1Result>, BenchError> {
    let jobs: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..config.seeds).map(move |s| (p, s)))
        .collect();
    let outcomes: Vec<SeedOutcome> = jobs
        .par_iter()
        .map(|&(p, s)| run_seed(&problems[p], config, s))
        .collect::<Result<_, _>>()?;
    let mut outcomes = outcomes.into_iter();
    Ok(problems
        .iter()
        .map(|problem| {
            let seeds: Vec<SeedOutcome> = outcomes.by_ref().take(config.seeds).collect();
            let lgga_solves = seeds.iter().filter(|s| s.lgga.solved).count();
            let classic_solves = seeds.iter().filter(|s| s.classic.solved).count();
            let test_mse_ratio = (lgga_solves == 0 && classic_solves == 0 && !seeds.is_empty())
                .then(|| {
                    let l = median(seeds.iter().map(|s| s.lgga.test_mse).collect());
                    let c = median(seeds.iter().map(|s| s.classic.test_mse).collect());
                    if c > 0.0 {
                        l / c
                    } else {
                        f64::NAN
                    }
                })
                .filter(|r| r.is_finite());
            Experiment1Result {
                problem: problem.name.clone(),
                seeds,
                lgga_solves,
                classic_solves,
                lgga_solved: lgga_solves > 0,
                classic_solved: classic_solves > 0,
                test_mse_ratio,
            }
        })
        .collect())
}
