use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::engine::{Engine, Mode, RunConfig};
use crate::expr::EquivalenceCheck;

use super::{derive_seed, slug_tag, BenchError, BenchmarkProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub trials: usize,
    pub min_points: usize,
    pub max_points: usize,
    /// Truth-guided run that grows each augmented dataset.
    pub augment: RunConfig,
    /// Share of an augmented dataset drawn from the oracle before growth.
    pub initial_fraction: f64,
    /// Classic run that tries to recover the equation from a dataset.
    pub consumer: RunConfig,
    /// Independent consumer runs per dataset; any success counts.
    pub consumer_restarts: usize,
    pub equivalence: EquivalenceCheck,
    pub base_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            trials: 5,
            min_points: 1,
            max_points: 64,
            augment: RunConfig {
                mode: Mode::LggaFull,
                num_generations: 20,
                ..RunConfig::default()
            },
            initial_fraction: 0.5,
            consumer: RunConfig {
                mode: Mode::Classic,
                timeout_secs: Some(90.0),
                ..RunConfig::default()
            },
            consumer_restarts: 4,
            equivalence: EquivalenceCheck::default(),
            base_seed: 0,
        }
    }
}

/// Smallest dataset size at which the consumer recovered the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinPoints {
    Found(usize),
    NoDisc,
}

impl MinPoints {
    pub fn found(self) -> Option<usize> {
        match self {
            MinPoints::Found(n) => Some(n),
            MinPoints::NoDisc => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrial {
    pub trial: usize,
    pub lgga: MinPoints,
    pub random: MinPoints,
    /// Sizes probed per arm, in probe order, with the outcome.
    pub lgga_probes: Vec<(usize, bool)>,
    pub random_probes: Vec<(usize, bool)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataEfficiency {
    /// Fractional reduction of the mean minimum size, in percent.
    Percent(f64),
    /// Only the augmented arm ever recovered the equation.
    Disc,
    /// The augmented arm never recovered the equation.
    NoDisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub problem: String,
    pub trials: Vec<SweepTrial>,
    pub efficiency: DataEfficiency,
}

/// `(mean, half-range)` over the trials where the arm found a size.
fn spread(values: &[usize]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<usize>() as f64 / values.len() as f64;
    let lo = *values.iter().min().expect("nonempty");
    let hi = *values.iter().max().expect("nonempty");
    Some((mean, (hi - lo) as f64 / 2.0))
}

impl SweepResult {
    fn sizes(&self, pick: impl Fn(&SweepTrial) -> MinPoints) -> Vec<usize> {
        self.trials.iter().filter_map(|t| pick(t).found()).collect()
    }

    pub fn lgga_spread(&self) -> Option<(f64, f64)> {
        spread(&self.sizes(|t| t.lgga))
    }

    pub fn random_spread(&self) -> Option<(f64, f64)> {
        spread(&self.sizes(|t| t.random))
    }

    /// Whether the augmented arm needed no more points than the random arm
    /// in every trial. A random-arm `NoDisc` counts as more points.
    pub fn lgga_never_worse(&self) -> bool {
        self.trials.iter().all(|t| match (t.lgga, t.random) {
            (MinPoints::Found(a), MinPoints::Found(b)) => a <= b,
            (MinPoints::Found(_), MinPoints::NoDisc) => true,
            (MinPoints::NoDisc, MinPoints::NoDisc) => true,
            (MinPoints::NoDisc, MinPoints::Found(_)) => false,
        })
    }

    fn compute_efficiency(&mut self) {
        self.efficiency = match (self.lgga_spread(), self.random_spread()) {
            (None, _) => DataEfficiency::NoDisc,
            (Some(_), None) => DataEfficiency::Disc,
            (Some((l, _)), Some((r, _))) => DataEfficiency::Percent(100.0 * (r - l) / r),
        };
    }
}

/// Data-efficiency percentage for one pair of minimum sizes.
pub fn efficiency(lgga: usize, random: usize) -> f64 {
    100.0 * (random as f64 - lgga as f64) / random as f64
}

fn consumer_solves(
    problem: &BenchmarkProblem,
    data: Dataset,
    config: &SweepConfig,
    seed: u64,
) -> Result<bool, BenchError> {
    for restart in 0..config.consumer_restarts.max(1) {
        let run_seed = derive_seed(seed, &[restart as u64]);
        let engine = Engine::new(RunConfig {
            mode: Mode::Classic,
            seed: run_seed,
            ..config.consumer.clone()
        })?;
        let result = engine.run(data.clone(), &[], &problem.alphabet)?;
        if problem.is_solved_by(&result.best, config.equivalence, run_seed ^ 0x5eed) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// An augmented dataset of exactly `size` points. Starts from a share of
/// oracle points and grows it; if growth stalls short of `size`, retries
/// from more oracle points.
fn augmented_of_size(
    problem: &BenchmarkProblem,
    size: usize,
    config: &SweepConfig,
    seed: u64,
) -> Result<Dataset, BenchError> {
    let mut initial = ((size as f64 * config.initial_fraction).ceil() as usize).clamp(1, size);
    loop {
        let data = problem.sample(initial, derive_seed(seed, &[initial as u64]));
        if initial >= size {
            return Ok(data);
        }
        let engine = Engine::new(RunConfig {
            mode: Mode::LggaFull,
            target_dataset_size: Some(size),
            seed: derive_seed(seed, &[initial as u64, 1]),
            ..config.augment.clone()
        })?;
        let mut grown = engine.run(data, &problem.truths, &problem.alphabet)?.augmented;
        if grown.len() >= size {
            grown.truncate(size);
            return Ok(grown);
        }
        initial += size - grown.len();
    }
}

/// Smallest size in `[lo, hi]` that solves, assuming solving is monotone
/// in size: check `hi`, halve while solving, then bisect the bracket.
/// The answer solves and the size one below it does not (or is `lo`).
fn minimum_size(
    lo: usize,
    hi: usize,
    mut solves: impl FnMut(usize) -> Result<bool, BenchError>,
) -> Result<MinPoints, BenchError> {
    if !solves(hi)? {
        return Ok(MinPoints::NoDisc);
    }
    let mut good = hi;
    let mut bad = None;
    while good > lo {
        let next = (good / 2).max(lo);
        if solves(next)? {
            good = next;
        } else {
            bad = Some(next);
            break;
        }
    }
    let Some(mut bad) = bad else {
        return Ok(MinPoints::Found(good));
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if solves(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(MinPoints::Found(good))
}

fn run_trial(
    problem: &BenchmarkProblem,
    config: &SweepConfig,
    trial: usize,
) -> Result<SweepTrial, BenchError> {
    let base = derive_seed(config.base_seed, &[slug_tag(&problem.slug), trial as u64]);
    let consumer_seed = derive_seed(base, &[7]);
    let lo = config.min_points.max(1);
    let hi = config.max_points.max(lo);

    let mut lgga_probes = Vec::new();
    let mut cache = HashMap::new();
    let lgga = minimum_size(lo, hi, |s| {
        if let Some(&hit) = cache.get(&s) {
            return Ok(hit);
        }
        let data = augmented_of_size(problem, s, config, derive_seed(base, &[1, s as u64]))?;
        let hit = consumer_solves(problem, data, config, consumer_seed)?;
        cache.insert(s, hit);
        lgga_probes.push((s, hit));
        Ok(hit)
    })?;

    let mut random_probes = Vec::new();
    let mut cache = HashMap::new();
    let random = minimum_size(lo, hi, |s| {
        if let Some(&hit) = cache.get(&s) {
            return Ok(hit);
        }
        let data = problem.sample(s, derive_seed(base, &[2, s as u64]));
        let hit = consumer_solves(problem, data, config, consumer_seed)?;
        cache.insert(s, hit);
        random_probes.push((s, hit));
        Ok(hit)
    })?;

    Ok(SweepTrial {
        trial,
        lgga,
        random,
        lgga_probes,
        random_probes,
    })
}

/// Minimum augmented and random dataset sizes at which the classic consumer
/// recovers the equation, over `config.trials` independent trials.
pub fn data_efficiency_sweep(
    problem: &BenchmarkProblem,
    config: &SweepConfig,
) -> Result<SweepResult, BenchError> {
    use rayon::prelude::*;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(problem, config, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut result = SweepResult {
        problem: problem.name.clone(),
        trials,
        efficiency: DataEfficiency::NoDisc,
    };
    result.compute_efficiency();
    Ok(result)
}

fn cell(spread: Option<(f64, f64)>) -> String {
    match spread {
        Some((mean, half)) => format!("{}±{}", fmt_num(mean), fmt_num(half)),
        None => "NoDisc".to_string(),
    }
}

fn fmt_num(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.1}")
    }
}

/// CSV with one row per problem: minimum points with and without
/// augmentation as `mean±half-range`, and the efficiency gain.
pub fn efficiency_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("equation,LGGA,No LGGA,DE %\n");
    for r in results {
        let de = match r.efficiency {
            DataEfficiency::Percent(p) => format!("{p:.1}"),
            DataEfficiency::Disc => "Disc".to_string(),
            DataEfficiency::NoDisc => "NoDisc".to_string(),
        };
        writeln!(out, "{},{},{},{}", r.problem, cell(r.lgga_spread()), cell(r.random_spread()), de)
            .expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problem;

    #[test]
    fn efficiency_formula() {
        assert_eq!(efficiency(1, 1), 0.0);
        assert_eq!(efficiency(8, 20), 60.0);
    }

    #[test]
    fn bisection_finds_threshold() {
        for threshold in 1..=40 {
            let mut calls = 0;
            let found = minimum_size(1, 40, |s| {
                calls += 1;
                Ok(s >= threshold)
            })
            .unwrap();
            assert_eq!(found, MinPoints::Found(threshold));
            assert!(calls <= 14, "{calls}");
        }
        assert_eq!(minimum_size(1, 40, |_| Ok(false)).unwrap(), MinPoints::NoDisc);
        assert_eq!(minimum_size(3, 3, |_| Ok(true)).unwrap(), MinPoints::Found(3));
    }

    #[test]
    fn augmented_datasets_have_the_requested_size() {
        let gas = problem("gas").unwrap();
        let config = SweepConfig {
            augment: RunConfig {
                population_size: 40,
                num_generations: 3,
                ..SweepConfig::default().augment
            },
            ..SweepConfig::default()
        };
        for size in [1, 2, 5, 17] {
            let d = augmented_of_size(&gas, size, &config, 9).unwrap();
            assert_eq!(d.len(), size);
            assert!(d.count_original() >= 1);
        }
    }

    #[test]
    fn unsolvable_target_gives_nodisc() {
        let normal = problem("normal").unwrap();
        let config = SweepConfig {
            trials: 1,
            max_points: 2,
            augment: RunConfig {
                population_size: 20,
                num_generations: 2,
                ..SweepConfig::default().augment
            },
            consumer: RunConfig {
                mode: Mode::Classic,
                population_size: 20,
                num_generations: 2,
                ..RunConfig::default()
            },
            ..SweepConfig::default()
        };
        let r = data_efficiency_sweep(&normal, &config).unwrap();
        assert_eq!(r.trials[0].lgga, MinPoints::NoDisc);
        assert_eq!(r.trials[0].random, MinPoints::NoDisc);
        assert_eq!(r.efficiency, DataEfficiency::NoDisc);
        assert!(efficiency_csv(&[r]).ends_with("Normal,NoDisc,NoDisc,NoDisc\n"));
    }

    #[test]
    fn table_cells() {
        let t = |trial, l, r| SweepTrial {
            trial,
            lgga: l,
            random: r,
            lgga_probes: vec![],
            random_probes: vec![],
        };
        let mut r = SweepResult {
            problem: "Resistance".into(),
            trials: vec![
                t(0, MinPoints::Found(6), MinPoints::Found(19)),
                t(1, MinPoints::Found(10), MinPoints::Found(23)),
            ],
            efficiency: DataEfficiency::NoDisc,
        };
        r.compute_efficiency();
        assert!(r.lgga_never_worse());
        assert_eq!(efficiency_csv(&[r]), "equation,LGGA,No LGGA,DE %\nResistance,8±2,21±2,61.9\n");
    }
}
