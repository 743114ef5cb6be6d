use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dataset::DataPoint;
use crate::expr::{parse, BinaryOp, ConstantPolicy};
use crate::truths::parse_truths;

fn resistance_alphabet() -> Alphabet {
    Alphabet::with_ops(["r1", "r2"], vec![], BinaryOp::ALL.to_vec(), ConstantPolicy::None).unwrap()
}

fn worked_dataset() -> Dataset {
    Dataset::from_points(
        ["r1", "r2"],
        vec![
            DataPoint::original(vec![12.0, 0.0], 0.0),
            DataPoint::original(vec![800.0, 0.0], 0.0),
        ],
    )
    .unwrap()
}

fn resistance_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let a = rng.random_range(1.0..5.0);
            let b = rng.random_range(1.0..5.0);
            DataPoint::original(vec![a, b], a * b / (a + b))
        })
        .collect();
    Dataset::from_points(["r1", "r2"], points).unwrap()
}

fn small_config(mode: Mode, seed: u64) -> RunConfig {
    RunConfig {
        mode,
        population_size: 60,
        num_generations: 8,
        seed,
        ..RunConfig::default()
    }
}

#[test]
fn worked_total_loss() {
    let names = ["r1".to_string(), "r2".to_string()];
    let truths = parse_truths("zero(r2)", &names).unwrap();
    let alphabet = resistance_alphabet();
    let candidate = parse("r1 + r2", &alphabet).unwrap();
    let loss = total_loss(&candidate, &worked_dataset(), &truths, 1.0);
    assert_eq!(loss.mse, (12.0f64 * 12.0 + 800.0 * 800.0) / 2.0);
    assert_eq!(loss.mse, 320072.0);
    assert_eq!(loss.truth_error, 800.0);
    assert_eq!(loss.total, 320872.0);
    assert_eq!(total_loss(&candidate, &worked_dataset(), &truths, 0.0).total, 320072.0);
}

#[test]
fn exact_candidate_has_zero_loss() {
    let names = ["r1".to_string(), "r2".to_string()];
    let truths = parse_truths("sz(r1, r2)\nout_le_min(r1, r2)", &names).unwrap();
    let alphabet = resistance_alphabet();
    let exact = parse("r1 * r2 / (r1 + r2)", &alphabet).unwrap();
    let loss = total_loss(&exact, &resistance_dataset(50, 1), &truths, 1.0);
    assert!(loss.mse < 1e-28, "{loss:?}");
    assert_eq!(loss.truth_error, 0.0);
}

#[test]
fn tournament_picks_lower_loss() {
    let pop = vec![Expr::var(0), Expr::var(1)];
    let config = RunConfig {
        population_size: 2,
        tournament_size: 2,
        elitism: 0,
        fresh_blood_fraction: 0.0,
        ..RunConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let pool = select(&pop, &[5.0, 1.0], &config, &mut rng);
        assert_eq!(pool, vec![Expr::var(1), Expr::var(1)]);
    }
}

#[test]
fn elite_survives_and_selection_is_seeded() {
    let pop: Vec<Expr> = (0..10).map(|i| Expr::constant(i as f64)).collect();
    let losses: Vec<f64> = (0..10).map(|i| ((i * 7) % 10) as f64).collect();
    let config = RunConfig {
        population_size: 10,
        tournament_size: 3,
        elitism: 1,
        fresh_blood_fraction: 0.0,
        ..RunConfig::default()
    };
    let a = select(&pop, &losses, &config, &mut ChaCha8Rng::seed_from_u64(9));
    let b = select(&pop, &losses, &config, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
    assert_eq!(a.len(), 10);
    assert_eq!(a[0], Expr::constant(0.0));
}

#[test]
fn equal_loss_ties_go_to_smaller_tree() {
    let big = Expr::binary(BinaryOp::Add, Expr::var(0), Expr::constant(0.0));
    let pop = vec![big, Expr::var(0)];
    let config = RunConfig {
        population_size: 2,
        tournament_size: 2,
        elitism: 1,
        fresh_blood_fraction: 0.0,
        ..RunConfig::default()
    };
    let pool = select(&pop, &[1.0, 1.0], &config, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(pool[0], Expr::var(0));
}

#[test]
fn normalized_combination_uses_medians() {
    let scores = [
        Score { mse: 1.0, truth_error: 0.0 },
        Score { mse: 2.0, truth_error: 4.0 },
        Score { mse: 4.0, truth_error: 8.0 },
    ];
    assert_eq!(combine(&scores, 1.0, true), vec![0.5, 2.0, 4.0]);
    assert_eq!(combine(&scores, 2.0, false), vec![1.0, 10.0, 20.0]);
}

#[test]
fn classic_run_leaves_dataset_unchanged() {
    let names = ["r1".to_string(), "r2".to_string()];
    let truths = parse_truths("sz(r1, r2)", &names).unwrap();
    let data = resistance_dataset(30, 2);
    let engine = Engine::new(small_config(Mode::Classic, 4)).unwrap();
    let out = engine.run(data.clone(), &truths, &resistance_alphabet()).unwrap();
    assert_eq!(out.augmented, data);
    assert!(out.reports.iter().all(|r| r.counterexamples_added == 0));
}

#[test]
fn empty_truths_match_classic_trajectory() {
    let data = resistance_dataset(30, 5);
    let alphabet = resistance_alphabet();
    let classic = Engine::new(small_config(Mode::Classic, 11)).unwrap();
    let full = Engine::new(small_config(Mode::LggaFull, 11)).unwrap();
    let a = classic.run(data.clone(), &[], &alphabet).unwrap();
    let b = full.run(data, &[], &alphabet).unwrap();
    assert_eq!(a.reports, b.reports);
    assert_eq!(a.best, b.best);
}

#[test]
fn loss_only_never_appends_and_full_with_zero_lambda_does() {
    let names = ["r1".to_string(), "r2".to_string()];
    let truths = parse_truths("sz(r1, r2)", &names).unwrap();
    let data = resistance_dataset(20, 6);
    let alphabet = resistance_alphabet();
    let loss_only = Engine::new(small_config(Mode::LggaLossOnly, 1)).unwrap();
    let out = loss_only.run(data.clone(), &truths, &alphabet).unwrap();
    assert_eq!(out.augmented.len(), data.len());

    let config = RunConfig {
        lambda_truth: 0.0,
        ..small_config(Mode::LggaFull, 1)
    };
    let out = Engine::new(config).unwrap().run(data.clone(), &truths, &alphabet).unwrap();
    assert!(out.augmented.len() > data.len());
}

#[test]
fn runs_are_deterministic_and_datasets_grow() {
    let names = ["r1".to_string(), "r2".to_string()];
    let truths = parse_truths("sz(r1, r2)\nout_le_min(r1, r2)", &names).unwrap();
    let data = resistance_dataset(20, 8);
    let alphabet = resistance_alphabet();
    let engine = Engine::new(small_config(Mode::LggaFull, 21)).unwrap();
    let a = engine.run(data.clone(), &truths, &alphabet).unwrap();
    let b = engine.run(data.clone(), &truths, &alphabet).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.augmented, b.augmented);
    let sizes: Vec<usize> = a.reports.iter().map(|r| r.dataset_size).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    assert!(sizes[0] >= data.len());
    let cap = 2 * data.len();
    assert!(a.reports.iter().all(|r| r.counterexamples_added <= cap));
}

#[test]
fn finds_a_simple_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let points = (0..40)
        .map(|_| {
            let a: f64 = rng.random_range(1.0..5.0);
            let b: f64 = rng.random_range(1.0..5.0);
            DataPoint::original(vec![a, b], a * b)
        })
        .collect();
    let data = Dataset::from_points(["a", "b"], points).unwrap();
    let alphabet = Alphabet::with_ops(["a", "b"], vec![], BinaryOp::ALL.to_vec(), ConstantPolicy::None).unwrap();
    let config = RunConfig {
        mode: Mode::Classic,
        population_size: 200,
        num_generations: 40,
        ..RunConfig::default()
    };
    let out = Engine::new(config).unwrap().run(data, &[], &alphabet).unwrap();
    assert!(out.converged(), "{:?}", out.reports.last());
}

#[test]
fn rejects_bad_inputs() {
    let engine = Engine::new(small_config(Mode::Classic, 0)).unwrap();
    let alphabet = resistance_alphabet();
    let empty = Dataset::new(["r1", "r2"]);
    assert!(matches!(engine.run(empty, &[], &alphabet), Err(EngineError::EmptyDataset)));
    let wrong = Dataset::from_points(["a"], vec![DataPoint::original(vec![1.0], 1.0)]).unwrap();
    assert!(matches!(
        engine.run(wrong, &[], &alphabet),
        Err(EngineError::ArityMismatch { .. })
    ));
    assert!(Engine::new(RunConfig { p_mutation: -0.1, ..RunConfig::default() }).is_err());
}
