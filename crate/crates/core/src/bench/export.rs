use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{CsvOptions, Dataset};
use crate::engine::{Engine, Mode, RunConfig, RunResult, Termination};

use super::{derive_seed, BenchError, BenchmarkProblem};

/// Sidecar record written next to an exported dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMetadata {
    pub problem: String,
    pub ground_truth: String,
    pub truths: Vec<String>,
    pub initial_size: usize,
    pub final_size: usize,
    pub generated: usize,
    pub best_expression: String,
    pub best_mse: f64,
    pub generations: usize,
    pub termination: Termination,
    pub config: RunConfig,
}

/// Runs truth-guided augmentation from `initial_m` oracle points. The
/// oracle sample and the search both derive from `config.seed`.
pub fn augmented_dataset(
    problem: &BenchmarkProblem,
    initial_m: usize,
    config: &RunConfig,
) -> Result<RunResult, BenchError> {
    let config = RunConfig {
        mode: Mode::LggaFull,
        ..config.clone()
    };
    let engine = Engine::new(config)?;
    let data = problem.sample(initial_m, derive_seed(engine.config().seed, &[0xda7a]));
    Ok(engine.run(data, &problem.truths, &problem.alphabet)?)
}

/// Writes the augmented dataset to `path` and its metadata to `path` with a
/// `.json` extension. Returns the metadata.
pub fn export_augmented(
    problem: &BenchmarkProblem,
    initial_m: usize,
    config: &RunConfig,
    path: impl AsRef<Path>,
    options: CsvOptions,
) -> Result<ExportMetadata, BenchError> {
    let path = path.as_ref();
    let result = augmented_dataset(problem, initial_m, config)?;
    let data: &Dataset = &result.augmented;
    data.save_csv(path, options)?;
    let metadata = ExportMetadata {
        problem: problem.name.clone(),
        ground_truth: problem.ground_truth_text.clone(),
        truths: problem.truths.iter().map(|t| t.id.clone()).collect(),
        initial_size: initial_m,
        final_size: data.len(),
        generated: data.count_generated(),
        best_expression: result.best.to_text(problem.names()),
        best_mse: result.best_mse,
        generations: result.reports.len(),
        termination: result.termination,
        config: RunConfig {
            mode: Mode::LggaFull,
            ..config.clone()
        },
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&metadata)? + "\n")?;
    Ok(metadata)
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problem;

    fn quick() -> RunConfig {
        RunConfig {
            population_size: 60,
            num_generations: 5,
            seed: 3,
            ..RunConfig::default()
        }
    }

    #[test]
    fn gas_export_is_sound_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let gas = problem("gas").unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let meta = export_augmented(&gas, 6, &quick(), &a, CsvOptions::default()).unwrap();
        export_augmented(&gas, 6, &quick(), &b, CsvOptions::default()).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(
            std::fs::read(a.with_extension("json")).unwrap(),
            std::fs::read(b.with_extension("json")).unwrap()
        );
        let data = Dataset::load_csv(&a).unwrap();
        assert!(data.len() >= 6);
        assert_eq!(meta.final_size, data.len());
        for p in data.points() {
            let (pr, v, n, t) = (p.inputs[0], p.inputs[1], p.inputs[2], p.inputs[3]);
            if n * t != 0.0 {
                assert!((p.label * n * t - pr * v).abs() <= 1e-9 * (1.0 + (pr * v).abs()));
            } else {
                assert_eq!(p.label, 0.0);
            }
        }
    }

    #[test]
    fn stripped_export_has_arity_plus_one_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let r = problem("resistance").unwrap();
        export_augmented(&r, 10, &quick(), &path, CsvOptions { strip_provenance: true }).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 3, "{line}");
        }
    }
}
