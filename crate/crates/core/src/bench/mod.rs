//! Benchmark problems with known ground truth, and the experiment harnesses
//! that compare truth-guided runs against the classic baseline.

mod experiment;
mod export;
mod registry;
mod sweep;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, Oracle};
use crate::engine::{ConfigError, EngineError};
use crate::expr::{
    parse_with_names, semantically_equivalent, Alphabet, EquivalenceCheck, Expr,
};
use crate::truths::{parse_truths, AuxiliaryTruth};

pub use experiment::{experiment_classic_vs_lgga, ArmOutcome, Experiment1Config, Experiment1Result, SeedOutcome};
pub use export::{augmented_dataset, export_augmented, ExportMetadata};
pub use registry::{extended_registry, registry};
pub use sweep::{
    data_efficiency_sweep, efficiency, efficiency_csv, DataEfficiency, MinPoints, SweepConfig, SweepResult,
    SweepTrial,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown problem `{name}`; valid names: {}", valid.join(", "))]
    UnknownProblem { name: String, valid: Vec<String> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// A target equation with its sampling domain and auxiliary truths.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    /// Lowercase identifier used on the command line.
    pub slug: String,
    pub alphabet: Alphabet,
    pub ranges: Vec<(f64, f64)>,
    pub ground_truth: Expr,
    pub ground_truth_text: String,
    pub truths_dsl: String,
    pub truths: Vec<AuxiliaryTruth>,
    /// Physical constants folded into the equation, with their values.
    pub constants: Vec<(String, f64)>,
    /// Set when the truths are our own inference rather than tabulated.
    pub unverified: bool,
    evaluator: fn(&[f64]) -> f64,
}

impl BenchmarkProblem {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        slug: &str,
        alphabet: Alphabet,
        ranges: Vec<(f64, f64)>,
        equation: &str,
        evaluator: fn(&[f64]) -> f64,
        truths_dsl: &str,
        constants: Vec<(String, f64)>,
        unverified: bool,
    ) -> BenchmarkProblem {
        let ground_truth = parse_with_names(equation, &alphabet.names).expect("registry equation");
        let truths = parse_truths(truths_dsl, &alphabet.names).expect("registry truths");
        BenchmarkProblem {
            name: name.to_string(),
            slug: slug.to_string(),
            alphabet,
            ranges,
            ground_truth,
            ground_truth_text: equation.to_string(),
            truths_dsl: truths_dsl.to_string(),
            truths,
            constants,
            unverified,
            evaluator,
        }
    }

    pub fn arity(&self) -> usize {
        self.alphabet.arity()
    }

    pub fn names(&self) -> &[String] {
        &self.alphabet.names
    }

    /// Closed-form value of the target equation.
    pub fn evaluate(&self, inputs: &[f64]) -> f64 {
        (self.evaluator)(inputs)
    }

    /// `n` oracle-labelled points drawn with the given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        Dataset::sample_from_oracle(self, n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Whether `candidate` is numerically indistinguishable from the target
    /// over the sampling ranges.
    pub fn is_solved_by(&self, candidate: &Expr, check: EquivalenceCheck, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        semantically_equivalent(candidate, &self.ground_truth, &self.ranges, &mut rng, check)
            .unwrap_or(false)
    }
}

impl Oracle for BenchmarkProblem {
    fn variable_names(&self) -> &[String] {
        &self.alphabet.names
    }

    fn sampling_ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    fn label(&self, inputs: &[f64]) -> Option<f64> {
        Some(self.evaluate(inputs)).filter(|y| y.is_finite())
    }
}

/// Looks a problem up by slug or display name, ignoring case, spaces,
/// dashes and underscores. Includes the unverified problems.
pub fn problem(name: &str) -> Result<BenchmarkProblem, BenchError> {
    let key = |s: &str| {
        s.chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect::<String>()
    };
    let wanted = key(name);
    let all = extended_registry();
    let valid = all.iter().map(|p| p.slug.clone()).collect();
    all.into_iter()
        .find(|p| key(&p.slug) == wanted || key(&p.name) == wanted)
        .ok_or(BenchError::UnknownProblem {
            name: name.to_string(),
            valid,
        })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of tags into an independent stream seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(base), |acc, &t| splitmix(acc ^ splitmix(t)))
}

fn slug_tag(slug: &str) -> u64 {
    slug.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
