use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DEDUP_TOL;
use crate::expr::VariationConfig;
use crate::truths::VIOLATION_THRESHOLD;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid run config: {0}")]
pub struct ConfigError(pub String);

/// Which of the two truth-driven mechanisms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// MSE-only loss, fixed dataset.
    Classic,
    /// Truth error in the loss, fixed dataset.
    LggaLossOnly,
    /// Truth error in the loss and counterexample mining.
    LggaFull,
}

impl std::str::FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classic" => Ok(Mode::Classic),
            "lgga_loss_only" | "loss_only" => Ok(Mode::LggaLossOnly),
            "lgga_full" | "lgga" | "full" => Ok(Mode::LggaFull),
            other => Err(ConfigError(format!(
                "unknown mode `{other}` (expected classic, lgga_loss_only or lgga_full)"
            ))),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classic => "classic",
            Mode::LggaLossOnly => "lgga_loss_only",
            Mode::LggaFull => "lgga_full",
        }
    }

    pub fn uses_truth_loss(self) -> bool {
        self != Mode::Classic
    }

    pub fn augments(self) -> bool {
        self == Mode::LggaFull
    }
}

/// Hyperparameters of one run. Every field has a default, so a JSON config
/// only needs the fields it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub population_size: usize,
    pub num_generations: usize,
    pub lambda_truth: f64,
    /// Divide MSE and truth error by their population medians before
    /// weighting.
    pub normalize_loss: bool,
    /// The run stops once the best individual's MSE drops below this.
    pub epsilon_mse: f64,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub elitism: usize,
    pub fresh_blood_fraction: f64,
    pub max_depth: usize,
    pub init_depth: (usize, usize),
    pub subtree_depth: (usize, usize),
    pub mutation_weights: MutationWeights,
    pub constant_sigma: f64,
    pub violation_threshold: f64,
    pub dedup_tol: f64,
    /// Points appended per generation are capped at this multiple of the
    /// initial dataset size. Zero disables the cap.
    pub augmentation_cap_factor: usize,
    /// Stop as soon as the dataset reaches this many points.
    pub target_dataset_size: Option<usize>,
    /// Wall-clock budget for the whole run.
    pub timeout_secs: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutationWeights {
    pub subtree: f64,
    pub point: f64,
    pub constant: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        let v = VariationConfig::default();
        MutationWeights {
            subtree: v.subtree_weight,
            point: v.point_weight,
            constant: v.constant_weight,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::LggaFull,
            population_size: 300,
            num_generations: 100,
            lambda_truth: 1.0,
            normalize_loss: false,
            epsilon_mse: 1e-4,
            tournament_size: 7,
            p_crossover: 0.9,
            p_mutation: 0.1,
            elitism: 1,
            fresh_blood_fraction: 0.05,
            max_depth: 17,
            init_depth: (2, 6),
            subtree_depth: (0, 2),
            mutation_weights: MutationWeights::default(),
            constant_sigma: 0.1,
            violation_threshold: VIOLATION_THRESHOLD,
            dedup_tol: DEDUP_TOL,
            augmentation_cap_factor: 2,
            target_dataset_size: None,
            timeout_secs: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        for (name, p) in [("p_crossover", self.p_crossover), ("p_mutation", self.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is not a probability"));
            }
        }
        if self.population_size < 2 {
            return fail("population_size must be at least 2".into());
        }
        if !(0.0..1.0).contains(&self.fresh_blood_fraction) {
            return fail("fresh_blood_fraction must lie in [0, 1)".into());
        }
        if self.tournament_size == 0 {
            return fail("tournament_size must be at least 1".into());
        }
        if self.elitism + self.fresh_count() >= self.population_size {
            return fail("elitism plus fresh individuals leave no room for offspring".into());
        }
        if !(self.lambda_truth >= 0.0) || !self.lambda_truth.is_finite() {
            return fail("lambda_truth must be a finite non-negative number".into());
        }
        if !(self.epsilon_mse >= 0.0) {
            return fail("epsilon_mse must be non-negative".into());
        }
        let (lo, hi) = self.init_depth;
        if lo > hi || hi > self.max_depth {
            return fail(format!(
                "init_depth ({lo}, {hi}) must satisfy min <= max <= max_depth ({})",
                self.max_depth
            ));
        }
        if self.subtree_depth.0 > self.subtree_depth.1 {
            return fail("subtree_depth min exceeds max".into());
        }
        let w = self.mutation_weights;
        if [w.subtree, w.point, w.constant].iter().any(|x| !(*x >= 0.0))
            || w.subtree + w.point + w.constant <= 0.0
        {
            return fail("mutation weights must be non-negative and not all zero".into());
        }
        if !(self.constant_sigma >= 0.0) {
            return fail("constant_sigma must be non-negative".into());
        }
        if !(self.violation_threshold >= 0.0) || !(self.dedup_tol >= 0.0) {
            return fail("violation_threshold and dedup_tol must be non-negative".into());
        }
        if let Some(t) = self.timeout_secs {
            if !(t > 0.0) {
                return fail("timeout_secs must be positive".into());
            }
        }
        Ok(())
    }

    /// Number of random individuals injected each generation.
    pub fn fresh_count(&self) -> usize {
        (self.fresh_blood_fraction * self.population_size as f64).round() as usize
    }

    /// Weight actually applied to the truth error under the current mode.
    pub fn effective_lambda(&self) -> f64 {
        if self.mode.uses_truth_loss() {
            self.lambda_truth
        } else {
            0.0
        }
    }

    pub fn variation(&self) -> VariationConfig {
        VariationConfig {
            max_depth: self.max_depth,
            subtree_weight: self.mutation_weights.subtree,
            point_weight: self.mutation_weights.point,
            constant_weight: self.mutation_weights.constant,
            constant_sigma: self.constant_sigma,
            subtree_depth: self.subtree_depth,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
