use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::random::{random_expr, random_leaf};
use super::{Alphabet, Expr, InitMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    SubtreeReplace,
    PointOpSwap,
    ConstantPerturb,
}

/// Knobs shared by [`mutate`] and [`crossover`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationConfig {
    pub max_depth: usize,
    pub subtree_weight: f64,
    pub point_weight: f64,
    pub constant_weight: f64,
    /// Standard deviation of the gaussian nudge applied to a constant.
    pub constant_sigma: f64,
    /// Height range of subtrees grown by subtree-replace mutation.
    pub subtree_depth: (usize, usize),
}

impl Default for VariationConfig {
    fn default() -> Self {
        VariationConfig {
            max_depth: 17,
            subtree_weight: 0.5,
            point_weight: 0.3,
            constant_weight: 0.2,
            constant_sigma: 0.1,
            subtree_depth: (0, 2),
        }
    }
}

impl VariationConfig {
    fn pick_kind<R: Rng + ?Sized>(&self, rng: &mut R) -> MutationKind {
        let total = self.subtree_weight + self.point_weight + self.constant_weight;
        if total <= 0.0 {
            return MutationKind::SubtreeReplace;
        }
        let u = rng.random_range(0.0..total);
        if u < self.subtree_weight {
            MutationKind::SubtreeReplace
        } else if u < self.subtree_weight + self.point_weight {
            MutationKind::PointOpSwap
        } else {
            MutationKind::ConstantPerturb
        }
    }
}

/// Applies one mutation, with the kind drawn from the configured weights.
pub fn mutate<R: Rng + ?Sized>(
    expr: &Expr,
    alphabet: &Alphabet,
    rng: &mut R,
    config: &VariationConfig,
) -> Expr {
    let kind = config.pick_kind(rng);
    mutate_with(kind, expr, alphabet, rng, config)
}

/// Applies a mutation of a fixed kind. Constant perturbation on a tree
/// without constants falls back to a point swap.
pub fn mutate_with<R: Rng + ?Sized>(
    kind: MutationKind,
    expr: &Expr,
    alphabet: &Alphabet,
    rng: &mut R,
    config: &VariationConfig,
) -> Expr {
    match kind {
        MutationKind::SubtreeReplace => subtree_replace(expr, alphabet, rng, config),
        MutationKind::PointOpSwap => point_swap(expr, alphabet, rng),
        MutationKind::ConstantPerturb => {
            if expr.has_constants() {
                perturb_constant(expr, rng, config.constant_sigma)
            } else {
                point_swap(expr, alphabet, rng)
            }
        }
    }
}

fn subtree_replace<R: Rng + ?Sized>(
    expr: &Expr,
    alphabet: &Alphabet,
    rng: &mut R,
    config: &VariationConfig,
) -> Expr {
    let idx = rng.random_range(0..expr.complexity());
    let at = expr.node_depth(idx).unwrap_or(0);
    let room = config.max_depth.saturating_sub(at);
    let hi = config.subtree_depth.1.min(room);
    let lo = config.subtree_depth.0.min(hi);
    let sub = random_expr(alphabet, (lo, hi), InitMethod::Grow, rng);
    expr.replace_node(idx, &sub)
}

fn pick_other<T: Copy + PartialEq, R: Rng + ?Sized>(choices: &[T], current: T, rng: &mut R) -> T {
    let others: Vec<T> = choices.iter().copied().filter(|c| *c != current).collect();
    if others.is_empty() {
        current
    } else {
        others[rng.random_range(0..others.len())]
    }
}

fn point_swap<R: Rng + ?Sized>(expr: &Expr, alphabet: &Alphabet, rng: &mut R) -> Expr {
    let idx = rng.random_range(0..expr.complexity());
    let node = expr.node(idx).expect("index within tree");
    let replacement = match node {
        Expr::Var(_) | Expr::Const(_) => random_leaf(alphabet, rng),
        Expr::Unary(op, child) => {
            Expr::Unary(pick_other(&alphabet.unary, *op, rng), child.clone())
        }
        Expr::Binary(op, l, r) => {
            Expr::Binary(pick_other(&alphabet.binary, *op, rng), l.clone(), r.clone())
        }
    };
    expr.replace_node(idx, &replacement)
}

fn perturb_constant<R: Rng + ?Sized>(expr: &Expr, rng: &mut R, sigma: f64) -> Expr {
    let positions: Vec<usize> = (0..expr.complexity())
        .filter(|&i| matches!(expr.node(i), Some(Expr::Const(_))))
        .collect();
    let idx = positions[rng.random_range(0..positions.len())];
    let Some(Expr::Const(c)) = expr.node(idx) else {
        unreachable!()
    };
    let noise = Normal::new(0.0, sigma.max(0.0))
        .map(|n| n.sample(rng))
        .unwrap_or(0.0);
    let value = c + noise;
    let value = if value.is_finite() { value } else { *c };
    expr.replace_node(idx, &Expr::Const(value))
}

fn crossover_point<R: Rng + ?Sized>(e: &Expr, rng: &mut R) -> usize {
    let n = e.complexity();
    if n == 1 {
        0
    } else {
        rng.random_range(1..n)
    }
}

/// One-point subtree crossover. An offspring deeper than `max_depth` is
/// replaced by its corresponding parent.
pub fn crossover<R: Rng + ?Sized>(
    a: &Expr,
    b: &Expr,
    rng: &mut R,
    config: &VariationConfig,
) -> (Expr, Expr) {
    let i = crossover_point(a, rng);
    let j = crossover_point(b, rng);
    let sub_a = a.node(i).expect("crossover index").clone();
    let sub_b = b.node(j).expect("crossover index").clone();
    let child_a = a.replace_node(i, &sub_b);
    let child_b = b.replace_node(j, &sub_a);
    let child_a = if child_a.depth() > config.max_depth {
        a.clone()
    } else {
        child_a
    };
    let child_b = if child_b.depth() > config.max_depth {
        b.clone()
    } else {
        child_b
    };
    (child_a, child_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ramped_half_and_half, BinaryOp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subtree_mutation_of_leaf_is_valid() {
        let alphabet = Alphabet::new(["x", "y"]).unwrap();
        let config = VariationConfig {
            max_depth: 3,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = mutate_with(
                MutationKind::SubtreeReplace,
                &Expr::var(0),
                &alphabet,
                &mut rng,
                &config,
            );
            assert!(m.is_valid(2, 3));
        }
    }

    #[test]
    fn constant_perturbation_adds_gaussian_noise() {
        let alphabet = Alphabet::new(["x"]).unwrap();
        let config = VariationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut deltas = Vec::new();
        for _ in 0..2000 {
            let Expr::Const(c) = mutate_with(
                MutationKind::ConstantPerturb,
                &Expr::constant(2.0),
                &alphabet,
                &mut rng,
                &config,
            ) else {
                panic!("constant expected");
            };
            deltas.push(c - 2.0);
        }
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let sd = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / deltas.len() as f64)
            .sqrt();
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((sd - 0.1).abs() < 0.01, "sd {sd}");
    }

    #[test]
    fn leaf_crossover_swaps_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c1, c2) = crossover(
            &Expr::var(0),
            &Expr::constant(3.0),
            &mut rng,
            &VariationConfig::default(),
        );
        assert_eq!(c1, Expr::constant(3.0));
        assert_eq!(c2, Expr::var(0));
    }

    #[test]
    fn overflowing_offspring_is_replaced_by_parent() {
        // A depth-2 chain crossed with a deep donor can only overflow at max_depth 2.
        let mut deep = Expr::var(0);
        for _ in 0..6 {
            deep = Expr::binary(BinaryOp::Add, deep, Expr::var(1));
        }
        let shallow = Expr::binary(
            BinaryOp::Mul,
            Expr::binary(BinaryOp::Add, Expr::var(0), Expr::var(1)),
            Expr::var(1),
        );
        let config = VariationConfig {
            max_depth: 2,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut saw_parent = false;
        for _ in 0..50 {
            let (c1, _) = crossover(&shallow, &deep, &mut rng, &config);
            assert!(c1.depth() <= 2);
            saw_parent |= c1 == shallow;
        }
        assert!(saw_parent);
    }

    #[test]
    fn seeded_variation_is_reproducible() {
        let alphabet = Alphabet::new(["x", "y"]).unwrap();
        let config = VariationConfig::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ramped_half_and_half(&alphabet, (2, 6), &mut rng);
            let b = ramped_half_and_half(&alphabet, (2, 6), &mut rng);
            let m = mutate(&a, &alphabet, &mut rng, &config);
            let (c, d) = crossover(&a, &b, &mut rng, &config);
            (m, c, d)
        };
        assert_eq!(run(42), run(42));
    }
}
