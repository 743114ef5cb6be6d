use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Alphabet, ConstantPolicy, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    /// Every leaf sits at exactly the sampled height.
    Full,
    /// Leaves may appear once the minimum depth is reached, with probability
    /// equal to the terminal share of the alphabet.
    Grow,
}

fn terminal_count(alphabet: &Alphabet) -> usize {
    alphabet.arity() + usize::from(alphabet.constants != ConstantPolicy::None)
}

pub(crate) fn random_leaf<R: Rng + ?Sized>(alphabet: &Alphabet, rng: &mut R) -> Expr {
    let slots = terminal_count(alphabet);
    let pick = rng.random_range(0..slots);
    if pick < alphabet.arity() {
        Expr::Var(pick)
    } else {
        random_constant(alphabet, rng).map_or(Expr::Var(0), Expr::Const)
    }
}

pub(crate) fn random_constant<R: Rng + ?Sized>(alphabet: &Alphabet, rng: &mut R) -> Option<f64> {
    match alphabet.constants {
        ConstantPolicy::None => None,
        ConstantPolicy::Ephemeral { lo, hi } => Some(rng.random_range(lo..hi)),
        ConstantPolicy::Integer { lo, hi } => Some(rng.random_range(lo..=hi) as f64),
    }
}

fn build<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    depth: usize,
    height: usize,
    min: usize,
    method: InitMethod,
    rng: &mut R,
) -> Expr {
    let n_ops = alphabet.unary.len() + alphabet.binary.len();
    let terminals = terminal_count(alphabet);
    let leaf_here = depth >= height
        || n_ops == 0
        || (method == InitMethod::Grow
            && depth >= min
            && rng.random_bool(terminals as f64 / (terminals + n_ops) as f64));
    if leaf_here {
        return random_leaf(alphabet, rng);
    }
    let pick = rng.random_range(0..n_ops);
    if pick < alphabet.unary.len() {
        let child = build(alphabet, depth + 1, height, min, method, rng);
        Expr::unary(alphabet.unary[pick], child)
    } else {
        let op = alphabet.binary[pick - alphabet.unary.len()];
        let left = build(alphabet, depth + 1, height, min, method, rng);
        let right = build(alphabet, depth + 1, height, min, method, rng);
        Expr::binary(op, left, right)
    }
}

/// Generates a random tree whose height is drawn uniformly from
/// `depth_range` (inclusive).
pub fn random_expr<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    depth_range: (usize, usize),
    method: InitMethod,
    rng: &mut R,
) -> Expr {
    let (min, max) = depth_range;
    assert!(min <= max, "depth range ({min}, {max}) is empty");
    let height = rng.random_range(min..=max);
    build(alphabet, 0, height, min, method, rng)
}

/// Half of the trees via `full`, half via `grow`, chosen per tree.
pub fn ramped_half_and_half<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    depth_range: (usize, usize),
    rng: &mut R,
) -> Expr {
    let method = if rng.random_bool(0.5) {
        InitMethod::Full
    } else {
        InitMethod::Grow
    };
    random_expr(alphabet, depth_range, method, rng)
}
