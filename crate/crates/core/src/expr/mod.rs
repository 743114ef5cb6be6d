//! Expression trees for candidate equations.
//!
//! An [`Expr`] is an immutable tree over input variables, constants and the
//! protected operator set described in [`UnaryOp`] and [`BinaryOp`]. The
//! submodules add evaluation, random generation, variation operators, the
//! infix text format and a sampling-based equivalence check.

mod equiv;
mod eval;
mod random;
pub(crate) mod text;
mod variation;

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use equiv::{semantically_equivalent, EquivalenceCheck};
pub use eval::{CompiledExpr, EvalStatus, Evaluation, CLAMP};
pub use random::{random_expr, ramped_half_and_half, InitMethod};
pub use text::{parse, parse_with_names};
pub use variation::{crossover, mutate, MutationKind, VariationConfig};

/// Errors raised while building, parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("expected {expected} inputs, got {got}")]
    InputShape { expected: usize, got: usize },
    #[error("non-finite input at position {0}")]
    NonFiniteInput(usize),
    #[error("syntax error at token {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    ArityMisuse {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("degenerate range for variable {index}: [{lo}, {hi}]")]
    DegenerateRange { index: usize, lo: f64, hi: f64 },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    /// `ln(|x|)`, with `plog(0) = 0`.
    Plog,
    /// `sqrt(|x|)`.
    Psqrt,
    Abs,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Division with `a / 0 = 1`.
    Pdiv,
    Pow,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 8] = [
        UnaryOp::Neg,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Plog,
        UnaryOp::Psqrt,
        UnaryOp::Abs,
        UnaryOp::Square,
    ];

    /// Name used in the infix grammar. `Neg` prints as a prefix minus.
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Plog => "log",
            UnaryOp::Psqrt => "sqrt",
            UnaryOp::Abs => "abs",
            UnaryOp::Square => "square",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "neg" => UnaryOp::Neg,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" | "plog" => UnaryOp::Plog,
            "sqrt" | "psqrt" => UnaryOp::Psqrt,
            "abs" => UnaryOp::Abs,
            "square" => UnaryOp::Square,
            _ => return None,
        })
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 5] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Pdiv,
        BinaryOp::Pow,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Pdiv => "/",
            BinaryOp::Pow => "^",
        }
    }

    pub fn from_name(name: &str) -> Option<BinaryOp> {
        Some(match name {
            "add" => BinaryOp::Add,
            "sub" => BinaryOp::Sub,
            "mul" => BinaryOp::Mul,
            "div" | "pdiv" => BinaryOp::Pdiv,
            "pow" => BinaryOp::Pow,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are referenced by 0-based input position.
#[derive(Debug, Clone)]
pub enum Expr {
    Var(usize),
    Const(f64),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

// Structural equality; constants compare by bit pattern so that `Expr` can be
// used as a hash key.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Const(a), Expr::Const(b)) => a.to_bits() == b.to_bits(),
            (Expr::Unary(o1, a), Expr::Unary(o2, b)) => o1 == o2 && a == b,
            (Expr::Binary(o1, a1, b1), Expr::Binary(o2, a2, b2)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Expr::Var(i) => i.hash(state),
            Expr::Const(c) => c.to_bits().hash(state),
            Expr::Unary(op, a) => {
                op.hash(state);
                a.hash(state);
            }
            Expr::Binary(op, a, b) => {
                op.hash(state);
                a.hash(state);
                b.hash(state);
            }
        }
    }
}

impl Expr {
    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    /// Total node count.
    pub fn complexity(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Unary(_, a) => 1 + a.complexity(),
            Expr::Binary(_, a, b) => 1 + a.complexity() + b.complexity(),
        }
    }

    /// Tree depth, with a lone leaf at depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Var(_) | Expr::Const(_))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Unary(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn has_constants(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Const(_) => true,
            Expr::Unary(_, a) => a.has_constants(),
            Expr::Binary(_, a, b) => a.has_constants() || b.has_constants(),
        }
    }

    /// Checks the structural invariants against an arity and depth bound.
    pub fn is_valid(&self, arity: usize, max_depth: usize) -> bool {
        fn walk(e: &Expr, arity: usize) -> bool {
            match e {
                Expr::Var(i) => *i < arity,
                Expr::Const(c) => c.is_finite(),
                Expr::Unary(_, a) => walk(a, arity),
                Expr::Binary(_, a, b) => walk(a, arity) && walk(b, arity),
            }
        }
        self.depth() <= max_depth && walk(self, arity)
    }

    /// Node at `index` in pre-order (root = 0).
    pub fn node(&self, index: usize) -> Option<&Expr> {
        fn find<'a>(e: &'a Expr, target: usize, counter: &mut usize) -> Option<&'a Expr> {
            if *counter == target {
                return Some(e);
            }
            *counter += 1;
            match e {
                Expr::Var(_) | Expr::Const(_) => None,
                Expr::Unary(_, a) => find(a, target, counter),
                Expr::Binary(_, a, b) => {
                    find(a, target, counter).or_else(|| find(b, target, counter))
                }
            }
        }
        find(self, index, &mut 0)
    }

    /// Depth of the node at pre-order `index`.
    pub fn node_depth(&self, index: usize) -> Option<usize> {
        fn find(e: &Expr, target: usize, counter: &mut usize, depth: usize) -> Option<usize> {
            if *counter == target {
                return Some(depth);
            }
            *counter += 1;
            match e {
                Expr::Var(_) | Expr::Const(_) => None,
                Expr::Unary(_, a) => find(a, target, counter, depth + 1),
                Expr::Binary(_, a, b) => find(a, target, counter, depth + 1)
                    .or_else(|| find(b, target, counter, depth + 1)),
            }
        }
        find(self, index, &mut 0, 0)
    }

    /// Returns a copy with the subtree at pre-order `index` replaced.
    pub fn replace_node(&self, index: usize, replacement: &Expr) -> Expr {
        fn rebuild(e: &Expr, target: usize, counter: &mut usize, rep: &Expr) -> Expr {
            if *counter == target {
                *counter += e.complexity();
                return rep.clone();
            }
            *counter += 1;
            match e {
                Expr::Var(_) | Expr::Const(_) => e.clone(),
                Expr::Unary(op, a) => Expr::unary(*op, rebuild(a, target, counter, rep)),
                Expr::Binary(op, a, b) => {
                    let left = rebuild(a, target, counter, rep);
                    let right = rebuild(b, target, counter, rep);
                    Expr::binary(*op, left, right)
                }
            }
        }
        rebuild(self, index, &mut 0, replacement)
    }

    /// Renders using the alphabet's variable names.
    pub fn to_text(&self, names: &[String]) -> String {
        text::to_text(self, names)
    }

    /// Renders with positional names `x0, x1, ...`.
    pub fn to_positional_text(&self) -> String {
        let arity = self.max_var().map_or(0, |m| m + 1);
        let names: Vec<String> = (0..arity).map(|i| format!("x{i}")).collect();
        text::to_text(self, &names)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_positional_text())
    }
}

/// How leaf constants are produced during random generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstantPolicy {
    None,
    Ephemeral { lo: f64, hi: f64 },
    /// Uniform integers in `lo..=hi`.
    Integer { lo: i64, hi: i64 },
}

impl Default for ConstantPolicy {
    fn default() -> Self {
        ConstantPolicy::Ephemeral { lo: -1.0, hi: 1.0 }
    }
}

impl std::str::FromStr for ConstantPolicy {
    type Err = ExprError;

    /// Parses `none`, `int:LO:HI` or `uniform:LO:HI`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || {
            ExprError::InvalidAlphabet(format!(
                "bad constants `{text}` (expected none, int:LO:HI or uniform:LO:HI)"
            ))
        };
        let parts: Vec<&str> = text.trim().split(':').map(str::trim).collect();
        let policy = match parts.as_slice() {
            ["none"] => ConstantPolicy::None,
            ["int", lo, hi] => ConstantPolicy::Integer {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            ["uniform", lo, hi] => ConstantPolicy::Ephemeral {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(policy)
    }
}

/// The symbol set a search may draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    pub unary: Vec<UnaryOp>,
    pub binary: Vec<BinaryOp>,
    #[serde(default)]
    pub constants: ConstantPolicy,
    pub names: Vec<String>,
}

impl Alphabet {
    /// Default operator set with the given variable names.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Alphabet, ExprError> {
        Alphabet::with_ops(
            names,
            vec![
                UnaryOp::Sin,
                UnaryOp::Cos,
                UnaryOp::Exp,
                UnaryOp::Plog,
                UnaryOp::Psqrt,
                UnaryOp::Abs,
                UnaryOp::Square,
            ],
            BinaryOp::ALL.to_vec(),
            ConstantPolicy::default(),
        )
    }

    pub fn with_ops<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        unary: Vec<UnaryOp>,
        binary: Vec<BinaryOp>,
        constants: ConstantPolicy,
    ) -> Result<Alphabet, ExprError> {
        let alphabet = Alphabet {
            unary,
            binary,
            constants,
            names: names.into_iter().map(Into::into).collect(),
        };
        alphabet.validate()?;
        Ok(alphabet)
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn validate(&self) -> Result<(), ExprError> {
        if self.names.is_empty() {
            return Err(ExprError::InvalidAlphabet("arity must be at least 1".into()));
        }
        for (i, name) in self.names.iter().enumerate() {
            if self.names[..i].contains(name) {
                return Err(ExprError::InvalidAlphabet(format!("duplicate variable `{name}`")));
            }
            let valid = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid {
                return Err(ExprError::InvalidAlphabet(format!("bad variable name `{name}`")));
            }
        }
        match self.constants {
            ConstantPolicy::Ephemeral { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                return Err(ExprError::InvalidAlphabet(format!(
                    "constant range [{lo}, {hi}] is empty"
                )));
            }
            ConstantPolicy::Integer { lo, hi } if lo > hi => {
                return Err(ExprError::InvalidAlphabet(format!(
                    "constant range [{lo}, {hi}] is empty"
                )));
            }
            _ => {}
        }
        if self.binary.is_empty() && self.unary.is_empty() {
            return Err(ExprError::InvalidAlphabet("no operators enabled".into()));
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}
