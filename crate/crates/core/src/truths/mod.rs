//! Auxiliary truths: known properties of the unknown target function.
//!
//! Each truth has a violation function `v_t(f, x) >= 0` that measures how far
//! a candidate `f` is from satisfying it at an input `x`. Generative truths
//! can also turn an existing labelled point into new labelled points without
//! consulting any oracle.

mod dsl;
mod probe;

use thiserror::Error;

use crate::dataset::{DataPoint, Dataset, Provenance};
use crate::expr::Expr;

pub use dsl::{parse_truth, parse_truths};
pub use probe::TruthProbes;

/// Default violation above which counterexamples are produced.
pub const VIOLATION_THRESHOLD: f64 = 1e-9;
/// Default guard for the inverse-swap truth.
pub const INVERSE_SWAP_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TruthsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("truth `{id}` references variable {index} but arity is {arity}")]
    VariableOutOfRange { id: String, index: usize, arity: usize },
}

/// Value assigned to a variable by a guarded-value substitution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubstValue {
    Const(f64),
    /// Copy of another input (read after earlier substitutions).
    Alias(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TruthKind {
    /// `f` is unchanged by exchanging each listed pair of inputs.
    Symmetry { pairs: Vec<(usize, usize)> },
    /// `f` is zero whenever any listed input is zero.
    ZeroCondition { vars: Vec<usize> },
    /// After the substitution, `f` equals `label` evaluated on the
    /// substituted inputs.
    GuardedValue {
        substitution: Vec<(usize, SubstValue)>,
        label: Expr,
    },
    /// `f(x) * f(swap(x)) = 1` whenever neither side is (near) zero.
    InverseSwap { a: usize, b: usize, epsilon: f64 },
    /// Output lies within `[lo, hi]`; open flags only record the notation.
    Range {
        lo: f64,
        hi: f64,
        lo_open: bool,
        hi_open: bool,
    },
    /// Output does not exceed the smallest listed input.
    OutputBoundedByInputs { vars: Vec<usize> },
    /// Output is positive iff `x_a * x_b` is positive.
    SignAgreement { a: usize, b: usize },
    /// `f` is unchanged by negating each listed input.
    Reflection { vars: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryTruth {
    pub id: String,
    pub kind: TruthKind,
}

fn swapped(x: &[f64], a: usize, b: usize) -> Vec<f64> {
    let mut y = x.to_vec();
    y.swap(a, b);
    y
}

fn with_value(x: &[f64], v: usize, value: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[v] = value;
    y
}

pub(crate) fn substitute(x: &[f64], substitution: &[(usize, SubstValue)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(v, value) in substitution {
        y[v] = match value {
            SubstValue::Const(c) => c,
            SubstValue::Alias(u) => y[u],
        };
    }
    y
}

impl AuxiliaryTruth {
    pub fn new(id: impl Into<String>, kind: TruthKind) -> AuxiliaryTruth {
        AuxiliaryTruth { id: id.into(), kind }
    }

    /// Whether this truth can produce new labelled points.
    pub fn is_generative(&self) -> bool {
        matches!(
            self.kind,
            TruthKind::Symmetry { .. }
                | TruthKind::ZeroCondition { .. }
                | TruthKind::GuardedValue { .. }
                | TruthKind::InverseSwap { .. }
                | TruthKind::Reflection { .. }
        )
    }

    fn referenced_vars(&self) -> Vec<usize> {
        match &self.kind {
            TruthKind::Symmetry { pairs } => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
            TruthKind::ZeroCondition { vars }
            | TruthKind::OutputBoundedByInputs { vars }
            | TruthKind::Reflection { vars } => vars.clone(),
            TruthKind::GuardedValue {
                substitution,
                label,
            } => substitution
                .iter()
                .flat_map(|&(v, s)| match s {
                    SubstValue::Const(_) => vec![v],
                    SubstValue::Alias(u) => vec![v, u],
                })
                .chain(label.max_var())
                .collect(),
            TruthKind::InverseSwap { a, b, .. } | TruthKind::SignAgreement { a, b } => {
                vec![*a, *b]
            }
            TruthKind::Range { .. } => Vec::new(),
        }
    }

    /// Checks every referenced variable index against `arity`.
    pub fn validate(&self, arity: usize) -> Result<(), TruthsError> {
        match self.referenced_vars().into_iter().find(|&v| v >= arity) {
            Some(index) => Err(TruthsError::VariableOutOfRange {
                id: self.id.clone(),
                index,
                arity,
            }),
            None => Ok(()),
        }
    }

    fn check_arity(&self, inputs: &[f64]) -> Result<(), TruthsError> {
        let needed = self.referenced_vars().into_iter().max().map_or(0, |m| m + 1);
        if inputs.len() < needed {
            return Err(TruthsError::Arity {
                expected: needed,
                got: inputs.len(),
            });
        }
        Ok(())
    }

    /// `v_t(candidate, x)`; zero means the candidate is consistent with the
    /// truth at `x`.
    pub fn violation(&self, candidate: &Expr, inputs: &[f64]) -> Result<f64, TruthsError> {
        self.check_arity(inputs)?;
        if let Some(m) = candidate.max_var() {
            if m >= inputs.len() {
                return Err(TruthsError::Arity {
                    expected: m + 1,
                    got: inputs.len(),
                });
            }
        }
        let f = |x: &[f64]| candidate.eval_unchecked(x).value;
        let v = match &self.kind {
            TruthKind::Symmetry { pairs } => {
                let fx = f(inputs);
                pairs
                    .iter()
                    .map(|&(a, b)| (fx - f(&swapped(inputs, a, b))).abs())
                    .fold(0.0, f64::max)
            }
            TruthKind::ZeroCondition { vars } => {
                if vars.iter().any(|&v| inputs[v] == 0.0) {
                    f(inputs).abs()
                } else {
                    vars.iter()
                        .map(|&v| f(&with_value(inputs, v, 0.0)).abs())
                        .fold(0.0, f64::max)
                }
            }
            TruthKind::GuardedValue {
                substitution,
                label,
            } => {
                let s = substitute(inputs, substitution);
                (f(&s) - label.eval_unchecked(&s).value).abs()
            }
            TruthKind::InverseSwap { a, b, epsilon } => {
                let fx = f(inputs);
                let fs = f(&swapped(inputs, *a, *b));
                if fx.abs() > *epsilon && fs.abs() > *epsilon {
                    (fx * fs - 1.0).abs()
                } else {
                    0.0
                }
            }
            TruthKind::Range { lo, hi, .. } => {
                let fx = f(inputs);
                0.0f64.max(lo - fx).max(fx - hi)
            }
            TruthKind::OutputBoundedByInputs { vars } => {
                let bound = vars.iter().map(|&v| inputs[v]).fold(f64::INFINITY, f64::min);
                0.0f64.max(f(inputs) - bound)
            }
            TruthKind::SignAgreement { a, b } => {
                let p = inputs[*a] * inputs[*b];
                let fx = f(inputs);
                if p != 0.0 && fx.signum() != p.signum() {
                    fx.abs()
                } else {
                    0.0
                }
            }
            TruthKind::Reflection { vars } => {
                let fx = f(inputs);
                vars.iter()
                    .map(|&v| (fx - f(&with_value(inputs, v, -inputs[v]))).abs())
                    .fold(0.0, f64::max)
            }
        };
        Ok(v)
    }

    /// Sound labelled points derived from `point` for the parts of this truth
    /// the candidate violates by more than `threshold`. Loss-only kinds never
    /// produce points.
    pub fn generate_counterexamples(
        &self,
        candidate: &Expr,
        point: &DataPoint,
        threshold: f64,
        generation: usize,
    ) -> Result<Vec<DataPoint>, TruthsError> {
        let x = &point.inputs;
        let y = point.label;
        if !self.is_generative() || !y.is_finite() {
            return Ok(Vec::new());
        }
        if self.violation(candidate, x)? <= threshold {
            return Ok(Vec::new());
        }
        let f = |x: &[f64]| candidate.eval_unchecked(x).value;
        let make = |inputs: Vec<f64>, label: f64| DataPoint {
            inputs,
            label,
            provenance: Provenance::generated(&self.id, generation),
        };
        let out = match &self.kind {
            TruthKind::Symmetry { pairs } => {
                let fx = f(x);
                pairs
                    .iter()
                    .map(|&(a, b)| swapped(x, a, b))
                    .filter(|s| (fx - f(s)).abs() > threshold)
                    .map(|s| make(s, y))
                    .collect()
            }
            TruthKind::ZeroCondition { vars } if vars.iter().any(|&v| x[v] == 0.0) => Vec::new(),
            TruthKind::ZeroCondition { vars } => vars
                .iter()
                .map(|&v| with_value(x, v, 0.0))
                .filter(|z| f(z).abs() > threshold)
                .map(|z| make(z, 0.0))
                .collect(),
            TruthKind::GuardedValue {
                substitution,
                label,
            } => {
                let s = substitute(x, substitution);
                let value = label.eval_unchecked(&s).value;
                vec![make(s, value)]
            }
            TruthKind::InverseSwap { a, b, epsilon } => {
                if y.abs() > *epsilon {
                    vec![make(swapped(x, *a, *b), 1.0 / y)]
                } else {
                    Vec::new()
                }
            }
            TruthKind::Reflection { vars } => {
                let fx = f(x);
                vars.iter()
                    .map(|&v| with_value(x, v, -x[v]))
                    .filter(|r| (fx - f(r)).abs() > threshold)
                    .map(|r| make(r, y))
                    .collect()
            }
            TruthKind::Range { .. }
            | TruthKind::OutputBoundedByInputs { .. }
            | TruthKind::SignAgreement { .. } => Vec::new(),
        };
        Ok(out)
    }
}

/// Mean over truths of the largest violation over the dataset. An empty
/// truth set or dataset gives 0.
pub fn truth_error(truths: &[AuxiliaryTruth], candidate: &Expr, dataset: &Dataset) -> f64 {
    if truths.is_empty() || dataset.is_empty() {
        return 0.0;
    }
    let probes = TruthProbes::new(truths, dataset);
    let compiled = candidate.compile();
    let base = compiled.eval_columns(probes.columns(), dataset.len());
    probes.truth_error(&compiled, &base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::text::parse_with_names;

    fn names() -> Vec<String> {
        vec!["r1".into(), "r2".into()]
    }

    fn p(s: &str) -> Expr {
        parse_with_names(s, &names()).unwrap()
    }

    fn zero_r2() -> AuxiliaryTruth {
        AuxiliaryTruth::new("zero_r2", TruthKind::ZeroCondition { vars: vec![1] })
    }

    #[test]
    fn worked_example_violations() {
        let t = zero_r2();
        let sum = p("r1 + r2");
        assert_eq!(t.violation(&sum, &[12.0, 0.0]).unwrap(), 12.0);
        assert_eq!(t.violation(&sum, &[800.0, 0.0]).unwrap(), 800.0);
    }

    #[test]
    fn worked_example_truth_error() {
        let ds = Dataset::from_points(
            names(),
            vec![
                DataPoint::original(vec![12.0, 0.0], 0.0),
                DataPoint::original(vec![800.0, 0.0], 0.0),
            ],
        )
        .unwrap();
        assert_eq!(truth_error(&[zero_r2()], &p("r1 + r2"), &ds), 800.0);
        assert_eq!(truth_error(&[], &p("r1 + r2"), &ds), 0.0);
    }

    #[test]
    fn mean_of_per_truth_maxima() {
        // Range(-inf, 0): violation = f. Symmetry on r1*r2: 0.
        let ds = Dataset::from_points(
            names(),
            vec![
                DataPoint::original(vec![2.0, 5.0], 0.0),
                DataPoint::original(vec![1.0, 3.0], 0.0),
            ],
        )
        .unwrap();
        let truths = [
            AuxiliaryTruth::new(
                "range",
                TruthKind::Range {
                    lo: f64::NEG_INFINITY,
                    hi: 0.0,
                    lo_open: true,
                    hi_open: false,
                },
            ),
            AuxiliaryTruth::new("sym", TruthKind::Symmetry { pairs: vec![(0, 1)] }),
        ];
        assert_eq!(truth_error(&truths, &p("r1 * r2"), &ds), 5.0);
    }

    #[test]
    fn symmetric_candidate_never_violates_symmetry() {
        let t = AuxiliaryTruth::new("sym", TruthKind::Symmetry { pairs: vec![(0, 1)] });
        let prod = p("r1 * r2");
        for x in [[1.0, 2.0], [-3.5, 7.25], [0.0, 1e6]] {
            assert_eq!(t.violation(&prod, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn symmetry_yields_swapped_point() {
        let t = AuxiliaryTruth::new("sym", TruthKind::Symmetry { pairs: vec![(0, 1)] });
        let out = t
            .generate_counterexamples(&p("r1 - r2"), &DataPoint::original(vec![2.0, 3.0], 4.0), 1e-9, 3)
            .unwrap();
        assert_eq!(
            out,
            vec![DataPoint {
                inputs: vec![3.0, 2.0],
                label: 4.0,
                provenance: Provenance::generated("sym", 3),
            }]
        );
    }

    #[test]
    fn guarded_value_for_normal_at_zero() {
        let n = vec!["x".to_string()];
        let t = AuxiliaryTruth::new(
            "guard",
            TruthKind::GuardedValue {
                substitution: vec![(0, SubstValue::Const(0.0))],
                label: Expr::Const(0.1591549),
            },
        );
        let candidate = parse_with_names("x + 1", &n).unwrap();
        let out = t
            .generate_counterexamples(&candidate, &DataPoint::original(vec![1.3], 0.03), 1e-9, 0)
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].inputs, vec![0.0]);
        assert_eq!(out[0].label, 0.1591549);
    }

    #[test]
    fn loss_only_truths_generate_nothing() {
        let t = AuxiliaryTruth::new(
            "range",
            TruthKind::Range {
                lo: 0.0,
                hi: 1.0,
                lo_open: true,
                hi_open: true,
            },
        );
        let out = t
            .generate_counterexamples(&p("r1 * 100"), &DataPoint::original(vec![2.0, 3.0], 0.5), 1e-9, 0)
            .unwrap();
        assert!(t.violation(&p("r1 * 100"), &[2.0, 3.0]).unwrap() > 0.0);
        assert!(out.is_empty());
    }

    #[test]
    fn zero_condition_generation_and_corner_points() {
        let t = AuxiliaryTruth::new("zero", TruthKind::ZeroCondition { vars: vec![0, 1] });
        let sum = p("r1 + r2");
        let out = t
            .generate_counterexamples(&sum, &DataPoint::original(vec![2.0, 3.0], 1.2), 1e-9, 1)
            .unwrap();
        let inputs: Vec<_> = out.iter().map(|d| d.inputs.clone()).collect();
        assert_eq!(inputs, vec![vec![0.0, 3.0], vec![2.0, 0.0]]);
        assert!(out.iter().all(|d| d.label == 0.0));
        // A point already on the zero set is checked directly and never
        // pushed further towards the origin.
        assert_eq!(t.violation(&sum, &[2.0, 0.0]).unwrap(), 2.0);
        let out = t
            .generate_counterexamples(&sum, &DataPoint::original(vec![2.0, 0.0], 0.0), 1e-9, 1)
            .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn inverse_swap_and_sign() {
        let n = vec!["i".to_string(), "r".to_string()];
        let snell = parse_with_names("sin(i) / sin(r)", &n).unwrap();
        let t = AuxiliaryTruth::new(
            "inv",
            TruthKind::InverseSwap {
                a: 0,
                b: 1,
                epsilon: INVERSE_SWAP_EPSILON,
            },
        );
        assert!(t.violation(&snell, &[0.3, 1.1]).unwrap() < 1e-12);
        let bad = parse_with_names("i + r", &n).unwrap();
        let pt = DataPoint::original(vec![0.3, 1.1], 0.3f64.sin() / 1.1f64.sin());
        let out = t.generate_counterexamples(&bad, &pt, 1e-9, 0).unwrap();
        assert_eq!(out[0].inputs, vec![1.1, 0.3]);
        assert_eq!(out[0].label, 1.0 / pt.label);

        let s = AuxiliaryTruth::new("sign", TruthKind::SignAgreement { a: 0, b: 1 });
        assert_eq!(s.violation(&p("r1 + r2"), &[-1.0, 4.0]).unwrap(), 3.0);
        assert_eq!(s.violation(&p("r1 * r2"), &[-1.0, 4.0]).unwrap(), 0.0);
        assert_eq!(s.violation(&p("r1 + r2"), &[0.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let t = AuxiliaryTruth::new("sym", TruthKind::Symmetry { pairs: vec![(0, 2)] });
        assert!(matches!(
            t.violation(&Expr::var(0), &[1.0, 2.0]),
            Err(TruthsError::Arity { .. })
        ));
        assert!(t.validate(2).is_err());
        assert!(t.validate(3).is_ok());
    }
}
