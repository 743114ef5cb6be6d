//! Helpers shared by the integration test targets: random inputs and a
//! direct recursive re-implementation of evaluation and truth violations.
#![allow(dead_code)]

use lgga::dataset::{DataPoint, Dataset};
use lgga::expr::{random_expr, Alphabet, BinaryOp, ConstantPolicy, Expr, InitMethod, UnaryOp};
use lgga::truths::{AuxiliaryTruth, SubstValue, TruthKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 3] = ["a", "b", "c"];

pub fn names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn full_alphabet() -> Alphabet {
    Alphabet::with_ops(
        NAMES,
        UnaryOp::ALL.to_vec(),
        BinaryOp::ALL.to_vec(),
        ConstantPolicy::Ephemeral { lo: -3.0, hi: 3.0 },
    )
    .unwrap()
}

pub fn tree(rng: &mut ChaCha8Rng, max: usize) -> Expr {
    let method = if rng.random_bool(0.5) {
        InitMethod::Full
    } else {
        InitMethod::Grow
    };
    random_expr(&full_alphabet(), (0, max), method, rng)
}

pub fn oracle_guard(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1e150, 1e150)
    }
}

pub fn oracle_eval(e: &Expr, x: &[f64]) -> f64 {
    match e {
        Expr::Var(i) => x[*i],
        Expr::Const(c) => *c,
        Expr::Unary(op, a) => {
            let v = oracle_eval(a, x);
            oracle_guard(match op {
                UnaryOp::Neg => -v,
                UnaryOp::Sin => v.sin(),
                UnaryOp::Cos => v.cos(),
                UnaryOp::Exp => v.exp(),
                UnaryOp::Plog if v == 0.0 => 0.0,
                UnaryOp::Plog => v.abs().ln(),
                UnaryOp::Psqrt => v.abs().sqrt(),
                UnaryOp::Abs => v.abs(),
                UnaryOp::Square => v * v,
            })
        }
        Expr::Binary(op, a, b) => {
            let (u, v) = (oracle_eval(a, x), oracle_eval(b, x));
            oracle_guard(match op {
                BinaryOp::Add => u + v,
                BinaryOp::Sub => u - v,
                BinaryOp::Mul => u * v,
                BinaryOp::Pdiv if v == 0.0 => 1.0,
                BinaryOp::Pdiv => u / v,
                BinaryOp::Pow if u == 0.0 && v < 0.0 => 1.0,
                BinaryOp::Pow => u.powf(v),
            })
        }
    }
}

pub fn oracle_violation(t: &TruthKind, f: &Expr, x: &[f64]) -> f64 {
    let at = |y: &[f64]| oracle_eval(f, y);
    let fx = at(x);
    let edit = |changes: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, v) in changes {
            y[i] = v;
        }
        y
    };
    match t {
        TruthKind::Symmetry { pairs } => pairs
            .iter()
            .map(|&(i, j)| (fx - at(&edit(&[(i, x[j]), (j, x[i])]))).abs())
            .fold(0.0, f64::max),
        TruthKind::ZeroCondition { vars } => {
            if vars.iter().any(|&v| x[v] == 0.0) {
                fx.abs()
            } else {
                vars.iter().map(|&v| at(&edit(&[(v, 0.0)])).abs()).fold(0.0, f64::max)
            }
        }
        TruthKind::GuardedValue { substitution, label } => {
            let mut y = x.to_vec();
            for &(i, s) in substitution {
                y[i] = match s {
                    SubstValue::Const(c) => c,
                    SubstValue::Alias(j) => y[j],
                };
            }
            (at(&y) - oracle_eval(label, &y)).abs()
        }
        TruthKind::InverseSwap { a, b, epsilon } => {
            let fs = at(&edit(&[(*a, x[*b]), (*b, x[*a])]));
            if fx.abs() > *epsilon && fs.abs() > *epsilon {
                (fx * fs - 1.0).abs()
            } else {
                0.0
            }
        }
        TruthKind::Range { lo, hi, .. } => (lo - fx).max(fx - hi).max(0.0),
        TruthKind::OutputBoundedByInputs { vars } => {
            let m = vars.iter().map(|&v| x[v]).fold(f64::INFINITY, f64::min);
            (fx - m).max(0.0)
        }
        TruthKind::SignAgreement { a, b } => {
            let p = x[*a] * x[*b];
            let agree = (p > 0.0 && fx > 0.0) || (p < 0.0 && fx < 0.0);
            if p == 0.0 || agree {
                0.0
            } else {
                fx.abs()
            }
        }
        TruthKind::Reflection { vars } => vars
            .iter()
            .map(|&v| (fx - at(&edit(&[(v, -x[v])]))).abs())
            .fold(0.0, f64::max),
    }
}

pub fn oracle_truth_error(truths: &[AuxiliaryTruth], f: &Expr, data: &Dataset) -> f64 {
    if truths.is_empty() || data.is_empty() {
        return 0.0;
    }
    let per: Vec<f64> = truths
        .iter()
        .map(|t| {
            data.points()
                .iter()
                .map(|p| oracle_violation(&t.kind, f, &p.inputs))
                .fold(0.0, f64::max)
        })
        .collect();
    per.iter().sum::<f64>() / per.len() as f64
}

pub fn random_var(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(0..NAMES.len())
}

pub fn random_truth(rng: &mut ChaCha8Rng, index: usize) -> AuxiliaryTruth {
    let kind = match rng.random_range(0..8) {
        0 => TruthKind::Symmetry {
            pairs: vec![(0, 1), (random_var(rng), 2)],
        },
        1 => TruthKind::ZeroCondition {
            vars: (0..rng.random_range(1..=3)).map(|_| random_var(rng)).collect(),
        },
        2 => TruthKind::GuardedValue {
            substitution: vec![
                (random_var(rng), SubstValue::Const(rng.random_range(-2.0..2.0))),
                (random_var(rng), SubstValue::Alias(random_var(rng))),
            ],
            label: tree(rng, 2),
        },
        3 => TruthKind::InverseSwap {
            a: 0,
            b: 1,
            epsilon: 1e-6,
        },
        4 => TruthKind::Range {
            lo: -1.0,
            hi: rng.random_range(0.0..3.0),
            lo_open: false,
            hi_open: true,
        },
        5 => TruthKind::OutputBoundedByInputs {
            vars: vec![random_var(rng), random_var(rng)],
        },
        6 => TruthKind::SignAgreement { a: 0, b: random_var(rng) },
        _ => TruthKind::Reflection {
            vars: vec![random_var(rng)],
        },
    };
    AuxiliaryTruth::new(format!("t{index}"), kind)
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let points = (0..n)
        .map(|_| {
            let x = (0..NAMES.len())
                .map(|_| {
                    if rng.random_bool(0.15) {
                        0.0
                    } else {
                        rng.random_range(-5.0..5.0)
                    }
                })
                .collect();
            DataPoint::original(x, rng.random_range(-10.0..10.0))
        })
        .collect();
    Dataset::from_points(NAMES, points).unwrap()
}
