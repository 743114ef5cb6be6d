use crate::expr::{Alphabet, BinaryOp, ConstantPolicy, UnaryOp};

use super::BenchmarkProblem;

type Evaluator = fn(&[f64]) -> f64;

struct Row {
    name: &'static str,
    slug: &'static str,
    vars: &'static [(&'static str, f64, f64)],
    equation: &'static str,
    evaluator: Evaluator,
    truths: &'static str,
    extra_unary: &'static [UnaryOp],
    folded: &'static [(&'static str, f64)],
    unverified: bool,
}

const ARITH: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Pdiv];
const BASE_UNARY: [UnaryOp; 3] = [UnaryOp::Neg, UnaryOp::Sin, UnaryOp::Cos];
const CONSTANTS: ConstantPolicy = ConstantPolicy::Integer { lo: -1, hi: 1 };

const ROWS: [Row; 17] = [
    Row {
        name: "Resistance",
        slug: "resistance",
        vars: &[("r1", 1.0, 5.0), ("r2", 1.0, 5.0)],
        equation: "r1 * r2 / (r1 + r2)",
        evaluator: |x| x[0] * x[1] / (x[0] + x[1]),
        truths: "sz(r1, r2)\nout_le_min(r1, r2)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Snell",
        slug: "snell",
        vars: &[("i", 0.1, 1.4), ("r", 0.1, 1.4)],
        equation: "sin(i) / sin(r)",
        evaluator: |x| x[0].sin() / x[1].sin(),
        truths: "inv_swap(i, r)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Coulomb",
        slug: "coulomb",
        vars: &[("q1", -5.0, 5.0), ("q2", -5.0, 5.0), ("r", 1.0, 5.0)],
        equation: "q1 * q2 / r^2",
        evaluator: |x| x[0] * x[1] / (x[2] * x[2]),
        truths: "sz(q1, q2)\nsign_agree(q1, q2)",
        extra_unary: &[],
        folded: &[("k", 1.0)],
        unverified: false,
    },
    Row {
        name: "Reflection",
        slug: "reflection",
        vars: &[("n1", 1.0, 5.0), ("n2", 1.0, 5.0)],
        equation: "((n1 - n2) / (n1 + n2))^2",
        evaluator: |x| ((x[0] - x[1]) / (x[0] + x[1])).powi(2),
        truths: "range(0, 1)\nsym(n1, n2)",
        extra_unary: &[UnaryOp::Abs, UnaryOp::Square],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Gas",
        slug: "gas",
        vars: &[("P", 1.0, 5.0), ("V", 1.0, 5.0), ("n", 1.0, 5.0), ("T", 1.0, 5.0)],
        equation: "P * V / (n * T)",
        evaluator: |x| x[0] * x[1] / (x[2] * x[3]),
        truths: "sz(P, V)\nsym(n, T)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Distance",
        slug: "distance",
        vars: &[("x0", 1.0, 5.0), ("x1", 1.0, 5.0), ("y0", 1.0, 5.0), ("y1", 1.0, 5.0)],
        equation: "sqrt((x1 - x0)^2 + (y1 - y0)^2)",
        evaluator: |x| ((x[1] - x[0]).powi(2) + (x[3] - x[2]).powi(2)).sqrt(),
        truths: "sym(x0, x1)\nsym(y0, y1)\nguard(x0 = 0, x1 = 0, y0 = 0 -> y1)",
        extra_unary: &[UnaryOp::Square, UnaryOp::Psqrt],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Normal",
        slug: "normal",
        vars: &[("x", -2.0, 2.0)],
        equation: "exp(-x^2) / (2 * 3.141592653589793)",
        evaluator: |x| (-x[0] * x[0]).exp() / (2.0 * std::f64::consts::PI),
        truths: "reflect(x)\nguard(x = 0 -> 0.15915494309189535)",
        extra_unary: &[UnaryOp::Exp, UnaryOp::Square],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Dot",
        slug: "dot",
        vars: &[
            ("x1", 1.0, 5.0),
            ("x2", 1.0, 5.0),
            ("x3", 1.0, 5.0),
            ("y1", 1.0, 5.0),
            ("y2", 1.0, 5.0),
            ("y3", 1.0, 5.0),
        ],
        equation: "x1 * y1 + x2 * y2 + x3 * y3",
        evaluator: |x| x[0] * x[3] + x[1] * x[4] + x[2] * x[5],
        truths: "guard(x1 = 0, x2 = 0, x3 = 0 -> 0)\n\
                 guard(y1 = 0, y2 = 0, y3 = 0 -> 0)\n\
                 guard(x2 = x1, x3 = x1, y1 = x1, y2 = x1, y3 = x1 -> 3 * x1^2)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Field",
        slug: "field",
        vars: &[
            ("q", 1.0, 5.0),
            ("Ef", 1.0, 5.0),
            ("B", 1.0, 5.0),
            ("v", 1.0, 5.0),
            ("theta", 1.0, 5.0),
        ],
        equation: "q * (Ef + B * v * sin(theta))",
        evaluator: |x| x[0] * (x[1] + x[2] * x[3] * x[4].sin()),
        truths: "zero(q)\nsym(B, v)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Potential",
        slug: "potential",
        vars: &[("m1", 1.0, 5.0), ("m2", 1.0, 5.0), ("r1", 3.0, 5.0), ("r2", 1.0, 2.0)],
        equation: "m1 * m2 / (1 / r2 - 1 / r1)",
        evaluator: |x| x[0] * x[1] / (1.0 / x[3] - 1.0 / x[2]),
        truths: "sz(m1, m2)",
        extra_unary: &[],
        folded: &[("G", 1.0)],
        unverified: false,
    },
    Row {
        name: "Centre of Mass",
        slug: "centre_of_mass",
        vars: &[("m1", 1.0, 5.0), ("m2", 1.0, 5.0), ("r1", 1.0, 5.0), ("r2", 1.0, 5.0)],
        equation: "(m1 * r1 + m2 * r2) / (m1 + m2)",
        evaluator: |x| (x[0] * x[2] + x[1] * x[3]) / (x[0] + x[1]),
        truths: "guard(r1 = 0, r2 = 0 -> 0)\nguard(m1 = 0 -> r2)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Momentum",
        slug: "momentum",
        vars: &[("m", 1.0, 5.0), ("r", 1.0, 5.0), ("v", 1.0, 5.0), ("theta", 1.0, 5.0)],
        equation: "m * r * v * sin(theta)",
        evaluator: |x| x[0] * x[1] * x[2] * x[3].sin(),
        truths: "sz(m, r, v)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Mass",
        slug: "mass",
        vars: &[("m0", 1.0, 5.0), ("v", 1.0, 2.0), ("c", 3.0, 5.0)],
        equation: "m0 / (1 - v / c)",
        evaluator: |x| x[0] / (1.0 - x[1] / x[2]),
        truths: "zero(m0)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Heat",
        slug: "heat",
        vars: &[("gamma", 2.0, 5.0), ("pr", 1.0, 5.0), ("V", 1.0, 5.0)],
        equation: "pr * V / (gamma - 1)",
        evaluator: |x| x[1] * x[2] / (x[0] - 1.0),
        truths: "sz(pr, V)",
        extra_unary: &[],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Boyle",
        slug: "boyle",
        vars: &[
            ("n", 1.0, 5.0),
            ("kb", 1.0, 5.0),
            ("T", 1.0, 5.0),
            ("V1", 1.0, 5.0),
            ("V2", 1.0, 5.0),
        ],
        equation: "n * kb * T * log(V2 / V1)",
        evaluator: |x| x[0] * x[1] * x[2] * (x[4] / x[3]).ln(),
        truths: "sz(n, kb, T)",
        extra_unary: &[UnaryOp::Plog, UnaryOp::Exp],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Flow",
        slug: "flow",
        vars: &[("pr", 1.0, 5.0), ("gamma", 1.0, 5.0), ("rho", 1.0, 5.0)],
        equation: "sqrt(pr * gamma / rho)",
        evaluator: |x| (x[0] * x[1] / x[2]).sqrt(),
        truths: "sz(pr, gamma)\nguard(pr = 1, gamma = 1, rho = 1 -> 1)",
        extra_unary: &[UnaryOp::Psqrt, UnaryOp::Square],
        folded: &[],
        unverified: false,
    },
    Row {
        name: "Larmor",
        slug: "larmor",
        vars: &[("g", 1.0, 5.0), ("q", 1.0, 5.0), ("B", 1.0, 5.0), ("m", 1.0, 5.0)],
        equation: "g * q * B / (2 * m)",
        evaluator: |x| x[0] * x[1] * x[2] / (2.0 * x[3]),
        truths: "sz(g, q, B)",
        extra_unary: &[],
        folded: &[],
        unverified: true,
    },
];

fn build(row: &Row) -> BenchmarkProblem {
    let names: Vec<String> = row.vars.iter().map(|v| v.0.to_string()).collect();
    let mut unary = BASE_UNARY.to_vec();
    unary.extend(row.extra_unary.iter().filter(|op| !BASE_UNARY.contains(op)));
    let alphabet = Alphabet::with_ops(names.iter().cloned(), unary, ARITH.to_vec(), CONSTANTS)
    .expect("registry alphabet");
    BenchmarkProblem::new(
        row.name,
        row.slug,
        alphabet,
        row.vars.iter().map(|v| (v.1, v.2)).collect(),
        row.equation,
        row.evaluator,
        row.truths,
        row.folded.iter().map(|&(n, v)| (n.to_string(), v)).collect(),
        row.unverified,
    )
}

/// The sixteen verified benchmark problems.
pub fn registry() -> Vec<BenchmarkProblem> {
    ROWS.iter().filter(|r| !r.unverified).map(build).collect()
}

/// [`registry`] plus problems whose truths are our own inference.
pub fn extended_registry() -> Vec<BenchmarkProblem> {
    ROWS.iter().map(build).collect()
}
