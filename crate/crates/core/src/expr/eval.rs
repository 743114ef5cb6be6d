use super::{BinaryOp, Expr, ExprError, UnaryOp};

/// Magnitude bound applied to every intermediate result.
pub const CLAMP: f64 = 1e150;

/// Whether any protected fallback fired while evaluating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalStatus {
    #[default]
    Clean,
    Protected,
}

impl EvalStatus {
    pub fn is_clean(self) -> bool {
        self == EvalStatus::Clean
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub status: EvalStatus,
}

#[inline]
fn guard(v: f64, flagged: &mut bool) -> f64 {
    if v.is_nan() {
        *flagged = true;
        0.0
    } else if v > CLAMP {
        *flagged = true;
        CLAMP
    } else if v < -CLAMP {
        *flagged = true;
        -CLAMP
    } else {
        v
    }
}

#[inline]
pub(crate) fn apply_unary(op: UnaryOp, x: f64, flagged: &mut bool) -> f64 {
    let v = match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Plog => {
            if x == 0.0 {
                *flagged = true;
                0.0
            } else {
                x.abs().ln()
            }
        }
        UnaryOp::Psqrt => x.abs().sqrt(),
        UnaryOp::Abs => x.abs(),
        UnaryOp::Square => x * x,
    };
    guard(v, flagged)
}

#[inline]
pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64, flagged: &mut bool) -> f64 {
    let v = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Pdiv => {
            if b == 0.0 {
                *flagged = true;
                1.0
            } else {
                a / b
            }
        }
        BinaryOp::Pow => {
            if a == 0.0 && b < 0.0 {
                *flagged = true;
                1.0
            } else {
                a.powf(b)
            }
        }
    };
    guard(v, flagged)
}

#[inline(always)]
fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-CLAMP, CLAMP)
    }
}

/// Applies `op` to every element in place, with the same results as
/// [`apply_unary`].
fn unary_column(op: UnaryOp, xs: &mut [f64]) {
    #[inline(always)]
    fn each(xs: &mut [f64], f: impl Fn(f64) -> f64) {
        for v in xs {
            *v = clamp(f(*v));
        }
    }
    match op {
        UnaryOp::Neg => each(xs, |x| -x),
        UnaryOp::Sin => each(xs, f64::sin),
        UnaryOp::Cos => each(xs, f64::cos),
        UnaryOp::Exp => each(xs, f64::exp),
        UnaryOp::Plog => each(xs, |x| if x == 0.0 { 0.0 } else { x.abs().ln() }),
        UnaryOp::Psqrt => each(xs, |x| x.abs().sqrt()),
        UnaryOp::Abs => each(xs, f64::abs),
        UnaryOp::Square => each(xs, |x| x * x),
    }
}

/// Applies `op` elementwise as `lhs[i] = op(lhs[i], rhs[i])`, with the same
/// results as [`apply_binary`].
fn binary_column(op: BinaryOp, lhs: &mut [f64], rhs: &[f64]) {
    #[inline(always)]
    fn each(lhs: &mut [f64], rhs: &[f64], f: impl Fn(f64, f64) -> f64) {
        for (a, b) in lhs.iter_mut().zip(rhs) {
            *a = clamp(f(*a, *b));
        }
    }
    match op {
        BinaryOp::Add => each(lhs, rhs, |a, b| a + b),
        BinaryOp::Sub => each(lhs, rhs, |a, b| a - b),
        BinaryOp::Mul => each(lhs, rhs, |a, b| a * b),
        BinaryOp::Pdiv => each(lhs, rhs, |a, b| if b == 0.0 { 1.0 } else { a / b }),
        BinaryOp::Pow => each(lhs, rhs, |a, b| {
            if a == 0.0 && b < 0.0 {
                1.0
            } else {
                a.powf(b)
            }
        }),
    }
}

fn eval_node(e: &Expr, inputs: &[f64], flagged: &mut bool) -> f64 {
    match e {
        Expr::Var(i) => inputs[*i],
        Expr::Const(c) => *c,
        Expr::Unary(op, a) => {
            let x = eval_node(a, inputs, flagged);
            apply_unary(*op, x, flagged)
        }
        Expr::Binary(op, a, b) => {
            let x = eval_node(a, inputs, flagged);
            let y = eval_node(b, inputs, flagged);
            apply_binary(*op, x, y, flagged)
        }
    }
}

impl Expr {
    /// Evaluates at one point using protected semantics. The result is always
    /// finite.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<f64, ExprError> {
        self.evaluate_with_status(inputs).map(|e| e.value)
    }

    pub fn evaluate_with_status(&self, inputs: &[f64]) -> Result<Evaluation, ExprError> {
        if let Some(m) = self.max_var() {
            if m >= inputs.len() {
                return Err(ExprError::InputShape {
                    expected: m + 1,
                    got: inputs.len(),
                });
            }
        }
        if let Some(pos) = inputs.iter().position(|x| !x.is_finite()) {
            return Err(ExprError::NonFiniteInput(pos));
        }
        Ok(self.eval_unchecked(inputs))
    }

    /// Like [`Expr::evaluate_with_status`] without input validation. Panics if
    /// a variable index is out of bounds.
    pub fn eval_unchecked(&self, inputs: &[f64]) -> Evaluation {
        let mut flagged = false;
        let value = eval_node(self, inputs, &mut flagged);
        Evaluation {
            value,
            status: if flagged {
                EvalStatus::Protected
            } else {
                EvalStatus::Clean
            },
        }
    }

    pub fn compile(&self) -> CompiledExpr {
        CompiledExpr::new(self)
    }
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Var(usize),
    Const(f64),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

/// Postfix form of an expression for column-wise evaluation over many points.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    code: Vec<Instr>,
}

impl CompiledExpr {
    pub fn new(expr: &Expr) -> CompiledExpr {
        fn emit(e: &Expr, code: &mut Vec<Instr>) {
            match e {
                Expr::Var(i) => code.push(Instr::Var(*i)),
                Expr::Const(c) => code.push(Instr::Const(*c)),
                Expr::Unary(op, a) => {
                    emit(a, code);
                    code.push(Instr::Unary(*op));
                }
                Expr::Binary(op, a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Binary(*op));
                }
            }
        }
        let mut code = Vec::with_capacity(expr.complexity());
        emit(expr, &mut code);
        CompiledExpr { code }
    }

    /// Evaluates over `columns` (one slice per input variable, each of length
    /// `n`). Protected semantics match [`Expr::evaluate`] exactly.
    pub fn eval_columns<C: AsRef<[f64]>>(&self, columns: &[C], n: usize) -> Vec<f64> {
        let mut stack: Vec<Vec<f64>> = Vec::with_capacity(8);
        let mut spare: Vec<Vec<f64>> = Vec::new();
        for instr in &self.code {
            match *instr {
                Instr::Var(i) => {
                    let mut buf = spare.pop().unwrap_or_default();
                    buf.clear();
                    buf.extend_from_slice(&columns[i].as_ref()[..n]);
                    stack.push(buf);
                }
                Instr::Const(c) => {
                    let mut buf = spare.pop().unwrap_or_default();
                    buf.clear();
                    buf.resize(n, c);
                    stack.push(buf);
                }
                Instr::Unary(op) => {
                    unary_column(op, stack.last_mut().expect("malformed program"));
                }
                Instr::Binary(op) => {
                    let rhs = stack.pop().expect("malformed program");
                    binary_column(op, stack.last_mut().expect("malformed program"), &rhs);
                    spare.push(rhs);
                }
            }
        }
        stack.pop().expect("empty program")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinaryOp::*;

    fn v(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn resistance_at_symmetric_point() {
        let e = Expr::binary(
            Pdiv,
            Expr::binary(Mul, v(0), v(1)),
            Expr::binary(Add, v(0), v(1)),
        );
        assert_eq!(e.evaluate(&[2.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn sum_at_worked_example_point() {
        let e = Expr::binary(Add, v(0), v(1));
        assert_eq!(e.evaluate(&[12.0, 0.0]).unwrap(), 12.0);
    }

    #[test]
    fn protected_operators() {
        let div = Expr::binary(Pdiv, v(0), v(1));
        let r = div.evaluate_with_status(&[5.0, 0.0]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.status, EvalStatus::Protected);

        let log = Expr::unary(UnaryOp::Plog, v(0));
        assert_eq!(log.evaluate(&[0.0]).unwrap(), 0.0);
        assert_eq!(log.evaluate(&[-std::f64::consts::E]).unwrap(), 1.0);

        let sqrt = Expr::unary(UnaryOp::Psqrt, v(0));
        assert_eq!(sqrt.evaluate(&[-4.0]).unwrap(), 2.0);

        let pow = Expr::binary(Pow, v(0), v(1));
        assert_eq!(pow.evaluate(&[0.0, -2.0]).unwrap(), 1.0);
        assert_eq!(pow.evaluate(&[10.0, 400.0]).unwrap(), CLAMP);
        assert_eq!(pow.evaluate(&[-10.0, 401.0]).unwrap(), -CLAMP);
        let nan = pow.evaluate_with_status(&[-2.0, 0.5]).unwrap();
        assert_eq!(nan.value, 0.0);
        assert!(!nan.status.is_clean());

        let exp = Expr::unary(UnaryOp::Exp, v(0));
        assert_eq!(exp.evaluate(&[1e5]).unwrap(), CLAMP);
    }

    #[test]
    fn input_shape_errors() {
        let e = Expr::binary(Add, v(0), v(2));
        assert_eq!(
            e.evaluate(&[1.0, 2.0]),
            Err(ExprError::InputShape {
                expected: 3,
                got: 2
            })
        );
        assert!(matches!(
            v(0).evaluate(&[f64::NAN]),
            Err(ExprError::NonFiniteInput(0))
        ));
    }

    #[test]
    fn compiled_matches_scalar() {
        let e = Expr::binary(
            Sub,
            Expr::unary(UnaryOp::Sin, Expr::binary(Pdiv, v(0), v(1))),
            Expr::binary(Pow, Expr::constant(1.5), v(1)),
        );
        let xs = [0.3, -1.0, 2.0, 0.0];
        let ys = [0.0, 2.0, -3.5, 0.0];
        let out = e.compile().eval_columns(&[&xs[..], &ys[..]], 4);
        for i in 0..4 {
            assert_eq!(out[i].to_bits(), e.evaluate(&[xs[i], ys[i]]).unwrap().to_bits());
        }
    }
}
