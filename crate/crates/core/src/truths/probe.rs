use crate::dataset::Dataset;
use crate::expr::CompiledExpr;

use super::{AuxiliaryTruth, SubstValue, TruthKind};

#[derive(Debug, Clone)]
enum Column {
    Base(usize),
    Owned(Vec<f64>),
}

/// Transformed copy of the dataset inputs, sharing untouched columns.
#[derive(Debug, Clone)]
struct View {
    cols: Vec<Column>,
}

impl View {
    fn identity(arity: usize) -> View {
        View {
            cols: (0..arity).map(Column::Base).collect(),
        }
    }

    fn swap(arity: usize, a: usize, b: usize) -> View {
        let mut v = View::identity(arity);
        v.cols.swap(a, b);
        v
    }

    fn slices<'a>(&'a self, base: &'a [Vec<f64>]) -> Vec<&'a [f64]> {
        self.cols
            .iter()
            .map(|c| match c {
                Column::Base(j) => base[*j].as_slice(),
                Column::Owned(v) => v.as_slice(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Probe {
    Symmetry(Vec<View>),
    Zero { views: Vec<View>, on_zero_set: Vec<bool> },
    Guarded { view: View, labels: Vec<f64> },
    InverseSwap { view: View, epsilon: f64 },
    Range { lo: f64, hi: f64 },
    Bounded { bounds: Vec<f64> },
    Sign { products: Vec<f64> },
    Reflection(Vec<View>),
}

/// Candidate-independent precomputation for evaluating many candidates'
/// truth error against one dataset.
#[derive(Debug, Clone)]
pub struct TruthProbes {
    n: usize,
    columns: Vec<Vec<f64>>,
    probes: Vec<Probe>,
}

impl TruthProbes {
    pub fn new(truths: &[AuxiliaryTruth], dataset: &Dataset) -> TruthProbes {
        let n = dataset.len();
        let arity = dataset.arity();
        let columns = dataset.columns();
        let probes = truths
            .iter()
            .map(|t| match &t.kind {
                TruthKind::Symmetry { pairs } => Probe::Symmetry(
                    pairs.iter().map(|&(a, b)| View::swap(arity, a, b)).collect(),
                ),
                TruthKind::ZeroCondition { vars } => {
                    let views = vars
                        .iter()
                        .map(|&v| {
                            let mut view = View::identity(arity);
                            view.cols[v] = Column::Owned(vec![0.0; n]);
                            view
                        })
                        .collect();
                    let on_zero_set = (0..n)
                        .map(|i| vars.iter().any(|&v| columns[v][i] == 0.0))
                        .collect();
                    Probe::Zero { views, on_zero_set }
                }
                TruthKind::GuardedValue {
                    substitution,
                    label,
                } => {
                    let mut view = View::identity(arity);
                    for &(v, value) in substitution {
                        view.cols[v] = match value {
                            SubstValue::Const(c) => Column::Owned(vec![c; n]),
                            SubstValue::Alias(u) => view.cols[u].clone(),
                        };
                    }
                    let labels = label.compile().eval_columns(&view.slices(&columns), n);
                    Probe::Guarded { view, labels }
                }
                TruthKind::InverseSwap { a, b, epsilon } => Probe::InverseSwap {
                    view: View::swap(arity, *a, *b),
                    epsilon: *epsilon,
                },
                TruthKind::Range { lo, hi, .. } => Probe::Range { lo: *lo, hi: *hi },
                TruthKind::OutputBoundedByInputs { vars } => Probe::Bounded {
                    bounds: (0..n)
                        .map(|i| vars.iter().map(|&v| columns[v][i]).fold(f64::INFINITY, f64::min))
                        .collect(),
                },
                TruthKind::SignAgreement { a, b } => Probe::Sign {
                    products: (0..n).map(|i| columns[*a][i] * columns[*b][i]).collect(),
                },
                TruthKind::Reflection { vars } => Probe::Reflection(
                    vars.iter()
                        .map(|&v| {
                            let mut view = View::identity(arity);
                            view.cols[v] = Column::Owned(columns[v].iter().map(|x| -x).collect());
                            view
                        })
                        .collect(),
                ),
            })
            .collect();
        TruthProbes {
            n,
            columns,
            probes,
        }
    }

    /// Input columns of the underlying dataset.
    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn eval(&self, compiled: &CompiledExpr, view: &View) -> Vec<f64> {
        compiled.eval_columns(&view.slices(&self.columns), self.n)
    }

    /// Largest violation over the dataset for each truth, in truth order.
    /// `base` must be the candidate's outputs on the untransformed inputs.
    pub fn max_violations(&self, compiled: &CompiledExpr, base: &[f64]) -> Vec<f64> {
        let max_of = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
        self.probes
            .iter()
            .map(|probe| match probe {
                Probe::Symmetry(views) | Probe::Reflection(views) => views
                    .iter()
                    .map(|v| {
                        let other = self.eval(compiled, v);
                        max_of(&mut base.iter().zip(&other).map(|(a, b)| (a - b).abs()))
                    })
                    .fold(0.0, f64::max),
                Probe::Zero { views, on_zero_set } => {
                    let direct = max_of(
                        &mut base
                            .iter()
                            .zip(on_zero_set)
                            .filter(|(_, z)| **z)
                            .map(|(f, _)| f.abs()),
                    );
                    views
                        .iter()
                        .map(|v| {
                            let zeroed = self.eval(compiled, v);
                            max_of(
                                &mut zeroed
                                    .iter()
                                    .zip(on_zero_set)
                                    .filter(|(_, z)| !**z)
                                    .map(|(f, _)| f.abs()),
                            )
                        })
                        .fold(direct, f64::max)
                }
                Probe::Guarded { view, labels } => {
                    let out = self.eval(compiled, view);
                    max_of(&mut out.iter().zip(labels).map(|(f, l)| (f - l).abs()))
                }
                Probe::InverseSwap { view, epsilon } => {
                    let other = self.eval(compiled, view);
                    max_of(&mut base.iter().zip(&other).map(|(a, b)| {
                        if a.abs() > *epsilon && b.abs() > *epsilon {
                            (a * b - 1.0).abs()
                        } else {
                            0.0
                        }
                    }))
                }
                Probe::Range { lo, hi } => {
                    max_of(&mut base.iter().map(|f| 0.0f64.max(lo - f).max(f - hi)))
                }
                Probe::Bounded { bounds } => {
                    max_of(&mut base.iter().zip(bounds).map(|(f, b)| 0.0f64.max(f - b)))
                }
                Probe::Sign { products } => max_of(&mut base.iter().zip(products).map(|(f, p)| {
                    if *p != 0.0 && f.signum() != p.signum() {
                        f.abs()
                    } else {
                        0.0
                    }
                })),
            })
            .collect()
    }

    /// Mean of [`TruthProbes::max_violations`]; 0 without truths.
    pub fn truth_error(&self, compiled: &CompiledExpr, base: &[f64]) -> f64 {
        if self.probes.is_empty() || self.n == 0 {
            return 0.0;
        }
        let maxima = self.max_violations(compiled, base);
        maxima.iter().sum::<f64>() / maxima.len() as f64
    }
}
