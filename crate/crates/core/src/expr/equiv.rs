use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, ExprError};

/// Sampling parameters for [`semantically_equivalent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquivalenceCheck {
    pub samples: usize,
    pub rtol: f64,
}

impl Default for EquivalenceCheck {
    fn default() -> Self {
        EquivalenceCheck {
            samples: 1000,
            rtol: 1e-6,
        }
    }
}

/// Numerical equivalence test: `a` and `b` agree to `rtol * (1 + |b(x)|)` on
/// `samples` points drawn uniformly from `ranges`. `b` is the reference:
/// points where it hits a protected fallback are redrawn, while `a` is
/// compared as evaluated, fallbacks included. Returns `false` if no clean
/// reference point can be found.
pub fn semantically_equivalent<R: Rng + ?Sized>(
    a: &Expr,
    b: &Expr,
    ranges: &[(f64, f64)],
    rng: &mut R,
    check: EquivalenceCheck,
) -> Result<bool, ExprError> {
    for (index, &(lo, hi)) in ranges.iter().enumerate() {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(ExprError::DegenerateRange { index, lo, hi });
        }
    }
    for e in [a, b] {
        if let Some(m) = e.max_var() {
            if m >= ranges.len() {
                return Err(ExprError::InputShape {
                    expected: m + 1,
                    got: ranges.len(),
                });
            }
        }
    }
    if a == b {
        return Ok(true);
    }
    let samples = check.samples.max(1);
    let max_attempts = samples * 20;
    let mut accepted = 0;
    let mut point = vec![0.0; ranges.len()];
    for _ in 0..max_attempts {
        for (x, &(lo, hi)) in point.iter_mut().zip(ranges) {
            *x = rng.random_range(lo..hi);
        }
        let eb = b.eval_unchecked(&point);
        if !eb.status.is_clean() {
            continue;
        }
        let ea = a.eval_unchecked(&point);
        if (ea.value - eb.value).abs() > check.rtol * (1.0 + eb.value.abs()) {
            return Ok(false);
        }
        accepted += 1;
        if accepted == samples {
            return Ok(true);
        }
    }
    Ok(accepted > 0)
}
