//! Line-oriented truth language.
//!
//! ```text
//! # comment
//! sym(r1, r2)          pairwise symmetry over the listed variables
//! zero(q1, q2)         zero condition
//! sz(r1, r2)           both of the above
//! inv_swap(i, r)       f(a, b) * f(b, a) = 1, optional third arg epsilon
//! range(0, 1)          output range; bounds may be inf/-inf, optional `closed`
//! out_le_min(r1, r2)   output <= smallest listed input
//! sign_agree(q1, q2)   output positive iff q1 * q2 positive
//! reflect(x)           f unchanged when x is negated
//! guard(m1=0 -> r2)    substitute, then output equals the expression
//! ```

use crate::expr::{text::parse_with_names, ExprError};

use super::{AuxiliaryTruth, SubstValue, TruthKind, TruthsError, INVERSE_SWAP_EPSILON};

fn syntax(line: usize, message: impl Into<String>) -> TruthsError {
    TruthsError::Syntax {
        line,
        message: message.into(),
    }
}

fn lookup(name: &str, names: &[String], line: usize) -> Result<usize, TruthsError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| TruthsError::UnknownVariable {
            line,
            name: name.to_string(),
        })
}

fn parse_number(s: &str, line: usize) -> Result<f64, TruthsError> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| syntax(line, format!("`{s}` is not a number"))),
    }
}

fn var_list(args: &[&str], names: &[String], line: usize, min: usize) -> Result<Vec<usize>, TruthsError> {
    if args.len() < min || args.iter().any(|a| a.is_empty()) {
        return Err(syntax(line, format!("expected at least {min} variable(s)")));
    }
    let vars = args
        .iter()
        .map(|a| lookup(a, names, line))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(syntax(line, format!("variable `{}` listed twice", names[*v])));
        }
    }
    Ok(vars)
}

fn pairs(vars: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            out.push((vars[i], vars[j]));
        }
    }
    out
}

fn tag(kind: &str, vars: &[usize], names: &[String]) -> String {
    std::iter::once(kind.to_string())
        .chain(vars.iter().map(|&v| names[v].clone()))
        .collect::<Vec<_>>()
        .join("_")
}

fn parse_guard(body: &str, names: &[String], line: usize) -> Result<TruthKind, TruthsError> {
    let (lhs, rhs) = body
        .split_once("->")
        .ok_or_else(|| syntax(line, "guard needs `->` before the output expression"))?;
    let mut substitution = Vec::new();
    for part in lhs.split(',') {
        let (var, value) = part
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `var=value`, found `{}`", part.trim())))?;
        let v = lookup(var.trim(), names, line)?;
        let value = value.trim();
        let value = match names.iter().position(|n| n == value) {
            Some(u) => SubstValue::Alias(u),
            None => SubstValue::Const(parse_number(value, line)?),
        };
        substitution.push((v, value));
    }
    let label = parse_with_names(rhs.trim(), names).map_err(|e| match e {
        ExprError::UnknownIdentifier(name) if !name.is_empty() => TruthsError::UnknownVariable { line, name },
        other => syntax(line, other.to_string()),
    })?;
    Ok(TruthKind::GuardedValue {
        substitution,
        label,
    })
}

fn parse_line(
    text: &str,
    names: &[String],
    line: usize,
) -> Result<Vec<(String, TruthKind)>, TruthsError> {
    let open = text
        .find('(')
        .ok_or_else(|| syntax(line, format!("expected `kind(...)`, found `{text}`")))?;
    if !text.ends_with(')') {
        return Err(syntax(line, "missing closing `)`"));
    }
    let head = text[..open].trim();
    let body = &text[open + 1..text.len() - 1];
    if head == "guard" {
        return Ok(vec![("guard".to_string(), parse_guard(body, names, line)?)]);
    }
    let args: Vec<&str> = body.split(',').map(str::trim).collect();
    let out = match head {
        "sym" => {
            let vars = var_list(&args, names, line, 2)?;
            vec![(tag("sym", &vars, names), TruthKind::Symmetry { pairs: pairs(&vars) })]
        }
        "zero" => {
            let vars = var_list(&args, names, line, 1)?;
            vec![(tag("zero", &vars, names), TruthKind::ZeroCondition { vars })]
        }
        "sz" => {
            let vars = var_list(&args, names, line, 2)?;
            vec![
                (tag("sym", &vars, names), TruthKind::Symmetry { pairs: pairs(&vars) }),
                (tag("zero", &vars, names), TruthKind::ZeroCondition { vars }),
            ]
        }
        "inv_swap" => {
            if !(2..=3).contains(&args.len()) {
                return Err(syntax(line, "inv_swap takes two variables and an optional epsilon"));
            }
            let vars = var_list(&args[..2], names, line, 2)?;
            let epsilon = match args.get(2) {
                Some(e) => parse_number(e, line)?,
                None => INVERSE_SWAP_EPSILON,
            };
            vec![(
                tag("inv_swap", &vars, names),
                TruthKind::InverseSwap {
                    a: vars[0],
                    b: vars[1],
                    epsilon,
                },
            )]
        }
        "range" => {
            if !(2..=3).contains(&args.len()) {
                return Err(syntax(line, "range takes lo, hi and an optional `open`/`closed`"));
            }
            let lo = parse_number(args[0], line)?;
            let hi = parse_number(args[1], line)?;
            if !(lo < hi) {
                return Err(syntax(line, format!("empty range ({lo}, {hi})")));
            }
            let open = match args.get(2).copied() {
                None | Some("open") => true,
                Some("closed") => false,
                Some(other) => return Err(syntax(line, format!("unknown bound type `{other}`"))),
            };
            vec![(
                "range".to_string(),
                TruthKind::Range {
                    lo,
                    hi,
                    lo_open: open,
                    hi_open: open,
                },
            )]
        }
        "out_le_min" => {
            let vars = var_list(&args, names, line, 1)?;
            vec![(tag("out_le_min", &vars, names), TruthKind::OutputBoundedByInputs { vars })]
        }
        "sign_agree" => {
            if args.len() != 2 {
                return Err(syntax(line, "sign_agree takes exactly two variables"));
            }
            let vars = var_list(&args, names, line, 2)?;
            vec![(
                tag("sign_agree", &vars, names),
                TruthKind::SignAgreement {
                    a: vars[0],
                    b: vars[1],
                },
            )]
        }
        "reflect" => {
            let vars = var_list(&args, names, line, 1)?;
            vec![(tag("reflect", &vars, names), TruthKind::Reflection { vars })]
        }
        other => return Err(syntax(line, format!("unknown truth kind `{other}`"))),
    };
    Ok(out)
}

/// Parses a whole truth file. Ids are derived from the kind and variables and
/// made unique with a numeric suffix.
pub fn parse_truths(text: &str, names: &[String]) -> Result<Vec<AuxiliaryTruth>, TruthsError> {
    let mut truths: Vec<AuxiliaryTruth> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        for (id, kind) in parse_line(content, names, i + 1)? {
            let mut unique = id.clone();
            let mut k = 2;
            while truths.iter().any(|t| t.id == unique) {
                unique = format!("{id}_{k}");
                k += 1;
            }
            truths.push(AuxiliaryTruth::new(unique, kind));
        }
    }
    Ok(truths)
}

/// Parses a single truth line. `sz(...)` expands to two truths.
pub fn parse_truth(text: &str, names: &[String]) -> Result<Vec<AuxiliaryTruth>, TruthsError> {
    parse_truths(text, names)
}
