//! Antecedent-satisfiability check for implication-shaped properties.

use super::explore::{explore, Limits};
use crate::kernel::{eval_expr, Model, ModelErrorInfo, GLOBAL_CTX};
use crate::ltl::Formula;
use serde::Serialize;

/// Result of a vacuity scan over `[] (antecedent -> consequent)`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub enum VacuityReport {
    /// Formula is not of the supported shape; the check is skipped.
    ShapeUnsupported,
    Checked {
        vacuous: bool,
        antecedent: String,
        states_scanned: usize,
        /// Proposition valuation of a state satisfying the antecedent, or
        /// of the scan outcome when none exists.
        evidence: String,
    },
}

/// Boolean value of a propositional (temporal-operator-free) formula in a
/// state, by proposition lookup.
fn eval_prop_formula(
    model: &Model,
    state_ix: usize,
    states: &[crate::kernel::SystemState],
    f: &Formula,
) -> Result<Option<bool>, ModelErrorInfo> {
    Ok(Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Prop(name) => match model.prop(name) {
            Some(e) => eval_expr(model, &states[state_ix], GLOBAL_CTX, e)? != 0,
            None => return Ok(None),
        },
        Formula::Not(x) => match eval_prop_formula(model, state_ix, states, x)? {
            Some(v) => !v,
            None => return Ok(None),
        },
        Formula::And(a, b) => {
            match (
                eval_prop_formula(model, state_ix, states, a)?,
                eval_prop_formula(model, state_ix, states, b)?,
            ) {
                (Some(x), Some(y)) => x && y,
                _ => return Ok(None),
            }
        }
        Formula::Or(a, b) => {
            match (
                eval_prop_formula(model, state_ix, states, a)?,
                eval_prop_formula(model, state_ix, states, b)?,
            ) {
                (Some(x), Some(y)) => x || y,
                _ => return Ok(None),
            }
        }
        Formula::Implies(a, b) => {
            match (
                eval_prop_formula(model, state_ix, states, a)?,
                eval_prop_formula(model, state_ix, states, b)?,
            ) {
                (Some(x), Some(y)) => !x || y,
                _ => return Ok(None),
            }
        }
        // Temporal operators make the antecedent non-propositional.
        _ => return Ok(None),
    }))
}

fn describe_valuation(
    model: &Model,
    state_ix: usize,
    states: &[crate::kernel::SystemState],
    f: &Formula,
) -> String {
    let mut parts = Vec::new();
    for name in f.props() {
        if let Some(e) = model.prop(&name) {
            let v = eval_expr(model, &states[state_ix], GLOBAL_CTX, e)
                .map(|v| v != 0)
                .unwrap_or(false);
            parts.push(format!("{}={}", name, v));
        }
    }
    parts.join(", ")
}

/// Reports whether the antecedent of `[] (a -> c)` is unsatisfied in every
/// reachable state. Non-implication shapes are reported as unsupported.
pub fn detect_vacuity(
    model: &Model,
    f: &Formula,
    limits: Limits,
) -> Result<VacuityReport, ModelErrorInfo> {
    let antecedent = match f {
        Formula::Always(inner) => match inner.as_ref() {
            Formula::Implies(a, _) => a.as_ref().clone(),
            _ => return Ok(VacuityReport::ShapeUnsupported),
        },
        _ => return Ok(VacuityReport::ShapeUnsupported),
    };
    let g = explore(model, limits)?;
    for ix in 0..g.states.len() {
        match eval_prop_formula(model, ix, &g.states, &antecedent)? {
            None => return Ok(VacuityReport::ShapeUnsupported),
            Some(true) => {
                return Ok(VacuityReport::Checked {
                    vacuous: false,
                    antecedent: antecedent.to_string(),
                    states_scanned: g.states.len(),
                    evidence: format!(
                        "state {} satisfies the antecedent: {}",
                        ix,
                        describe_valuation(model, ix, &g.states, &antecedent)
                    ),
                })
            }
            Some(false) => {}
        }
    }
    Ok(VacuityReport::Checked {
        vacuous: true,
        antecedent: antecedent.to_string(),
        states_scanned: g.states.len(),
        evidence: format!(
            "antecedent unsatisfied in all {} reachable states",
            g.states.len()
        ),
    })
}
