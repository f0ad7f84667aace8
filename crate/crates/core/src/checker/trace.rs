//! Replayable counterexample traces.

use crate::kernel::{
    apply_transition, enabled_transitions, Model, ModelErrorInfo, Pid, SystemState, Transition,
};
use serde::Serialize;

/// One recorded interleaving step. `None` transitions are stutter steps of
/// a terminated run and are not emitted into traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawStep {
    Step(Pid, Transition),
    Stutter,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct TraceStep {
    pub step: usize,
    pub pid: Pid,
    pub template: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub stmt: String,
    pub sends: Vec<(String, i64)>,
    pub recvs: Vec<(String, i64)>,
    pub assigns: Vec<(String, i64)>,
}

/// A violating interleaving: a finite prefix and, for liveness
/// counterexamples, the index where the repeating cycle re-enters.
/// `lasso_start == steps.len()` marks a pure stutter at the final state.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lasso_start: Option<usize>,
    #[serde(skip)]
    pub raw: Vec<(Pid, Transition)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStyle {
    Text,
    Structured,
}

impl Trace {
    /// Builds a trace by replaying the recorded transitions from the
    /// initial state, validating that each step is enabled and recording
    /// its effects. Returns the final state alongside.
    pub fn replay(
        model: &Model,
        steps: &[RawStep],
        lasso_start: Option<usize>,
    ) -> Result<(Trace, SystemState), ModelErrorInfo> {
        let mut state = SystemState::initial(model);
        let mut out = Vec::new();
        let mut raw = Vec::new();
        let mut emitted_lasso_start = lasso_start;
        let mut emitted = 0usize;
        for (i, step) in steps.iter().enumerate() {
            if lasso_start == Some(i) {
                emitted_lasso_start = Some(emitted);
            }
            match step {
                RawStep::Stutter => {
                    // No state change; nothing to emit.
                }
                RawStep::Step(pid, t) => {
                    debug_assert!(
                        enabled_transitions(model, &state)
                            .map(|en| en.iter().any(|(p, tt)| p == pid && tt == t))
                            .unwrap_or(false),
                        "replayed transition must be enabled"
                    );
                    let pretty = t.pretty(model, &state, *pid);
                    let proc = &state.procs[*pid as usize];
                    let template = model.templates[proc.template].name.clone();
                    let label = model.templates[proc.template].cfg.locs[proc.loc]
                        .labels
                        .first()
                        .cloned();
                    let (next, effect) = apply_transition(model, &state, *pid, t)?;
                    out.push(TraceStep {
                        step: emitted,
                        pid: *pid,
                        template,
                        label,
                        stmt: pretty,
                        sends: effect.sends,
                        recvs: effect.recvs,
                        assigns: effect.assigns,
                    });
                    raw.push((*pid, t.clone()));
                    emitted += 1;
                    state = next;
                }
            }
        }
        if lasso_start == Some(steps.len()) {
            emitted_lasso_start = Some(emitted);
        }
        Ok((
            Trace {
                steps: out,
                lasso_start: emitted_lasso_start,
                raw,
            },
            state,
        ))
    }
}

/// Renders a validated trace. Text style prints one step per line; the
/// structured style emits line-delimited JSON records.
pub fn format_counterexample(trace: &Trace, style: TraceStyle) -> String {
    match style {
        TraceStyle::Text => {
            let mut out = String::new();
            for s in &trace.steps {
                if trace.lasso_start == Some(s.step) {
                    out.push_str("-- cycle starts here --\n");
                }
                let label = s
                    .label
                    .as_ref()
                    .map(|l| format!("@{} ", l))
                    .unwrap_or_default();
                let mut delta = Vec::new();
                for (c, v) in &s.sends {
                    delta.push(format!("{}!{}", c, v));
                }
                for (c, v) in &s.recvs {
                    delta.push(format!("{}?{}", c, v));
                }
                for (n, v) in &s.assigns {
                    delta.push(format!("{}={}", n, v));
                }
                out.push_str(&format!(
                    "{:3}: pid {} {} {}{} => {}\n",
                    s.step,
                    s.pid,
                    s.template,
                    label,
                    s.stmt,
                    if delta.is_empty() {
                        "-".to_string()
                    } else {
                        delta.join(", ")
                    }
                ));
            }
            if trace.lasso_start == Some(trace.steps.len()) {
                out.push_str("-- stutters here forever --\n");
            }
            out
        }
        TraceStyle::Structured => {
            let mut out = String::new();
            for s in &trace.steps {
                let rec = serde_json::json!({
                    "step": s.step,
                    "pid": s.pid,
                    "template": s.template,
                    "stmt": s.stmt,
                    "sends": s.sends,
                    "recvs": s.recvs,
                    "assigns": s.assigns,
                    "lassoStart": trace.lasso_start,
                });
                out.push_str(&rec.to_string());
                out.push('\n');
            }
            out
        }
    }
}
