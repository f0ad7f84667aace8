//! Seeded random simulation: one maximal run with uniform choice among the
//! enabled transitions.

use super::trace::{RawStep, Trace};
use crate::kernel::{
    apply_transition, enabled_transitions, is_valid_end_state, Model, ModelErrorInfo, SystemState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimEnd {
    ValidEnd,
    Deadlock,
    StepLimit,
}

#[derive(Debug)]
pub struct SimOutcome {
    pub trace: Trace,
    pub end: SimEnd,
    pub final_state: SystemState,
    pub steps: usize,
}

/// Same seed, same trace.
pub fn simulate(
    model: &Model,
    seed: u64,
    max_steps: usize,
) -> Result<SimOutcome, ModelErrorInfo> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SystemState::initial(model);
    let mut raw = Vec::new();
    let mut end = SimEnd::StepLimit;
    for _ in 0..max_steps {
        let enabled = enabled_transitions(model, &state)?;
        if enabled.is_empty() {
            end = if is_valid_end_state(model, &state) {
                SimEnd::ValidEnd
            } else {
                SimEnd::Deadlock
            };
            break;
        }
        let (pid, t) = enabled[rng.gen_range(0..enabled.len())].clone();
        let (next, _) = apply_transition(model, &state, pid, &t)?;
        raw.push(RawStep::Step(pid, t));
        state = next;
    }
    let steps = raw.len();
    let (trace, final_state) = Trace::replay(model, &raw, None)?;
    Ok(SimOutcome {
        trace,
        end,
        final_state,
        steps,
    })
}
