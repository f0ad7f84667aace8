//! Structured verdict documents.

use super::trace::Trace;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    #[serde(rename = "HOLDS")]
    Holds,
    #[serde(rename = "VIOLATED")]
    Violated,
    #[serde(rename = "DEADLOCK")]
    Deadlock,
    #[serde(rename = "MODEL_ERROR")]
    ModelError,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::Holds => "HOLDS",
            Outcome::Violated => "VIOLATED",
            Outcome::Deadlock => "DEADLOCK",
            Outcome::ModelError => "MODEL_ERROR",
        };
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub states_explored: usize,
    pub transitions_explored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuous: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
    /// False when a state or depth limit cut the exploration short.
    pub complete: bool,
}

impl Verdict {
    pub fn new(outcome: Outcome) -> Verdict {
        Verdict {
            outcome,
            property: None,
            mode: None,
            states_explored: 0,
            transitions_explored: 0,
            vacuous: None,
            error: None,
            trace: None,
            complete: true,
        }
    }

    pub fn model_error(err: impl fmt::Display) -> Verdict {
        let mut v = Verdict::new(Outcome::ModelError);
        v.error = Some(err.to_string());
        v
    }

    pub fn with_property(mut self, name: impl Into<String>) -> Verdict {
        self.property = Some(name.into());
        self
    }

    pub fn with_mode(mut self, mode: impl Into<String>) -> Verdict {
        self.mode = Some(mode.into());
        self
    }

    /// Deterministic single-line JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serialization")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialization")
    }
}
