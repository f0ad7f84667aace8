//! Workflow verification toolkit.
//!
//! Compiles pattern-based workflow definitions into a channel-communicating
//! process model, explores the model exhaustively (deadlock detection and
//! LTL checking with counterexamples), and emits PROMELA source for
//! external cross-validation with SPIN.

pub mod checker;
pub mod dsl;
pub mod kernel;
pub mod ltl;
pub mod patterns;
pub mod promela;
