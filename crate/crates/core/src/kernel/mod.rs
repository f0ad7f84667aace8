//! Operational semantics of the channel/process modeling language:
//! interleaved processes, bounded FIFO channels, executability, atomic and
//! d_step regions, escape sequences, and system-wide timeout.

pub mod cfg;
pub mod exec;
pub mod expr;
pub mod model;
pub mod state;
pub mod stmt;

pub use cfg::{Action, Cfg, Edge, EscapeScope, Loc, LocId, RegionKind};
pub use exec::{
    apply_transition, enabled_transitions, eval_expr, is_valid_end_state, Effect, EvalError,
    ExecResult, ModelErrorInfo, ModelErrorKind, Transition, GLOBAL_CTX,
};
pub use expr::{BinOp, ChanRef, Expr};
pub use model::{Model, ModelBuilder, Template, TemplateDef, MAX_PROCESSES};
pub use state::{canonical_state_digest, Pid, ProcessInstance, StateDigest, SystemState};
pub use stmt::{Decl, Stmt, Target, VarKind};
