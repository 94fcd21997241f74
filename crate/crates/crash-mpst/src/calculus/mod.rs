//! The session calculus: processes with crash-stop failures and their typing.

mod explore;
mod expr;
mod process;
mod reduce;
mod typing;

pub use explore::explore_sessions;
pub use expr::{eval_expr, BinOp, EvalError, Expr, Value};
pub use process::{Message, PBranch, Process, Queue, Session};
pub use reduce::{
    is_conforming_quiescent, run_session, run_session_observed, session_transitions, session_transitions_diag,
    state_digest, CrashSchedule, Outcome, StepDiagnostic, StuckBranch, Trace, TraceStep,
};
pub use typing::{
    track_step, typecheck_process, typecheck_process_with, typecheck_queue, typecheck_session, typecheck_session_with,
    QueueType, TypeEnv, TypingMode,
};
