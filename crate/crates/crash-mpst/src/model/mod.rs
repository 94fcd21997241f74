//! Global and local types and their structural analyses.

mod diag;
mod global;
mod local;
mod names;
mod remove;
mod roles;
mod wf;

pub use diag::{Diagnostic, Severity, Span, TermPath};
pub use global::{Comm, GBranch, GlobalType};
pub use local::{LBranch, LocalType};
pub use names::{roles, Label, Role, Sort, Var, CRASH};
pub use remove::{remove_role, RemoveError};
pub use roles::{active_roles, crashed_roles};
pub use wf::{well_annotated, well_formed};

/// A set of roles, used for both crashed and reliable sets.
pub type RoleSet = std::collections::BTreeSet<Role>;
