//! Association, bounded property checks and the association correspondence
//! harness.

mod assoc;
pub(crate) use assoc::association_failure_given;
mod checks;
mod correspondence;
mod graph;
mod verdict;

pub use assoc::{
    associated, association_failure, derive_canonical_config, derive_canonical_config_for, CanonicalError,
};
pub use checks::{
    check_deadlock_freedom, check_liveness, check_safety, explore, is_conforming_terminal, safety_defect,
};
pub use correspondence::check_correspondence;
pub use graph::{explore_graph, ExplorationBounds, Graph, StateBoundExceeded};
pub use verdict::{Status, Verdict, WitnessStep};
