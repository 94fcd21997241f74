use super::process::{Process, Session};
use super::reduce::session_transitions;
use crate::model::RoleSet;
use crate::verify::{explore_graph, ExplorationBounds, Graph, StateBoundExceeded};

/// Every session reachable from `m0` with at most `max_crashes` crashes.
pub fn explore_sessions(
    m0: &Session,
    reliable: &RoleSet,
    max_crashes: usize,
    bounds: &ExplorationBounds,
) -> Result<Graph<Session>, StateBoundExceeded> {
    let crashed = |m: &Session| m.entries.values().filter(|(p, _)| *p == Process::Crashed).count();
    let base = crashed(m0);
    explore_graph(m0.clone(), |m| session_transitions(m, reliable, crashed(m) - base < max_crashes), |_| true, bounds)
}
