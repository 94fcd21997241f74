use std::collections::BTreeMap;

use crash_mpst::calculus::Trace;
use crash_mpst::verify::{ExplorationBounds, Verdict};
use serde::Serialize;

#[derive(Serialize)]
pub struct VerifyReport {
    pub protocol: String,
    pub reliable: Vec<String>,
    pub projections: BTreeMap<String, String>,
    pub checks: Checks,
    pub bounds: Bounds,
}

#[derive(Serialize)]
pub struct Checks {
    pub safety: CheckReport,
    pub deadlock_freedom: CheckReport,
    pub liveness: CheckReport,
    pub correspondence: CheckReport,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub status: String,
    pub witness: Option<Vec<WitnessLabel>>,
    pub reason: String,
}

#[derive(Serialize)]
pub struct WitnessLabel {
    pub label: String,
}

impl From<&Verdict> for CheckReport {
    fn from(v: &Verdict) -> Self {
        CheckReport {
            status: v.status.as_str().to_string(),
            witness: v
                .witness
                .as_ref()
                .map(|w| w.iter().map(|s| WitnessLabel { label: s.label.to_string() }).collect()),
            reason: v.reason.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct Bounds {
    pub queue_bound: usize,
    pub state_bound: usize,
    pub cycle_len_bound: usize,
}

impl From<&ExplorationBounds> for Bounds {
    fn from(b: &ExplorationBounds) -> Self {
        Bounds { queue_bound: b.queue_bound, state_bound: b.state_bound, cycle_len_bound: b.cycle_len_bound }
    }
}

#[derive(Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub label: String,
    pub digest: String,
}

#[derive(Serialize)]
pub struct TraceReport {
    pub initial_digest: String,
    pub trace: Vec<TraceEntry>,
    pub outcome: String,
    pub conforming: bool,
    pub final_state: String,
    pub diagnostics: Vec<String>,
}

pub fn digest(d: u64) -> String {
    format!("{d:016x}")
}

impl TraceReport {
    pub fn new(t: &Trace, conforming: bool, outcome: &str) -> Self {
        TraceReport {
            initial_digest: digest(t.initial_digest),
            trace: t
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| TraceEntry { step: i + 1, label: s.label.to_string(), digest: digest(s.digest) })
                .collect(),
            outcome: outcome.to_string(),
            conforming,
            final_state: t.final_state.to_string(),
            diagnostics: t.diagnostics.iter().map(ToString::to_string).collect(),
        }
    }
}
