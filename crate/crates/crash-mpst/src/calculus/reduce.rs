use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::{eval_expr, EvalError};
use super::process::{Message, Process, Queue, Session};
use crate::label::TransitionLabel;
use crate::model::{Label, Role, RoleSet};

/// A received message that matches no branch of its receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StuckBranch {
    pub role: Role,
    pub from: Role,
    pub label: Label,
}

impl fmt::Display for StuckBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} has no branch for {} from {}", self.role, self.label, self.from)
    }
}

/// Why a process cannot take its next step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepDiagnostic {
    Stuck(StuckBranch),
    Eval { role: Role, error: EvalError },
}

impl fmt::Display for StepDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepDiagnostic::Stuck(s) => write!(f, "StuckBranch: {s}"),
            StepDiagnostic::Eval { role, error } => write!(f, "{role}: {error}"),
        }
    }
}

/// Unfolds recursion and resolves conditionals until a prefix, `0` or a
/// crashed process is reached. Guardedness makes this terminate.
fn head_normal(p: &Process) -> Result<Process, EvalError> {
    let mut p = p.clone();
    loop {
        p = match p {
            Process::Rec(..) => p.unfold_once(),
            Process::If { cond, then, otherwise } => match eval_expr(&cond, &BTreeMap::new())? {
                super::Value::Bool(true) => *then,
                super::Value::Bool(false) => *otherwise,
                v => return Err(EvalError::SortError(format!("condition of sort {}", v.sort()))),
            },
            other => return Ok(other),
        };
    }
}

fn crashable(p: &Process) -> bool {
    !matches!(p, Process::Inact | Process::Crashed)
}

/// Every reduction of `m`, with diagnostics for processes that are stuck on
/// an unmatched message or a failed evaluation.
pub fn session_transitions_diag(
    m: &Session,
    reliable: &RoleSet,
    allow_crash: bool,
) -> (Vec<(TransitionLabel, Session)>, Vec<StepDiagnostic>) {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (p, (proc_, queue)) in &m.entries {
        if allow_crash && crashable(proc_) && !reliable.contains(p) {
            let mut next = m.clone();
            next.entries.insert(p.clone(), (Process::Crashed, Queue::Unavailable));
            out.push((TransitionLabel::Crash(p.clone()), next));
        }
        let norm = match head_normal(proc_) {
            Ok(n) => n,
            Err(error) => {
                diags.push(StepDiagnostic::Eval { role: p.clone(), error });
                continue;
            }
        };
        match norm {
            Process::Send { to, label, payload, cont } => {
                let value = match eval_expr(&payload, &BTreeMap::new()) {
                    Ok(v) => v,
                    Err(error) => {
                        diags.push(StepDiagnostic::Eval { role: p.clone(), error });
                        continue;
                    }
                };
                let lbl = TransitionLabel::send(p.clone(), to.clone(), label.clone(), value.sort());
                let mut next = m.clone();
                next.entries.get_mut(p).expect("own entry").0 = *cont;
                if let Some((_, Queue::Messages(ms))) = next.entries.get_mut(&to) {
                    ms.push(Message { origin: p.clone(), label, value });
                }
                out.push((lbl, next));
            }
            Process::Recv { from, branches } => {
                let Queue::Messages(ms) = queue else { continue };
                if let Some(k) = ms.iter().position(|msg| msg.origin == from) {
                    let msg = &ms[k];
                    let Some(b) = branches.iter().find(|b| b.label == msg.label && !b.label.is_crash()) else {
                        diags.push(StepDiagnostic::Stuck(StuckBranch {
                            role: p.clone(),
                            from: from.clone(),
                            label: msg.label.clone(),
                        }));
                        continue;
                    };
                    let cont = match &b.binder {
                        Some(x) => b.cont.subst_value(x, &msg.value),
                        None => b.cont.clone(),
                    };
                    let lbl = TransitionLabel::recv(p.clone(), from.clone(), msg.label.clone(), msg.value.sort());
                    let mut rest = ms.clone();
                    rest.remove(k);
                    let mut next = m.clone();
                    next.entries.insert(p.clone(), (cont, Queue::Messages(rest)));
                    out.push((lbl, next));
                } else if m.process(&from) == Some(&Process::Crashed) {
                    if let Some(b) = branches.iter().find(|b| b.label.is_crash()) {
                        let mut next = m.clone();
                        next.entries.get_mut(p).expect("own entry").0 = b.cont.clone();
                        out.push((TransitionLabel::crash_detect(p.clone(), from.clone()), next));
                    }
                }
            }
            _ => {}
        }
    }
    (out, diags)
}

/// Every reduction of `m`. Conditionals and recursion unfold silently.
pub fn session_transitions(m: &Session, reliable: &RoleSet, allow_crash: bool) -> Vec<(TransitionLabel, Session)> {
    session_transitions_diag(m, reliable, allow_crash).0
}

/// Whether every entry is `(0, ε)` or `(crashed, ⊘)`.
pub fn is_conforming_quiescent(m: &Session) -> bool {
    m.entries.values().all(|(p, q)| match p {
        Process::Inact => q.is_empty_available(),
        Process::Crashed => *q == Queue::Unavailable,
        _ => false,
    })
}

/// Resolves the crash nondeterminism of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum CrashSchedule {
    /// Before each step, crash a random unreliable live role with the given
    /// probability, at most `max_crashes` times. The next action is chosen at
    /// random as well.
    Seeded { seed: u64, crash_probability: f64, max_crashes: usize },
    /// Crash `role` right before the non-crash step with the given index;
    /// the next action is always the least enabled label.
    Exact(Vec<(usize, Role)>),
}

impl CrashSchedule {
    pub fn none() -> Self {
        CrashSchedule::Exact(Vec::new())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub label: TransitionLabel,
    /// Digest of the state after the step.
    pub digest: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// No non-crash reduction is enabled.
    Quiescent,
    MaxStepsExceeded,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial_digest: u64,
    pub steps: Vec<TraceStep>,
    pub final_state: Session,
    pub outcome: Outcome,
    pub diagnostics: Vec<StepDiagnostic>,
}

impl Trace {
    pub fn labels(&self) -> Vec<TransitionLabel> {
        self.steps.iter().map(|s| s.label.clone()).collect()
    }
}

/// FNV-1a digest of a session.
pub fn state_digest(m: &Session) -> u64 {
    let mut h = FnvHasher::default();
    m.hash(&mut h);
    h.finish()
}

/// Runs `m0` to quiescence or `max_steps` non-crash steps.
pub fn run_session(m0: &Session, reliable: &RoleSet, schedule: &CrashSchedule, max_steps: usize) -> Trace {
    run_session_observed(m0, reliable, schedule, max_steps, |_, _| {})
}

/// As [`run_session`], calling `observe` after every step.
pub fn run_session_observed(
    m0: &Session,
    reliable: &RoleSet,
    schedule: &CrashSchedule,
    max_steps: usize,
    mut observe: impl FnMut(&TransitionLabel, &Session),
) -> Trace {
    let mut rng = match schedule {
        CrashSchedule::Seeded { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        CrashSchedule::Exact(_) => None,
    };
    let mut m = m0.clone();
    let mut steps = Vec::new();
    let mut crashes = 0;
    let mut diagnostics = Vec::new();
    let mut push = |m: &mut Session, lbl: TransitionLabel, next: Session, steps: &mut Vec<TraceStep>| {
        observe(&lbl, &next);
        steps.push(TraceStep { label: lbl, digest: state_digest(&next) });
        *m = next;
    };
    for k in 0.. {
        let victims: Vec<Role> = match (schedule, rng.as_mut()) {
            (CrashSchedule::Exact(events), _) => {
                events.iter().filter(|(at, _)| *at == k).map(|(_, r)| r.clone()).collect()
            }
            (CrashSchedule::Seeded { crash_probability, max_crashes, .. }, Some(rng)) => {
                let live: Vec<Role> = m
                    .entries
                    .iter()
                    .filter(|(r, (p, _))| crashable(p) && !reliable.contains(*r))
                    .map(|(r, _)| r.clone())
                    .collect();
                if crashes < *max_crashes && !live.is_empty() && rng.gen_bool(crash_probability.clamp(0.0, 1.0)) {
                    live.choose(rng).cloned().into_iter().collect()
                } else {
                    Vec::new()
                }
            }
            (CrashSchedule::Seeded { .. }, None) => unreachable!("seeded schedules own a generator"),
        };
        for r in victims {
            let crash = session_transitions(&m, reliable, true)
                .into_iter()
                .find(|(l, _)| *l == TransitionLabel::Crash(r.clone()));
            if let Some((lbl, next)) = crash {
                crashes += 1;
                push(&mut m, lbl, next, &mut steps);
            }
        }
        let (mut enabled, diags) = session_transitions_diag(&m, reliable, false);
        for d in diags {
            if !diagnostics.contains(&d) {
                diagnostics.push(d);
            }
        }
        if enabled.is_empty() {
            return Trace {
                initial_digest: state_digest(m0),
                steps,
                final_state: m,
                outcome: Outcome::Quiescent,
                diagnostics,
            };
        }
        if k == max_steps {
            return Trace {
                initial_digest: state_digest(m0),
                steps,
                final_state: m,
                outcome: Outcome::MaxStepsExceeded,
                diagnostics,
            };
        }
        let pick = match rng.as_mut() {
            Some(rng) => rng.gen_range(0..enabled.len()),
            None => {
                let keys: Vec<String> = enabled.iter().map(|(l, _)| l.to_string()).collect();
                (0..enabled.len()).min_by(|&a, &b| keys[a].cmp(&keys[b])).expect("nonempty")
            }
        };
        let (lbl, next) = enabled.swap_remove(pick);
        push(&mut m, lbl, next, &mut steps);
    }
    unreachable!("the step loop returns")
}
