use std::collections::{BTreeMap, HashSet};

use super::process::{Process, Queue, Session};
use crate::config::{ChannelQueue, Configuration, QueueMsg};
use crate::global_lts::{global_transitions, AnnotatedGlobal};
use crate::label::TransitionLabel;
use crate::model::{active_roles, Diagnostic, LocalType, Role, RoleSet, Sort, Var};
use crate::subtyping::subtype;
use crate::syntax::render_local;
use crate::verify::{association_failure_given, derive_canonical_config_for, Verdict};

/// Sorts of expression variables and types of process variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    pub vars: BTreeMap<Var, Sort>,
    pub procs: BTreeMap<Var, LocalType>,
}

/// Treatment of receive branches that the type does not offer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TypingMode {
    #[default]
    Strict,
    /// Accept with a warning.
    Lenient,
}

struct Checker {
    mode: TypingMode,
    diags: Vec<Diagnostic>,
    /// Bodies of enclosing `mu` binders with the environment at the binder.
    recs: BTreeMap<Var, (TypeEnv, Process)>,
    /// `(X, T)` pairs assumed to hold while checking recursive bodies.
    assumed: HashSet<(Var, LocalType)>,
}

impl Checker {
    fn fail(&mut self, rule: &'static str, path: &[usize], msg: String) -> bool {
        self.diags.push(Diagnostic::error(rule, msg).at_path(path.to_vec()));
        false
    }

    fn check(&mut self, env: &TypeEnv, p: &Process, t: &LocalType, path: &mut Vec<usize>) -> bool {
        match p {
            Process::Inact => match t.unfold() {
                LocalType::End => true,
                u => self.fail("TInact", path, format!("0 against {}", render_local(&u))),
            },
            Process::Crashed => match t {
                LocalType::Stop => true,
                u => self.fail("TCrashed", path, format!("crashed process against {}", render_local(u))),
            },
            Process::Send { to, label, payload, cont } => {
                let LocalType::Select(q, bs) = t.unfold() else {
                    return self.fail("TSend", path, format!("send to {to} against {}", render_local(t)));
                };
                if q != *to {
                    return self.fail("TSend", path, format!("send to {to}, type selects towards {q}"));
                }
                let Some(b) = bs.iter().find(|b| b.label == *label) else {
                    return self.fail("TSend", path, format!("label {label} is not offered towards {to}"));
                };
                match payload.sort(&env.vars) {
                    Ok(s) if s == b.sort => {}
                    Ok(s) => {
                        return self.fail(
                            "TSend",
                            path,
                            format!("payload of {label} has sort {s}, expected {}", b.sort),
                        )
                    }
                    Err(e) => return self.fail("TExpr", path, e.to_string()),
                }
                path.push(0);
                let ok = self.check(env, cont, &b.cont, path);
                path.pop();
                ok
            }
            Process::Recv { from, branches } => {
                let LocalType::Branch(q, bs) = t.unfold() else {
                    return self.fail("TRecv", path, format!("receive from {from} against {}", render_local(t)));
                };
                if q != *from {
                    return self.fail("TRecv", path, format!("receive from {from}, type expects {q}"));
                }
                let mut ok = true;
                for tb in &bs {
                    if !branches.iter().any(|pb| pb.label == tb.label) {
                        ok = self.fail("TRecv", path, format!("no branch for {} from {from}", tb.label));
                    }
                }
                for (i, pb) in branches.iter().enumerate() {
                    path.push(i);
                    match bs.iter().find(|tb| tb.label == pb.label) {
                        Some(tb) => {
                            let mut inner = env.clone();
                            if let Some(x) = &pb.binder {
                                inner.vars.insert(x.clone(), tb.sort);
                            }
                            ok &= self.check(&inner, &pb.cont, &tb.cont, path);
                        }
                        None if pb.label.is_crash() => {
                            ok = self.fail("ExtraBranch", path, format!("crash branch for {from} is not in the type"))
                        }
                        None if self.mode == TypingMode::Lenient => self.diags.push(
                            Diagnostic::warning(
                                "ExtraBranch",
                                format!("branch {} from {from} is never used", pb.label),
                            )
                            .at_path(path.clone()),
                        ),
                        None => {
                            ok = self.fail(
                                "ExtraBranch",
                                path,
                                format!("branch {} from {from} is not in the type", pb.label),
                            )
                        }
                    }
                    path.pop();
                }
                ok
            }
            Process::If { cond, then, otherwise } => {
                match cond.sort(&env.vars) {
                    Ok(Sort::Bool) => {}
                    Ok(s) => return self.fail("TIf", path, format!("condition has sort {s}")),
                    Err(e) => return self.fail("TExpr", path, e.to_string()),
                }
                path.push(0);
                let a = self.check(env, then, t, path);
                path.pop();
                path.push(1);
                let b = self.check(env, otherwise, t, path);
                path.pop();
                a && b
            }
            Process::Rec(x, body) => {
                let mut inner = env.clone();
                inner.procs.remove(x);
                let saved = self.recs.insert(x.clone(), (inner.clone(), (**body).clone()));
                self.assumed.insert((x.clone(), t.clone()));
                path.push(0);
                let ok = self.check(&inner, body, t, path);
                path.pop();
                match saved {
                    Some(prev) => self.recs.insert(x.clone(), prev),
                    None => self.recs.remove(x),
                };
                ok
            }
            Process::Var(x) if self.recs.contains_key(x) => {
                if !self.assumed.insert((x.clone(), t.clone())) {
                    return true;
                }
                let (inner, body) = self.recs[x].clone();
                path.push(0);
                let ok = self.check(&inner, &body, t, path);
                path.pop();
                ok
            }
            Process::Var(x) => match env.procs.get(x) {
                Some(tx) if subtype(tx, t) => true,
                Some(tx) => self.fail(
                    "TVar",
                    path,
                    format!("{x} has type {} which is not a subtype of {}", render_local(tx), render_local(t)),
                ),
                None => self.fail("TVar", path, format!("unbound process variable {x}")),
            },
        }
    }
}

/// Checks `p` against `t` in strict mode. Diagnostics may include warnings
/// even when the check succeeds.
pub fn typecheck_process(theta: &TypeEnv, p: &Process, t: &LocalType) -> (bool, Vec<Diagnostic>) {
    typecheck_process_with(TypingMode::Strict, theta, p, t)
}

pub fn typecheck_process_with(
    mode: TypingMode,
    theta: &TypeEnv,
    p: &Process,
    t: &LocalType,
) -> (bool, Vec<Diagnostic>) {
    let mut c = Checker { mode, diags: Vec::new(), recs: BTreeMap::new(), assumed: HashSet::new() };
    let ok = c.check(theta, p, t, &mut Vec::new());
    (ok, c.diags)
}

/// Expected contents of one incoming queue: `None` is unavailable, otherwise
/// the message types per origin.
pub type QueueType = Option<BTreeMap<Role, Vec<QueueMsg>>>;

fn queue_type_of(q: &Queue) -> QueueType {
    match q {
        Queue::Unavailable => None,
        Queue::Messages(ms) => {
            let mut by_origin: BTreeMap<Role, Vec<QueueMsg>> = BTreeMap::new();
            for m in ms {
                by_origin
                    .entry(m.origin.clone())
                    .or_default()
                    .push(QueueMsg { label: m.label.clone(), sort: m.value.sort() });
            }
            Some(by_origin)
        }
    }
}

/// Checks a queue against per-origin message types. Only the order of
/// messages from the same origin matters.
pub fn typecheck_queue(q: &Queue, expected: &QueueType) -> (bool, Vec<Diagnostic>) {
    let actual = queue_type_of(q);
    let mut diags = Vec::new();
    match (&actual, expected) {
        (None, None) => {}
        (None, Some(_)) => {
            diags.push(Diagnostic::error("TQueue", "queue is unavailable but an available queue is expected"))
        }
        (Some(_), None) => {
            diags.push(Diagnostic::error("TQueue", "queue is available but an unavailable queue is expected"))
        }
        (Some(a), Some(e)) => {
            let origins: std::collections::BTreeSet<&Role> = a.keys().chain(e.keys()).collect();
            for o in origins {
                let xs = a.get(o).map(Vec::as_slice).unwrap_or(&[]);
                let ys = e.get(o).map(Vec::as_slice).unwrap_or(&[]);
                for k in 0..xs.len().max(ys.len()) {
                    let (x, y) = (xs.get(k), ys.get(k));
                    if x != y {
                        let show = |m: Option<&QueueMsg>| {
                            m.map_or("nothing".to_string(), |m| format!("{}({})", m.label, m.sort))
                        };
                        diags.push(Diagnostic::error(
                            "TQueue",
                            format!("message {k} from {o}: found {}, expected {}", show(x), show(y)),
                        ));
                    }
                }
            }
        }
    }
    (diags.is_empty(), diags)
}

/// Whether `m` is governed by `ann`: every process has its projection (or
/// `stop`, or `end` for roles outside the type) and the queues are
/// associated.
pub fn typecheck_session(m: &Session, ann: &AnnotatedGlobal, reliable: &RoleSet) -> Verdict {
    typecheck_session_with(TypingMode::Strict, m, ann, reliable)
}

pub fn typecheck_session_with(mode: TypingMode, m: &Session, ann: &AnnotatedGlobal, reliable: &RoleSet) -> Verdict {
    let roles: RoleSet = m.entries.keys().cloned().collect();
    for r in ann.g.mentioned_roles().iter().chain(&ann.crashed) {
        if !roles.contains(r) {
            return Verdict::violated(Vec::new(), format!("role {r} has no process"));
        }
    }
    let canon = match derive_canonical_config_for(ann, reliable, &roles) {
        Ok(c) => c,
        Err(e) => return Verdict::violated(Vec::new(), e.to_string()),
    };
    for (r, (p, _)) in &m.entries {
        let (ok, diags) = typecheck_process_with(mode, &TypeEnv::default(), p, &canon.gamma[r]);
        if !ok {
            let first = diags.iter().find(|d| d.is_error()).map(|d| d.to_string()).unwrap_or_default();
            return Verdict::violated(Vec::new(), format!("process of {r}: {first}"));
        }
    }
    let mut delta = BTreeMap::new();
    for (q, (_, queue)) in &m.entries {
        let by_origin = queue_type_of(queue);
        for p in &roles {
            if p == q {
                continue;
            }
            let ch = match &by_origin {
                None => ChannelQueue::Unavailable,
                Some(map) => ChannelQueue::Messages(map.get(p).cloned().unwrap_or_default()),
            };
            delta.insert((p.clone(), q.clone()), ch);
        }
        if let Some(map) = &by_origin {
            if let Some(stray) = map.keys().find(|o| !roles.contains(*o) || *o == q) {
                return Verdict::violated(Vec::new(), format!("queue of {q} holds a message from {stray}"));
            }
        }
    }
    let active = active_roles(&ann.g);
    let known: BTreeMap<Role, LocalType> =
        canon.gamma.iter().filter(|(r, _)| active.contains(*r)).map(|(r, t)| (r.clone(), t.clone())).collect();
    let c = Configuration { gamma: canon.gamma, delta };
    match association_failure_given(ann, &c, reliable, &known) {
        None => Verdict::holds("typed"),
        Some(f) => Verdict::violated(Vec::new(), format!("association: {f}")),
    }
}

/// The annotated global type governing `next` after the session step `lbl`:
/// a successor of `ann` by the same label if one types `next`, else `ann`
/// itself if it still does. Reducts are typed leniently: committing to a
/// branch removes the other labels from receivers' types while their
/// processes keep the now unreachable branches.
pub fn track_step(
    ann: &AnnotatedGlobal,
    reliable: &RoleSet,
    lbl: &TransitionLabel,
    next: &Session,
) -> Option<AnnotatedGlobal> {
    for (l, succ) in global_transitions(ann, reliable) {
        if &l == lbl && typecheck_session_with(TypingMode::Lenient, next, &succ, reliable).is_holds() {
            return Some(succ);
        }
    }
    typecheck_session_with(TypingMode::Lenient, next, ann, reliable).is_holds().then(|| ann.clone())
}
