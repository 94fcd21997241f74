//! Labelled transitions of annotated global types.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::label::TransitionLabel;
use crate::model::{active_roles, remove_role, Comm, GBranch, GlobalType, Role, RoleSet};

/// A global type paired with the set of roles that have crashed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedGlobal {
    pub crashed: RoleSet,
    pub g: GlobalType,
}

impl AnnotatedGlobal {
    pub fn new(g: GlobalType) -> Self {
        AnnotatedGlobal { crashed: BTreeSet::new(), g }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label {0} leads to more than one successor")]
pub struct AmbiguousLabel(pub TransitionLabel);

/// Every transition of `st`. Crashes of roles outside `reliable` happen only
/// at top level; all other actions may also fire underneath prefixes that
/// do not involve their subject.
pub fn global_transitions(st: &AnnotatedGlobal, reliable: &RoleSet) -> Vec<(TransitionLabel, AnnotatedGlobal)> {
    let mut out: Vec<(TransitionLabel, AnnotatedGlobal)> =
        steps(&st.g, &mut Vec::new(), &Blocked { roles: RoleSet::new(), all: st.g.mentioned_roles() })
            .into_iter()
            .map(|(l, g)| (l, AnnotatedGlobal { crashed: st.crashed.clone(), g }))
            .collect();
    for p in active_roles(&st.g) {
        if reliable.contains(&p) {
            continue;
        }
        if let Ok(g) = remove_role(&st.g, &p) {
            let mut crashed = st.crashed.clone();
            crashed.insert(p.clone());
            out.push((TransitionLabel::Crash(p), AnnotatedGlobal { crashed, g }));
        }
    }
    out
}

/// The successor of `st` under `lbl`, if any.
pub fn global_step(
    st: &AnnotatedGlobal,
    reliable: &RoleSet,
    lbl: &TransitionLabel,
) -> Result<Option<AnnotatedGlobal>, AmbiguousLabel> {
    let mut found: Option<AnnotatedGlobal> = None;
    for (l, next) in global_transitions(st, reliable) {
        if &l == lbl {
            match &found {
                Some(prev) if *prev != next => return Err(AmbiguousLabel(l)),
                _ => found = Some(next),
            }
        }
    }
    Ok(found)
}

/// Subjects excluded by enclosing prefixes. Actions of these roles would be
/// discarded by the context rules, so they are never generated.
struct Blocked {
    roles: RoleSet,
    all: RoleSet,
}

impl Blocked {
    fn extend(&self, more: &[&Role]) -> Blocked {
        let mut roles = self.roles.clone();
        roles.extend(more.iter().map(|r| (*r).clone()));
        Blocked { roles, all: self.all.clone() }
    }

    fn everyone(&self) -> bool {
        self.all.is_subset(&self.roles)
    }
}

// `visiting` holds the recursive types being unfolded on the current descent.
// A derivation that meets the same type twice can be shortened, so a repeat
// contributes nothing.
fn steps(g: &GlobalType, visiting: &mut Vec<GlobalType>, outer: &Blocked) -> Vec<(TransitionLabel, GlobalType)> {
    if outer.everyone() {
        return Vec::new();
    }
    match g {
        GlobalType::End | GlobalType::RecVar(_) => Vec::new(),
        GlobalType::Rec(..) => {
            if visiting.contains(g) {
                return Vec::new();
            }
            visiting.push(g.clone());
            let out = steps(&g.unfold_once(), visiting, outer);
            visiting.pop();
            out
        }
        GlobalType::Comm(c) => {
            let mut out = Vec::new();
            let blocked: Vec<&Role> = match c.committed {
                None => {
                    for (i, b) in c.branches.iter().enumerate() {
                        if b.label.is_crash() || outer.roles.contains(&c.sender) {
                            continue;
                        }
                        let lbl = TransitionLabel::send(c.sender.clone(), c.receiver.clone(), b.label.clone(), b.sort);
                        let next = if c.receiver_crashed {
                            b.cont.clone()
                        } else {
                            GlobalType::Comm(Comm { committed: Some(i), ..c.clone() })
                        };
                        out.push((lbl, next));
                    }
                    vec![&c.sender, &c.receiver]
                }
                Some(j) => {
                    let b = &c.branches[j];
                    let lbl = if b.label.is_crash() {
                        TransitionLabel::crash_detect(c.receiver.clone(), c.sender.clone())
                    } else {
                        TransitionLabel::recv(c.receiver.clone(), c.sender.clone(), b.label.clone(), b.sort)
                    };
                    if !outer.roles.contains(&c.receiver) {
                        out.push((lbl, b.cont.clone()));
                    }
                    vec![&c.receiver]
                }
            };
            out.extend(context_steps(c, &blocked, visiting, outer));
            out
        }
    }
}

/// Actions admitted by every continuation of `c` whose subject is not blocked.
fn context_steps(
    c: &Comm,
    blocked: &[&Role],
    visiting: &mut Vec<GlobalType>,
    outer: &Blocked,
) -> Vec<(TransitionLabel, GlobalType)> {
    let inner = outer.extend(blocked);
    let per_branch: Vec<Vec<(TransitionLabel, GlobalType)>> = c
        .branches
        .iter()
        .map(|b| {
            steps(&b.cont, visiting, &inner).into_iter().filter(|(l, _)| !blocked.contains(&l.subject())).collect()
        })
        .collect();
    let Some((first, rest)) = per_branch.split_first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (lbl, g0) in first {
        let mut conts = vec![g0.clone()];
        for other in rest {
            match other.iter().find(|(l, _)| l == lbl) {
                Some((_, g)) => conts.push(g.clone()),
                None => break,
            }
        }
        if conts.len() != per_branch.len() {
            continue;
        }
        let branches = c
            .branches
            .iter()
            .zip(conts)
            .map(|(b, cont)| GBranch { label: b.label.clone(), sort: b.sort, cont })
            .collect();
        out.push((lbl.clone(), GlobalType::Comm(Comm { branches, ..c.clone() })));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::model::{roles, Sort};
    use crate::syntax::{parse_protocol, render_global_brief};

    fn logging() -> (AnnotatedGlobal, RoleSet) {
        let d = parse_protocol(crate::fixtures::LOGGING_PROTOCOL).unwrap();
        (AnnotatedGlobal::new(d.body.clone()), d.reliable())
    }

    fn labels(st: &AnnotatedGlobal, reliable: &RoleSet) -> BTreeSet<String> {
        global_transitions(st, reliable).into_iter().map(|(l, _)| l.to_string()).collect()
    }

    fn step(st: &AnnotatedGlobal, reliable: &RoleSet, l: TransitionLabel) -> AnnotatedGlobal {
        global_step(st, reliable, &l).unwrap().unwrap()
    }

    #[test]
    fn initial_logging_transitions() {
        let (st, rel) = logging();
        // C is not involved in the pending trigger, so it may already send.
        let expected: BTreeSet<String> =
            ["Send(L,I,trigger)", "Send(C,I,read)", "Crash(C)"].into_iter().map(String::from).collect();
        assert_eq!(labels(&st, &rel), expected);
    }

    #[test]
    fn crash_successor_is_role_removal() {
        let (st, rel) = logging();
        let next = step(&st, &rel, TransitionLabel::crash("C"));
        assert_eq!(next.crashed, roles(["C"]));
        assert_eq!(next.g, crate::model::remove_role(&st.g, &Role::new("C")).unwrap());
    }

    #[test]
    fn end_has_no_transitions() {
        assert!(global_transitions(&AnnotatedGlobal::new(GlobalType::End), &RoleSet::new()).is_empty());
    }

    #[test]
    fn send_then_receive_then_detect() {
        let (st, rel) = logging();
        let sent = step(&st, &rel, TransitionLabel::send("L", "I", "trigger", Sort::Unit));
        assert!(render_global_brief(&sent.g).starts_with("L⇝I: trigger. C→I"));
        assert_eq!(global_step(&st, &rel, &TransitionLabel::send("I", "L", "fatal", Sort::Unit)), Ok(None));
        let crashed = step(&st, &rel, TransitionLabel::crash("C"));
        let sent = step(&crashed, &rel, TransitionLabel::send("L", "I", "trigger", Sort::Unit));
        let got = step(&sent, &rel, TransitionLabel::recv("I", "L", "trigger", Sort::Unit));
        let detected = step(&got, &rel, TransitionLabel::crash_detect("I", "C"));
        assert_eq!(render_global_brief(&detected.g), "I→L: fatal. end");
    }

    #[test]
    fn only_unreliable_removable_roles_crash() {
        let g = GlobalType::comm(
            "p",
            "q",
            vec![
                crate::model::GBranch::new("l", Sort::Unit, GlobalType::End),
                crate::model::GBranch::new(crate::model::Label::crash(), Sort::Unit, GlobalType::End),
            ],
        );
        let st = AnnotatedGlobal::new(g);
        let crashes =
            |rel: &RoleSet| labels(&st, rel).into_iter().filter(|l| l.starts_with("Crash")).collect::<Vec<_>>();
        assert_eq!(crashes(&RoleSet::new()), ["Crash(p)", "Crash(q)"]);
        assert!(crashes(&roles(["p", "q"])).is_empty());
        // L→I: trigger has no crash branch, so L cannot be removed even if unreliable.
        let (log, _) = logging();
        assert!(!labels(&log, &RoleSet::new()).contains("Crash(L)"));
    }

    #[test]
    fn receiver_blocked_under_pending_prefix() {
        // p→q: a. r→q: b. end; q cannot receive b before receiving a.
        let g = GlobalType::msg("p", "q", "a", GlobalType::msg("r", "q", "b", GlobalType::End));
        let rel = roles(["p", "q", "r"]);
        let st = AnnotatedGlobal::new(g);
        let st = step(&st, &rel, TransitionLabel::send("r", "q", "b", Sort::Unit));
        assert_eq!(labels(&st, &rel), BTreeSet::from(["Send(p,q,a)".to_string()]));
    }

    #[test]
    fn en_route_sender_can_be_active_yet_project_to_end() {
        // p→q{a. end, b. q→p: m. end}: after p sends a, p still occurs in the
        // untaken branch b, but the committed branch leaves p nothing to do.
        let g = GlobalType::comm(
            "p",
            "q",
            vec![
                crate::model::GBranch::new("a", Sort::Unit, GlobalType::End),
                crate::model::GBranch::new("b", Sort::Unit, GlobalType::msg("q", "p", "m", GlobalType::End)),
            ],
        );
        let rel = roles(["p", "q"]);
        let sent = step(&AnnotatedGlobal::new(g), &rel, TransitionLabel::send("p", "q", "a", Sort::Unit));
        let p = Role::new("p");
        assert!(crate::model::active_roles(&sent.g).contains(&p));
        assert_eq!(crate::projection::project(&sent.g, &p, &rel), Ok(crate::model::LocalType::End));
    }
}
