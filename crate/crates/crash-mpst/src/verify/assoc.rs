use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::{ChannelQueue, Configuration, QueueEnv, QueueMsg};
use crate::global_lts::AnnotatedGlobal;
use crate::model::{active_roles, GlobalType, LocalType, Role, RoleSet};
use crate::projection::{project, ProjectionError};
use crate::subtyping::subtype;

/// Whether the configuration `c` is associated with `ann`.
pub fn associated(ann: &AnnotatedGlobal, c: &Configuration, reliable: &RoleSet) -> bool {
    association_failure(ann, c, reliable).is_none()
}

/// The first association clause that fails, if any.
pub fn association_failure(ann: &AnnotatedGlobal, c: &Configuration, reliable: &RoleSet) -> Option<String> {
    association_failure_given(ann, c, reliable, &BTreeMap::new())
}

/// As [`association_failure`], reusing already computed projections.
pub(crate) fn association_failure_given(
    ann: &AnnotatedGlobal,
    c: &Configuration,
    reliable: &RoleSet,
    known: &BTreeMap<Role, LocalType>,
) -> Option<String> {
    let active = active_roles(&ann.g);
    for p in &active {
        let Some(t) = c.gamma.get(p) else {
            return Some(format!("A1: active role {p} has no entry"));
        };
        let proj = match known.get(p) {
            Some(proj) => Ok(proj.clone()),
            None => project(&ann.g, p, reliable),
        };
        match proj {
            Ok(proj) if subtype(t, &proj) => {}
            Ok(_) => return Some(format!("A1: the type of {p} is not a subtype of its projection")),
            Err(e) => return Some(format!("A1: {e}")),
        }
    }
    for p in &ann.crashed {
        if c.gamma.get(p) != Some(&LocalType::Stop) {
            return Some(format!("A2: crashed role {p} is not stop"));
        }
    }
    for (p, t) in &c.gamma {
        if !active.contains(p) && !ann.crashed.contains(p) && *t != LocalType::End {
            return Some(format!("A3: inactive role {p} is not end"));
        }
    }
    let demand = match queue_demand(&ann.g) {
        Ok(d) => d,
        Err(e) => return Some(format!("A4: {e}")),
    };
    for ((p, q), queue) in &c.delta {
        let crashed = ann.crashed.contains(q);
        match queue {
            ChannelQueue::Unavailable if crashed => {}
            ChannelQueue::Unavailable => return Some(format!("A4: queue {p}→{q} is unavailable but {q} is live")),
            ChannelQueue::Messages(_) if crashed => {
                return Some(format!("A4: queue {p}→{q} is available but {q} has crashed"))
            }
            ChannelQueue::Messages(ms) => {
                let want = demand.get(&(p.clone(), q.clone())).map(Vec::as_slice).unwrap_or(&[]);
                if ms.as_slice() != want {
                    return Some(format!("A4: queue {p}→{q} does not match the messages in transit"));
                }
            }
        }
    }
    for (pq, ms) in &demand {
        if !ms.is_empty() && !c.delta.contains_key(pq) {
            return Some(format!("A4: no queue {}→{} for messages in transit", pq.0, pq.1));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("branches of {0}→{1} disagree on the messages in transit")]
    InconsistentQueues(Role, Role),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Contents of every available queue demanded by the messages in transit
/// in `g`. Missing entries are empty.
fn queue_demand(g: &GlobalType) -> Result<BTreeMap<(Role, Role), Vec<QueueMsg>>, CanonicalError> {
    match g {
        GlobalType::End | GlobalType::RecVar(_) | GlobalType::Rec(..) => Ok(BTreeMap::new()),
        GlobalType::Comm(c) => {
            let inconsistent = || CanonicalError::InconsistentQueues(c.sender.clone(), c.receiver.clone());
            let mut demand: Option<BTreeMap<(Role, Role), Vec<QueueMsg>>> = None;
            for b in &c.branches {
                let mut d = queue_demand(&b.cont)?;
                d.retain(|_, v| !v.is_empty());
                match &demand {
                    Some(prev) if *prev != d => return Err(inconsistent()),
                    _ => demand = Some(d),
                }
            }
            let mut demand = demand.unwrap_or_default();
            let key = (c.sender.clone(), c.receiver.clone());
            let in_transit = match c.committed_branch() {
                Some(b) if !b.label.is_crash() => Some(QueueMsg { label: b.label.clone(), sort: b.sort }),
                _ => None,
            };
            match in_transit {
                Some(m) => demand.entry(key).or_default().insert(0, m),
                None if !c.receiver_crashed && demand.contains_key(&key) => return Err(inconsistent()),
                None => {}
            }
            Ok(demand)
        }
    }
}

/// The configuration associated with `ann` in which every active role has
/// exactly its projection. The domain is every role mentioned in the type
/// plus the crashed roles.
pub fn derive_canonical_config(ann: &AnnotatedGlobal, reliable: &RoleSet) -> Result<Configuration, CanonicalError> {
    let mut roles: RoleSet = ann.g.mentioned_roles();
    roles.extend(ann.crashed.iter().cloned());
    derive_canonical_config_for(ann, reliable, &roles)
}

/// As [`derive_canonical_config`], over an explicit role domain.
pub fn derive_canonical_config_for(
    ann: &AnnotatedGlobal,
    reliable: &RoleSet,
    roles: &RoleSet,
) -> Result<Configuration, CanonicalError> {
    let active = active_roles(&ann.g);
    let mut gamma = BTreeMap::new();
    for r in roles {
        let t = if ann.crashed.contains(r) {
            LocalType::Stop
        } else if active.contains(r) {
            project(&ann.g, r, reliable)?
        } else {
            LocalType::End
        };
        gamma.insert(r.clone(), t);
    }
    let demand = queue_demand(&ann.g)?;
    let mut delta = QueueEnv::new();
    for p in roles {
        for q in roles {
            if p == q {
                continue;
            }
            let queue = if ann.crashed.contains(q) {
                ChannelQueue::Unavailable
            } else {
                ChannelQueue::Messages(demand.get(&(p.clone(), q.clone())).cloned().unwrap_or_default())
            };
            delta.insert((p.clone(), q.clone()), queue);
        }
    }
    Ok(Configuration { gamma, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global_lts::global_step;
    use crate::label::TransitionLabel;
    use crate::model::{roles, Label, Sort};
    use crate::syntax::{parse_local, parse_protocol};

    fn logging() -> (AnnotatedGlobal, RoleSet) {
        let d = parse_protocol(crate::fixtures::LOGGING_PROTOCOL).unwrap();
        (AnnotatedGlobal::new(d.body.clone()), d.reliable())
    }

    #[test]
    fn canonical_config_is_associated() {
        let (ann, rel) = logging();
        let c = derive_canonical_config(&ann, &rel).unwrap();
        assert_eq!(c.gamma.len(), 3);
        assert!(c.delta.values().all(ChannelQueue::is_empty_available));
        assert!(associated(&ann, &c, &rel));
    }

    #[test]
    fn subtypes_of_projections_are_associated() {
        let (ann, rel) = logging();
        let mut c = derive_canonical_config(&ann, &rel).unwrap();
        // An extra external-choice arm is a subtype.
        c.gamma.insert(Role::new("C"), parse_local("I ⊕ read. I &{ report(Str). end, other. end }").unwrap());
        assert!(associated(&ann, &c, &rel));
        c.gamma.insert(Role::new("C"), parse_local("I ⊕ read. end").unwrap());
        assert!(association_failure(&ann, &c, &rel).unwrap().starts_with("A1"));
    }

    #[test]
    fn crashed_and_inactive_roles() {
        let (ann, rel) = logging();
        let crashed = global_step(&ann, &rel, &TransitionLabel::crash("C")).unwrap().unwrap();
        let mut c = derive_canonical_config(&crashed, &rel).unwrap();
        assert_eq!(c.gamma[&Role::new("C")], LocalType::Stop);
        assert_eq!(c.queue(&Role::new("I"), &Role::new("C")), &ChannelQueue::Unavailable);
        assert!(associated(&crashed, &c, &rel));
        c.gamma.insert(Role::new("C"), LocalType::End);
        assert!(association_failure(&crashed, &c, &rel).unwrap().starts_with("A2"));
        let mut extra = derive_canonical_config(&ann, &rel).unwrap();
        extra.gamma.insert(Role::new("Z"), parse_local("C ⊕ x. end").unwrap());
        assert!(association_failure(&ann, &extra, &rel).unwrap().starts_with("A3"));
    }

    #[test]
    fn queues_must_hold_exactly_the_messages_in_transit() {
        let (ann, rel) = logging();
        let sent = global_step(&ann, &rel, &TransitionLabel::send("L", "I", "trigger", Sort::Unit)).unwrap().unwrap();
        let c = derive_canonical_config(&sent, &rel).unwrap();
        let trigger = QueueMsg { label: Label::new("trigger"), sort: Sort::Unit };
        assert_eq!(c.queue(&Role::new("L"), &Role::new("I")), &ChannelQueue::Messages(vec![trigger]));
        assert!(associated(&sent, &c, &rel));
        let mut empty = c.clone();
        empty.delta.insert((Role::new("L"), Role::new("I")), ChannelQueue::Messages(Vec::new()));
        assert!(association_failure(&sent, &empty, &rel).unwrap().starts_with("A4"));
        assert!(!associated(&ann, &c, &rel));
    }

    #[test]
    fn explicit_domains_add_end_roles() {
        let (ann, rel) = logging();
        let c = derive_canonical_config_for(&ann, &rel, &roles(["C", "I", "L", "X"])).unwrap();
        assert_eq!(c.gamma[&Role::new("X")], LocalType::End);
        assert!(associated(&ann, &c, &rel));
    }
}
