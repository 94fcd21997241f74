use thiserror::Error;

use super::global::{Comm, GBranch, GlobalType};
use super::names::Role;
use super::roles::active_roles;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemoveError {
    #[error("role {0} is not active")]
    RoleNotActive(Role),
    #[error("transmission {sender}→{receiver} has no crash branch for the crash of {removed}")]
    NoCrashBranch { sender: Role, receiver: Role, removed: Role },
}

/// Removes every obligation of the crashed role `r` from `g`.
pub fn remove_role(g: &GlobalType, r: &Role) -> Result<GlobalType, RemoveError> {
    if !active_roles(g).contains(r) {
        return Err(RemoveError::RoleNotActive(r.clone()));
    }
    remove(g, r)
}

fn remove(g: &GlobalType, r: &Role) -> Result<GlobalType, RemoveError> {
    match g {
        GlobalType::End | GlobalType::RecVar(_) => Ok(g.clone()),
        GlobalType::Rec(v, body) => Ok(GlobalType::Rec(v.clone(), Box::new(remove(body, r)?))),
        GlobalType::Comm(c) => {
            let no_crash = || RemoveError::NoCrashBranch {
                sender: c.sender.clone(),
                receiver: c.receiver.clone(),
                removed: r.clone(),
            };
            match c.committed {
                None if &c.sender == r && c.receiver_crashed => {
                    // Both ends dead and nothing sent: follow the crash branch.
                    let k = c.crash_index().ok_or_else(no_crash)?;
                    remove(&c.branches[k].cont, r)
                }
                None if &c.sender == r => {
                    let k = c.crash_index().ok_or_else(no_crash)?;
                    Ok(GlobalType::Comm(Comm {
                        sender_crashed: true,
                        committed: Some(k),
                        branches: cleanse(&c.branches, r)?,
                        ..c.clone()
                    }))
                }
                None if &c.receiver == r => Ok(GlobalType::Comm(Comm {
                    receiver_crashed: true,
                    branches: cleanse(&c.branches, r)?,
                    ..c.clone()
                })),
                Some(_) if &c.sender == r && !c.sender_crashed => {
                    Ok(GlobalType::Comm(Comm { sender_crashed: true, branches: cleanse(&c.branches, r)?, ..c.clone() }))
                }
                Some(j) if &c.receiver == r => remove(&c.branches[j].cont, r),
                _ => Ok(GlobalType::Comm(Comm { branches: cleanse(&c.branches, r)?, ..c.clone() })),
            }
        }
    }
}

fn cleanse(branches: &[GBranch], r: &Role) -> Result<Vec<GBranch>, RemoveError> {
    branches.iter().map(|b| Ok(GBranch { label: b.label.clone(), sort: b.sort, cont: remove(&b.cont, r)? })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Label, Sort};
    use crate::syntax::{parse_protocol, render_global_brief};

    fn crash_msg(p: &str, q: &str, l: &str, cont: GlobalType, on_crash: GlobalType) -> GlobalType {
        GlobalType::comm(
            p,
            q,
            vec![GBranch::new(l, Sort::Unit, cont), GBranch::new(Label::crash(), Sort::Unit, on_crash)],
        )
    }

    #[test]
    fn logging_client_removal_keeps_the_crash_branch_en_route() {
        let d = parse_protocol(crate::fixtures::LOGGING_PROTOCOL).unwrap();
        let g = remove_role(&d.body, &Role::new("C")).unwrap();
        assert_eq!(render_global_brief(&g), "L→I: trigger. C⚡⇝I: crash. I→L: fatal. end");
    }

    #[test]
    fn inactive_roles_cannot_be_removed() {
        let g = GlobalType::msg("p", "q", "l", GlobalType::End);
        assert_eq!(remove_role(&g, &Role::new("r")), Err(RemoveError::RoleNotActive(Role::new("r"))));
    }

    #[test]
    fn removed_sender_needs_a_crash_branch() {
        let g = GlobalType::msg("p", "q", "l", GlobalType::End);
        assert!(matches!(remove_role(&g, &Role::new("p")), Err(RemoveError::NoCrashBranch { .. })));
    }

    #[test]
    fn removed_receiver_is_annotated_and_sender_stays_pending() {
        let g = GlobalType::msg("p", "q", "l", GlobalType::End);
        let GlobalType::Comm(c) = remove_role(&g, &Role::new("q")).unwrap() else { panic!() };
        assert!(c.receiver_crashed && !c.sender_crashed && c.committed.is_none());
    }

    #[test]
    fn en_route_message_to_removed_receiver_is_dropped() {
        let rest = GlobalType::msg("r", "s", "z", GlobalType::End);
        let GlobalType::Comm(c) = GlobalType::msg("p", "q", "l", rest.clone()) else { unreachable!() };
        let g = GlobalType::Comm(Comm { committed: Some(0), ..c });
        assert_eq!(remove_role(&g, &Role::new("q")).unwrap(), rest);
    }

    #[test]
    fn pending_sender_with_crashed_receiver_collapses_to_the_crash_continuation() {
        let g = crash_msg("p", "q", "l", GlobalType::End, GlobalType::msg("r", "s", "z", GlobalType::End));
        let g = remove_role(&g, &Role::new("q")).unwrap();
        let g = remove_role(&g, &Role::new("p")).unwrap();
        assert_eq!(g, GlobalType::msg("r", "s", "z", GlobalType::End));
    }
}
