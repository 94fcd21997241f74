use std::collections::BTreeSet;

use super::global::GlobalType;
use super::names::Role;

/// Roles that still have to act in `g`.
///
/// A pending `p→q` contributes both live endpoints. An en-route `p⇝q`
/// contributes only `q`: the sender has already acted.
pub fn active_roles(g: &GlobalType) -> BTreeSet<Role> {
    let mut active = BTreeSet::new();
    let mut crashed = BTreeSet::new();
    collect(g, &mut active, &mut crashed);
    active
}

/// Roles carrying a crash annotation on a pending transmission in `g`.
///
/// A crashed sender of an en-route message is not counted: it only
/// counts as crashed where it occurs crashed in a continuation.
pub fn crashed_roles(g: &GlobalType) -> BTreeSet<Role> {
    let mut active = BTreeSet::new();
    let mut crashed = BTreeSet::new();
    collect(g, &mut active, &mut crashed);
    crashed
}

// Recursion variables contribute nothing, so analysing a body once gives the
// least solution for its unfoldings.
fn collect(g: &GlobalType, active: &mut BTreeSet<Role>, crashed: &mut BTreeSet<Role>) {
    match g {
        GlobalType::End | GlobalType::RecVar(_) => {}
        GlobalType::Rec(_, body) => collect(body, active, crashed),
        GlobalType::Comm(c) => {
            if c.is_pending() {
                active.insert(c.sender.clone());
                if c.receiver_crashed {
                    crashed.insert(c.receiver.clone());
                } else {
                    active.insert(c.receiver.clone());
                }
            } else {
                active.insert(c.receiver.clone());
            }
            for b in &c.branches {
                collect(&b.cont, active, crashed);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{roles, Comm};

    fn en_route(p: &str, q: &str, cont: GlobalType) -> GlobalType {
        match GlobalType::msg(p, q, "l", cont) {
            GlobalType::Comm(c) => GlobalType::Comm(Comm { committed: Some(0), ..c }),
            _ => unreachable!(),
        }
    }

    #[test]
    fn pending_prefix_activates_both_ends() {
        let g = GlobalType::msg("p", "q", "l", GlobalType::End);
        assert_eq!(active_roles(&g), roles(["p", "q"]));
        assert!(crashed_roles(&g).is_empty());
    }

    #[test]
    fn en_route_prefix_activates_only_the_receiver() {
        assert_eq!(active_roles(&en_route("p", "q", GlobalType::End)), roles(["q"]));
        let g = en_route("p", "q", GlobalType::msg("p", "r", "m", GlobalType::End));
        assert_eq!(active_roles(&g), roles(["p", "q", "r"]));
    }

    #[test]
    fn crashed_receiver_is_counted_as_crashed_not_active() {
        let g = match GlobalType::msg("p", "q", "l", GlobalType::End) {
            GlobalType::Comm(c) => GlobalType::Comm(Comm { receiver_crashed: true, ..c }),
            _ => unreachable!(),
        };
        assert_eq!(active_roles(&g), roles(["p"]));
        assert_eq!(crashed_roles(&g), roles(["q"]));
    }

    #[test]
    fn recursion_is_analysed_once() {
        let g = GlobalType::rec("t", GlobalType::msg("p", "q", "l", GlobalType::var("t")));
        assert_eq!(active_roles(&g), roles(["p", "q"]));
    }
}
