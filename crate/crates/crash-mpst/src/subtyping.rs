//! Coinductive subtyping on local types.

use std::collections::HashSet;

use crate::model::{LBranch, LocalType};

/// Decides `s ⩽ t`.
///
/// Pairs already under examination are assumed related, which reads the
/// rules as a greatest fixpoint. Closed contractive types have finitely many
/// unfoldings, so the search terminates.
pub fn subtype(s: &LocalType, t: &LocalType) -> bool {
    Checker::default().check(s, t)
}

#[derive(Default)]
struct Checker {
    assumed: HashSet<(LocalType, LocalType)>,
}

impl Checker {
    fn check(&mut self, s: &LocalType, t: &LocalType) -> bool {
        if s == t && s.is_closed() {
            return true;
        }
        if self.assumed.contains(&(s.clone(), t.clone())) {
            return true;
        }
        if matches!(s, LocalType::Rec(..)) || matches!(t, LocalType::Rec(..)) {
            self.assumed.insert((s.clone(), t.clone()));
            return self.check(&s.unfold(), &t.unfold());
        }
        match (s, t) {
            (LocalType::End, LocalType::End) | (LocalType::Stop, LocalType::Stop) => true,
            (LocalType::RecVar(x), LocalType::RecVar(y)) => x == y,
            (LocalType::Select(p, js), LocalType::Select(q, is)) => {
                if p != q || !js.iter().all(|j| find(is, j).is_some()) {
                    return false;
                }
                self.assumed.insert((s.clone(), t.clone()));
                js.iter().all(|j| {
                    let i = find(is, j).expect("inclusion checked");
                    self.check(&j.cont, &i.cont)
                })
            }
            (LocalType::Branch(p, js), LocalType::Branch(q, is)) => {
                if p != q || !is.iter().all(|i| find(js, i).is_some()) {
                    return false;
                }
                let pure_crash = is.len() == 1 && is[0].label.is_crash();
                let s_crash = js.iter().any(|j| j.label.is_crash());
                let t_crash = is.iter().any(|i| i.label.is_crash());
                if pure_crash || (s_crash && !t_crash) {
                    return false;
                }
                self.assumed.insert((s.clone(), t.clone()));
                is.iter().all(|i| {
                    let j = find(js, i).expect("inclusion checked");
                    self.check(&j.cont, &i.cont)
                })
            }
            _ => false,
        }
    }
}

fn find<'a>(bs: &'a [LBranch], b: &LBranch) -> Option<&'a LBranch> {
    bs.iter().find(|x| x.label == b.label && x.sort == b.sort)
}
