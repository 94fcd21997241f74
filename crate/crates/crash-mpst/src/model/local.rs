use std::collections::BTreeSet;

use super::names::{Label, Role, Sort, Var};

/// One branch of a selection or a branching.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LBranch {
    pub label: Label,
    pub sort: Sort,
    pub cont: LocalType,
}

impl LBranch {
    pub fn new(label: impl Into<Label>, sort: Sort, cont: LocalType) -> Self {
        LBranch { label: label.into(), sort, cont }
    }
}

/// Local types. `Stop` is the type of a crashed endpoint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalType {
    End,
    Stop,
    RecVar(Var),
    Rec(Var, Box<LocalType>),
    /// Internal choice `q⊕{…}`.
    Select(Role, Vec<LBranch>),
    /// External choice `q&{…}`.
    Branch(Role, Vec<LBranch>),
}

impl LocalType {
    pub fn select(peer: impl Into<Role>, branches: Vec<LBranch>) -> Self {
        LocalType::Select(peer.into(), branches)
    }

    pub fn branch(peer: impl Into<Role>, branches: Vec<LBranch>) -> Self {
        LocalType::Branch(peer.into(), branches)
    }

    /// Single unit-payload send.
    pub fn send(peer: impl Into<Role>, label: impl Into<Label>, cont: LocalType) -> Self {
        LocalType::Select(peer.into(), vec![LBranch::new(label, Sort::Unit, cont)])
    }

    /// Single unit-payload receive.
    pub fn recv(peer: impl Into<Role>, label: impl Into<Label>, cont: LocalType) -> Self {
        LocalType::Branch(peer.into(), vec![LBranch::new(label, Sort::Unit, cont)])
    }

    pub fn rec(var: impl Into<Var>, body: LocalType) -> Self {
        LocalType::Rec(var.into(), Box::new(body))
    }

    pub fn var(var: impl Into<Var>) -> Self {
        LocalType::RecVar(var.into())
    }

    pub fn branches(&self) -> &[LBranch] {
        match self {
            LocalType::Select(_, bs) | LocalType::Branch(_, bs) => bs,
            _ => &[],
        }
    }

    pub fn subst(&self, var: &Var, by: &LocalType) -> LocalType {
        match self {
            LocalType::End | LocalType::Stop => self.clone(),
            LocalType::RecVar(v) if v == var => by.clone(),
            LocalType::RecVar(_) => self.clone(),
            LocalType::Rec(v, _) if v == var => self.clone(),
            LocalType::Rec(v, body) => LocalType::Rec(v.clone(), Box::new(body.subst(var, by))),
            LocalType::Select(p, bs) => LocalType::Select(p.clone(), subst_branches(bs, var, by)),
            LocalType::Branch(p, bs) => LocalType::Branch(p.clone(), subst_branches(bs, var, by)),
        }
    }

    pub fn unfold_once(&self) -> LocalType {
        match self {
            LocalType::Rec(v, body) => body.subst(v, self),
            _ => self.clone(),
        }
    }

    /// Unfolds until the head is not a binder.
    pub fn unfold(&self) -> LocalType {
        let mut t = self.clone();
        let mut guard = 0usize;
        while matches!(t, LocalType::Rec(..)) {
            t = t.unfold_once();
            guard += 1;
            if guard > 10_000 {
                break;
            }
        }
        t
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            LocalType::End | LocalType::Stop => {}
            LocalType::RecVar(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            LocalType::Rec(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            LocalType::Select(_, bs) | LocalType::Branch(_, bs) => {
                for b in bs {
                    b.cont.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Sorts the arms of every external choice by label. Useful for comparing
    /// types whose branchings were written in different orders.
    pub fn canonical_branch_order(&self) -> LocalType {
        match self {
            LocalType::End | LocalType::Stop | LocalType::RecVar(_) => self.clone(),
            LocalType::Rec(v, body) => LocalType::Rec(v.clone(), Box::new(body.canonical_branch_order())),
            LocalType::Select(p, bs) => LocalType::Select(
                p.clone(),
                bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, b.cont.canonical_branch_order())).collect(),
            ),
            LocalType::Branch(p, bs) => {
                let mut out: Vec<LBranch> =
                    bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, b.cont.canonical_branch_order())).collect();
                out.sort_by(|a, b| a.label.cmp(&b.label));
                LocalType::Branch(p.clone(), out)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            LocalType::End | LocalType::Stop | LocalType::RecVar(_) => 1,
            LocalType::Rec(_, body) => 1 + body.size(),
            LocalType::Select(_, bs) | LocalType::Branch(_, bs) => 1 + bs.iter().map(|b| b.cont.size()).sum::<usize>(),
        }
    }
}

fn subst_branches(bs: &[LBranch], var: &Var, by: &LocalType) -> Vec<LBranch> {
    bs.iter().map(|b| LBranch { label: b.label.clone(), sort: b.sort, cont: b.cont.subst(var, by) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_t() -> LocalType {
        LocalType::rec("t", LocalType::send("q", "l", LocalType::var("t")))
    }

    #[test]
    fn unfolding_substitutes_the_binder() {
        let t = loop_t();
        assert_eq!(t.unfold(), LocalType::send("q", "l", t.clone()));
        assert!(t.is_closed());
        assert_eq!(LocalType::send("q", "l", LocalType::var("t")).free_vars(), BTreeSet::from([Var::new("t")]));
    }

    #[test]
    fn substitution_respects_shadowing() {
        let inner = LocalType::rec("t", LocalType::var("t"));
        assert_eq!(inner.subst(&Var::new("t"), &LocalType::End), inner);
    }

    #[test]
    fn canonical_order_sorts_only_external_choices() {
        let arms = |a: &str, b: &str| {
            vec![LBranch::new(b, Sort::Unit, LocalType::End), LBranch::new(a, Sort::Unit, LocalType::End)]
        };
        let br = LocalType::branch("p", arms("a", "b")).canonical_branch_order();
        let labels: Vec<&str> = br.branches().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["a", "b"]);
        let sel = LocalType::select("p", arms("a", "b"));
        assert_eq!(sel.canonical_branch_order(), sel);
    }
}
