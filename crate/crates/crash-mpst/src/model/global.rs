use std::collections::BTreeSet;

use super::names::{Label, Role, Sort, Var};

/// One branch of a global communication.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GBranch {
    pub label: Label,
    pub sort: Sort,
    pub cont: GlobalType,
}

impl GBranch {
    pub fn new(label: impl Into<Label>, sort: Sort, cont: GlobalType) -> Self {
        GBranch { label: label.into(), sort, cont }
    }
}

/// A communication prefix.
///
/// `committed == None` is a pending transmission `p→q`; `Some(j)` is the
/// en-route transmission `p⇝q:j`. A crashed sender only appears en route.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comm {
    pub sender: Role,
    pub sender_crashed: bool,
    pub receiver: Role,
    pub receiver_crashed: bool,
    pub branches: Vec<GBranch>,
    pub committed: Option<usize>,
}

impl Comm {
    pub fn is_pending(&self) -> bool {
        self.committed.is_none()
    }

    pub fn crash_index(&self) -> Option<usize> {
        self.branches.iter().position(|b| b.label.is_crash())
    }

    /// The committed branch of an en-route transmission.
    pub fn committed_branch(&self) -> Option<&GBranch> {
        self.committed.map(|j| &self.branches[j])
    }

    /// Whether this is the crash pseudo-message left by a crashed sender.
    pub fn is_crash_pseudo(&self) -> bool {
        self.committed_branch().is_some_and(|b| b.label.is_crash())
    }
}

/// Global types, including the runtime forms produced by the semantics.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlobalType {
    End,
    RecVar(Var),
    Rec(Var, Box<GlobalType>),
    Comm(Comm),
}

impl GlobalType {
    /// A pending, design-time communication.
    pub fn comm(sender: impl Into<Role>, receiver: impl Into<Role>, branches: Vec<GBranch>) -> Self {
        GlobalType::Comm(Comm {
            sender: sender.into(),
            sender_crashed: false,
            receiver: receiver.into(),
            receiver_crashed: false,
            branches,
            committed: None,
        })
    }

    /// A pending single-branch communication with a unit payload.
    pub fn msg(sender: impl Into<Role>, receiver: impl Into<Role>, label: impl Into<Label>, cont: GlobalType) -> Self {
        GlobalType::comm(sender, receiver, vec![GBranch::new(label, Sort::Unit, cont)])
    }

    pub fn rec(var: impl Into<Var>, body: GlobalType) -> Self {
        GlobalType::Rec(var.into(), Box::new(body))
    }

    pub fn var(var: impl Into<Var>) -> Self {
        GlobalType::RecVar(var.into())
    }

    /// Replaces free occurrences of `var` by `by`. `by` must be closed.
    pub fn subst(&self, var: &Var, by: &GlobalType) -> GlobalType {
        match self {
            GlobalType::End => GlobalType::End,
            GlobalType::RecVar(v) if v == var => by.clone(),
            GlobalType::RecVar(_) => self.clone(),
            GlobalType::Rec(v, _) if v == var => self.clone(),
            GlobalType::Rec(v, body) => GlobalType::Rec(v.clone(), Box::new(body.subst(var, by))),
            GlobalType::Comm(c) => GlobalType::Comm(Comm {
                branches: c
                    .branches
                    .iter()
                    .map(|b| GBranch { label: b.label.clone(), sort: b.sort, cont: b.cont.subst(var, by) })
                    .collect(),
                ..c.clone()
            }),
        }
    }

    /// One unfolding step; identity on non-recursive forms.
    pub fn unfold_once(&self) -> GlobalType {
        match self {
            GlobalType::Rec(v, body) => body.subst(v, self),
            _ => self.clone(),
        }
    }

    /// Unfolds until the head is not a binder.
    pub fn unfold(&self) -> GlobalType {
        let mut g = self.clone();
        // Contractive bodies guarantee a non-binder head after finitely many steps.
        let mut guard = 0usize;
        while matches!(g, GlobalType::Rec(..)) {
            g = g.unfold_once();
            guard += 1;
            if guard > 10_000 {
                break;
            }
        }
        g
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            GlobalType::End => {}
            GlobalType::RecVar(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            GlobalType::Rec(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            GlobalType::Comm(c) => {
                for b in &c.branches {
                    b.cont.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All role names syntactically present, crashed or not.
    pub fn mentioned_roles(&self) -> BTreeSet<Role> {
        let mut out = BTreeSet::new();
        self.collect_mentioned(&mut out);
        out
    }

    fn collect_mentioned(&self, out: &mut BTreeSet<Role>) {
        match self {
            GlobalType::End | GlobalType::RecVar(_) => {}
            GlobalType::Rec(_, body) => body.collect_mentioned(out),
            GlobalType::Comm(c) => {
                out.insert(c.sender.clone());
                out.insert(c.receiver.clone());
                for b in &c.branches {
                    b.cont.collect_mentioned(out);
                }
            }
        }
    }

    /// Whether the type contains no runtime-only annotations.
    pub fn is_design_time(&self) -> bool {
        match self {
            GlobalType::End | GlobalType::RecVar(_) => true,
            GlobalType::Rec(_, body) => body.is_design_time(),
            GlobalType::Comm(c) => {
                !c.sender_crashed
                    && !c.receiver_crashed
                    && c.committed.is_none()
                    && c.branches.iter().all(|b| b.cont.is_design_time())
            }
        }
    }

    /// Number of nodes, used to bound generated terms.
    pub fn size(&self) -> usize {
        match self {
            GlobalType::End | GlobalType::RecVar(_) => 1,
            GlobalType::Rec(_, body) => 1 + body.size(),
            GlobalType::Comm(c) => 1 + c.branches.iter().map(|b| b.cont.size()).sum::<usize>(),
        }
    }
}

/// Whether `var` occurs in `g` only underneath at least one communication.
pub(crate) fn guarded_in(g: &GlobalType, var: &Var) -> bool {
    match g {
        GlobalType::End | GlobalType::Comm(_) => true,
        GlobalType::RecVar(v) => v != var,
        GlobalType::Rec(v, body) => v == var || guarded_in(body, var),
    }
}
