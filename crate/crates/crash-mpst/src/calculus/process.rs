use std::collections::BTreeMap;
use std::fmt;

use super::expr::{Expr, Value};
use crate::model::{Label, Role, Var};

/// One arm of an input sum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PBranch {
    pub label: Label,
    pub binder: Option<Var>,
    pub cont: Process,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    /// The inactive process `0`.
    Inact,
    /// A crashed process; only produced at runtime.
    Crashed,
    Send {
        to: Role,
        label: Label,
        payload: Expr,
        cont: Box<Process>,
    },
    Recv {
        from: Role,
        branches: Vec<PBranch>,
    },
    If {
        cond: Expr,
        then: Box<Process>,
        otherwise: Box<Process>,
    },
    Rec(Var, Box<Process>),
    Var(Var),
}

impl Process {
    pub fn send(to: impl Into<Role>, label: impl Into<Label>, payload: Expr, cont: Process) -> Process {
        Process::Send { to: to.into(), label: label.into(), payload, cont: Box::new(cont) }
    }

    pub fn recv(from: impl Into<Role>, branches: Vec<PBranch>) -> Process {
        Process::Recv { from: from.into(), branches }
    }

    /// Substitutes a value for a free expression variable.
    pub fn subst_value(&self, x: &Var, v: &Value) -> Process {
        match self {
            Process::Inact | Process::Crashed | Process::Var(_) => self.clone(),
            Process::Send { to, label, payload, cont } => Process::Send {
                to: to.clone(),
                label: label.clone(),
                payload: payload.subst(x, v),
                cont: Box::new(cont.subst_value(x, v)),
            },
            Process::Recv { from, branches } => Process::Recv {
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|b| PBranch {
                        label: b.label.clone(),
                        binder: b.binder.clone(),
                        cont: if b.binder.as_ref() == Some(x) { b.cont.clone() } else { b.cont.subst_value(x, v) },
                    })
                    .collect(),
            },
            Process::If { cond, then, otherwise } => Process::If {
                cond: cond.subst(x, v),
                then: Box::new(then.subst_value(x, v)),
                otherwise: Box::new(otherwise.subst_value(x, v)),
            },
            Process::Rec(var, body) => Process::Rec(var.clone(), Box::new(body.subst_value(x, v))),
        }
    }

    /// Substitutes a process for a free process variable.
    pub fn subst_proc(&self, x: &Var, by: &Process) -> Process {
        match self {
            Process::Var(y) if y == x => by.clone(),
            Process::Inact | Process::Crashed | Process::Var(_) => self.clone(),
            Process::Rec(y, _) if y == x => self.clone(),
            Process::Rec(y, body) => Process::Rec(y.clone(), Box::new(body.subst_proc(x, by))),
            Process::Send { to, label, payload, cont } => Process::Send {
                to: to.clone(),
                label: label.clone(),
                payload: payload.clone(),
                cont: Box::new(cont.subst_proc(x, by)),
            },
            Process::Recv { from, branches } => Process::Recv {
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|b| PBranch {
                        label: b.label.clone(),
                        binder: b.binder.clone(),
                        cont: b.cont.subst_proc(x, by),
                    })
                    .collect(),
            },
            Process::If { cond, then, otherwise } => Process::If {
                cond: cond.clone(),
                then: Box::new(then.subst_proc(x, by)),
                otherwise: Box::new(otherwise.subst_proc(x, by)),
            },
        }
    }

    pub fn unfold_once(&self) -> Process {
        match self {
            Process::Rec(x, body) => body.subst_proc(x, self),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Inact => f.write_str("end"),
            Process::Crashed => f.write_str("crashed"),
            Process::Var(x) => write!(f, "{x}"),
            Process::Rec(x, body) => write!(f, "mu {x}. {body}"),
            Process::Send { to, label, payload, cont } => match payload {
                Expr::Lit(Value::Unit) => write!(f, "send {to} {label}. {cont}"),
                e => write!(f, "send {to} {label}({e}). {cont}"),
            },
            Process::Recv { from, branches } => {
                write!(f, "recv {from} {{ ")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match &b.binder {
                        Some(x) => write!(f, "{}({x}) -> {}", b.label, b.cont)?,
                        None => write!(f, "{} -> {}", b.label, b.cont)?,
                    }
                }
                f.write_str(" }")
            }
            Process::If { cond, then, otherwise } => write!(f, "if {cond} then {then} else {otherwise}"),
        }
    }
}

/// A queued message: origin, label and payload.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub origin: Role,
    pub label: Label,
    pub value: Value,
}

/// An incoming queue; unavailable once its owner has crashed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Queue {
    Unavailable,
    Messages(Vec<Message>),
}

impl Queue {
    pub fn empty() -> Queue {
        Queue::Messages(Vec::new())
    }

    pub fn is_empty_available(&self) -> bool {
        matches!(self, Queue::Messages(m) if m.is_empty())
    }
}

/// Processes and their incoming queues, one entry per role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Session {
    pub entries: BTreeMap<Role, (Process, Queue)>,
}

impl Session {
    /// A session with empty queues.
    pub fn new<I: IntoIterator<Item = (Role, Process)>>(procs: I) -> Session {
        Session { entries: procs.into_iter().map(|(r, p)| (r, (p, Queue::empty()))).collect() }
    }

    pub fn process(&self, r: &Role) -> Option<&Process> {
        self.entries.get(r).map(|(p, _)| p)
    }

    pub fn queue(&self, r: &Role) -> Option<&Queue> {
        self.entries.get(r).map(|(_, q)| q)
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, (p, q))) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{r}: {p} / ")?;
            match q {
                Queue::Unavailable => f.write_str("⊘")?,
                Queue::Messages(ms) if ms.is_empty() => f.write_str("ε")?,
                Queue::Messages(ms) => {
                    for (k, m) in ms.iter().enumerate() {
                        if k > 0 {
                            f.write_str("·")?;
                        }
                        write!(f, "({},{},{})", m.origin, m.label, m.value)?;
                    }
                }
            }
        }
        Ok(())
    }
}
