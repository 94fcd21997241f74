//! Configurations: local types per role plus point-to-point queues.

use std::collections::BTreeMap;
use std::fmt;

use crate::label::TransitionLabel;
use crate::model::{Label, LocalType, Role, RoleSet, Sort};
use crate::syntax::render_local;

/// A queued message type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueueMsg {
    pub label: Label,
    pub sort: Sort,
}

/// The queue from one role to another. Messages sent to an unavailable
/// queue are discarded.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelQueue {
    Unavailable,
    Messages(Vec<QueueMsg>),
}

impl ChannelQueue {
    pub fn is_available(&self) -> bool {
        matches!(self, ChannelQueue::Messages(_))
    }

    pub fn is_empty_available(&self) -> bool {
        matches!(self, ChannelQueue::Messages(m) if m.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn len(&self) -> usize {
        match self {
            ChannelQueue::Unavailable => 0,
            ChannelQueue::Messages(m) => m.len(),
        }
    }

    pub fn head(&self) -> Option<&QueueMsg> {
        match self {
            ChannelQueue::Messages(m) => m.first(),
            ChannelQueue::Unavailable => None,
        }
    }
}

/// Queues indexed by (sender, receiver).
pub type QueueEnv = BTreeMap<(Role, Role), ChannelQueue>;

/// `Γ;Δ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub gamma: BTreeMap<Role, LocalType>,
    pub delta: QueueEnv,
}

impl Configuration {
    /// A configuration with empty queues between every pair of roles.
    pub fn new(gamma: BTreeMap<Role, LocalType>) -> Self {
        let mut delta = QueueEnv::new();
        for p in gamma.keys() {
            for q in gamma.keys() {
                if p != q {
                    delta.insert((p.clone(), q.clone()), ChannelQueue::Messages(Vec::new()));
                }
            }
        }
        Configuration { gamma, delta }
    }

    pub fn queue(&self, from: &Role, to: &Role) -> &ChannelQueue {
        const EMPTY: &ChannelQueue = &ChannelQueue::Messages(Vec::new());
        self.delta.get(&(from.clone(), to.clone())).unwrap_or(EMPTY)
    }

    /// Longest available queue.
    pub fn max_queue_len(&self) -> usize {
        self.delta.values().map(ChannelQueue::len).max().unwrap_or(0)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, t)) in self.gamma.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}: {}", render_local(t))?;
        }
        let mut first = true;
        for ((p, q), queue) in &self.delta {
            let text = match queue {
                ChannelQueue::Unavailable => "⊘".to_string(),
                ChannelQueue::Messages(m) if m.is_empty() => continue,
                ChannelQueue::Messages(m) => m
                    .iter()
                    .map(|x| match x.sort {
                        Sort::Unit => x.label.to_string(),
                        s => format!("{}({s})", x.label),
                    })
                    .collect::<Vec<_>>()
                    .join("·"),
            };
            f.write_str(if first { " ; " } else { ", " })?;
            first = false;
            write!(f, "{p}→{q}: {text}")?;
        }
        Ok(())
    }
}

/// Which transitions a reduction relation admits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arrow {
    /// No crashes at all.
    Plain,
    /// Crashes of roles outside the reliable set.
    Reliable(RoleSet),
}

impl Arrow {
    pub fn admits(&self, lbl: &TransitionLabel) -> bool {
        match (self, lbl) {
            (Arrow::Plain, TransitionLabel::Crash(_)) => false,
            (Arrow::Reliable(rel), TransitionLabel::Crash(r)) => !rel.contains(r),
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrowKind {
    Plain,
    ReliabilityAware,
}

pub fn filter_arrow(kind: ArrowKind, reliable: &RoleSet) -> Arrow {
    match kind {
        ArrowKind::Plain => Arrow::Plain,
        ArrowKind::ReliabilityAware => Arrow::Reliable(reliable.clone()),
    }
}

/// Every transition of `c` admitted by `arrow`.
pub fn config_transitions(c: &Configuration, arrow: &Arrow) -> Vec<(TransitionLabel, Configuration)> {
    let mut out = Vec::new();
    for (p, t) in &c.gamma {
        match t.unfold() {
            LocalType::Select(q, bs) => {
                for b in bs {
                    let mut next = c.clone();
                    next.gamma.insert(p.clone(), b.cont.clone());
                    if let Some(ChannelQueue::Messages(m)) = next.delta.get_mut(&(p.clone(), q.clone())) {
                        m.push(QueueMsg { label: b.label.clone(), sort: b.sort });
                    }
                    out.push((TransitionLabel::send(p.clone(), q.clone(), b.label.clone(), b.sort), next));
                }
            }
            LocalType::Branch(from, bs) => {
                let queue = c.queue(&from, p);
                if let Some(h) = queue.head() {
                    if let Some(b) = bs.iter().find(|b| b.label == h.label && b.sort == h.sort) {
                        let mut next = c.clone();
                        next.gamma.insert(p.clone(), b.cont.clone());
                        if let Some(ChannelQueue::Messages(m)) = next.delta.get_mut(&(from.clone(), p.clone())) {
                            m.remove(0);
                        }
                        out.push((TransitionLabel::recv(p.clone(), from.clone(), b.label.clone(), b.sort), next));
                    }
                } else if queue.is_empty_available() && c.gamma.get(&from) == Some(&LocalType::Stop) {
                    if let Some(b) = bs.iter().find(|b| b.label.is_crash()) {
                        let mut next = c.clone();
                        next.gamma.insert(p.clone(), b.cont.clone());
                        out.push((TransitionLabel::crash_detect(p.clone(), from.clone()), next));
                    }
                }
            }
            _ => {}
        }
        if !matches!(t, LocalType::End | LocalType::Stop) {
            let mut next = c.clone();
            next.gamma.insert(p.clone(), LocalType::Stop);
            for ((_, to), q) in next.delta.iter_mut() {
                if to == p {
                    *q = ChannelQueue::Unavailable;
                }
            }
            out.push((TransitionLabel::Crash(p.clone()), next));
        }
    }
    out.retain(|(l, _)| arrow.admits(l));
    out
}
