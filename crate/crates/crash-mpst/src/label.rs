//! Transition labels shared by global types, configurations and sessions.

use std::fmt;

use crate::model::{Label, Role, Sort};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    /// `from` sends `label` to `to`.
    Send {
        from: Role,
        to: Role,
        label: Label,
        sort: Sort,
    },
    /// `at` receives `label` from `from`.
    Recv {
        at: Role,
        from: Role,
        label: Label,
        sort: Sort,
    },
    Crash(Role),
    /// `detector` notices that `crashed` has crashed.
    CrashDetect {
        detector: Role,
        crashed: Role,
    },
}

impl TransitionLabel {
    pub fn send(from: impl Into<Role>, to: impl Into<Role>, label: impl Into<Label>, sort: Sort) -> Self {
        TransitionLabel::Send { from: from.into(), to: to.into(), label: label.into(), sort }
    }

    pub fn recv(at: impl Into<Role>, from: impl Into<Role>, label: impl Into<Label>, sort: Sort) -> Self {
        TransitionLabel::Recv { at: at.into(), from: from.into(), label: label.into(), sort }
    }

    pub fn crash(role: impl Into<Role>) -> Self {
        TransitionLabel::Crash(role.into())
    }

    pub fn crash_detect(detector: impl Into<Role>, crashed: impl Into<Role>) -> Self {
        TransitionLabel::CrashDetect { detector: detector.into(), crashed: crashed.into() }
    }

    /// The role performing the action.
    pub fn subject(&self) -> &Role {
        match self {
            TransitionLabel::Send { from, .. } => from,
            TransitionLabel::Recv { at, .. } => at,
            TransitionLabel::Crash(r) => r,
            TransitionLabel::CrashDetect { detector, .. } => detector,
        }
    }

    pub fn is_crash(&self) -> bool {
        matches!(self, TransitionLabel::Crash(_))
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let payload = |label: &Label, sort: &Sort| match sort {
            Sort::Unit => label.to_string(),
            s => format!("{label}({s})"),
        };
        match self {
            TransitionLabel::Send { from, to, label, sort } => write!(f, "Send({from},{to},{})", payload(label, sort)),
            TransitionLabel::Recv { at, from, label, sort } => write!(f, "Recv({at},{from},{})", payload(label, sort)),
            TransitionLabel::Crash(r) => write!(f, "Crash({r})"),
            TransitionLabel::CrashDetect { detector, crashed } => write!(f, "CrashDetect({detector},{crashed})"),
        }
    }
}
