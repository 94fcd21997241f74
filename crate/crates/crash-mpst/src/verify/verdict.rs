use std::fmt;

use crate::label::TransitionLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step of a witness: the state before the step, then the label taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub state: String,
    pub label: TransitionLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    /// Present iff the status is `Violated`.
    pub witness: Option<Vec<WitnessStep>>,
    pub reason: String,
}

impl Verdict {
    pub fn holds(reason: impl Into<String>) -> Self {
        Verdict { status: Status::Holds, witness: None, reason: reason.into() }
    }

    pub fn violated(witness: Vec<WitnessStep>, reason: impl Into<String>) -> Self {
        Verdict { status: Status::Violated, witness: Some(witness), reason: reason.into() }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Verdict { status: Status::Inconclusive, witness: None, reason: reason.into() }
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.status, self.reason)?;
        if let Some(w) = &self.witness {
            let labels: Vec<String> = w.iter().map(|s| s.label.to_string()).collect();
            write!(f, " [{}]", labels.join(" · "))?;
        }
        Ok(())
    }
}
