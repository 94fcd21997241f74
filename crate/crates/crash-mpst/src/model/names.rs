use std::fmt;
use std::sync::Arc;

/// The reserved label of crash-handling branches.
pub const CRASH: &str = "crash";

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                $name(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::new(s)
            }
        }
    };
}

name_type!(
    /// A protocol participant. Compared by exact name.
    Role
);
name_type!(
    /// A message label. The label named `crash` marks crash-handling branches.
    Label
);
name_type!(
    /// A recursion variable.
    Var
);

impl Label {
    pub fn crash() -> Self {
        Label::new(CRASH)
    }

    pub fn is_crash(&self) -> bool {
        &*self.0 == CRASH
    }
}

/// Basic payload types. No subtyping between sorts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    #[default]
    Unit,
    Int,
    Bool,
    Str,
}

impl Sort {
    pub fn parse(s: &str) -> Option<Sort> {
        match s {
            "Unit" => Some(Sort::Unit),
            "Int" => Some(Sort::Int),
            "Bool" => Some(Sort::Bool),
            "Str" => Some(Sort::Str),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sort::Unit => "Unit",
            Sort::Int => "Int",
            Sort::Bool => "Bool",
            Sort::Str => "Str",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shorthand for building a set of roles.
pub fn roles<I, S>(names: I) -> std::collections::BTreeSet<Role>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names.into_iter().map(Role::new).collect()
}
