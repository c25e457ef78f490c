//! Three-valued outcomes for certification runs.
//!
//! A failed mathematical predicate is data, not an error: callers get a
//! verdict carrying a witness they can print or serialize. Errors are
//! reserved for malformed input and resource exhaustion.

use std::fmt;

/// Evidence for a failure: the homological level where a required
/// condition broke, and what broke there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub level: usize,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {}: {}", self.level, self.detail)
    }
}

/// Outcome of checking a property across homological levels.
///
/// `Certified` means every required level was checked and holds.
/// `CertifiedUpTo(n)` means levels 0..=n hold but the computation could
/// not see further (resolution truncated by a degree or level bound), so
/// the property is undetermined beyond n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    CertifiedUpTo(usize),
    Fails(Witness),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => write!(f, "certified"),
            Verdict::CertifiedUpTo(n) => {
                write!(f, "holds through level {n}, undetermined beyond")
            }
            Verdict::Fails(w) => write!(f, "fails ({w})"),
        }
    }
}

/// Result of one level of a levelwise check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelOutcome {
    Holds,
    Fails,
    Undetermined,
}

impl fmt::Display for LevelOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelOutcome::Holds => write!(f, "holds"),
            LevelOutcome::Fails => write!(f, "fails"),
            LevelOutcome::Undetermined => write!(f, "undetermined"),
        }
    }
}
