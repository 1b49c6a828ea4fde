//! Job and event identifiers.
//!
//! Jobs are numbered from 1.  Each job `j` contributes two events: its
//! start (event `2j - 1`) and its completion (event `2j`).  Event ids are
//! therefore 1-based as well, ranging over `1..=2n` for an instance with
//! `n` jobs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based job identifier.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct JobId(usize);

impl JobId {
    /// Creates a job id; `index` is 1-based and must be positive.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "job ids are 1-based");
        JobId(index)
    }

    /// The 1-based number of this job.
    pub fn index(self) -> usize {
        self.0
    }

    /// The 0-based position of this job in an instance's job list.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }

    pub fn start_event(self) -> EventId {
        EventId(2 * self.0 - 1)
    }

    pub fn completion_event(self) -> EventId {
        EventId(2 * self.0)
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based event identifier: odd ids are starts, even ids completions.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct EventId(usize);

impl EventId {
    /// Creates an event id; `index` is 1-based and must be positive.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "event ids are 1-based");
        EventId(index)
    }

    /// The 1-based number of this event.
    pub fn index(self) -> usize {
        self.0
    }

    /// The 0-based form, handy for array indexing.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }

    /// The job this event belongs to.
    pub fn job(self) -> JobId {
        JobId(self.0.div_ceil(2))
    }

    pub fn is_start(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn is_completion(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// The other event of the same job.
    pub fn partner(self) -> EventId {
        if self.is_start() {
            EventId(self.0 + 1)
        } else {
            EventId(self.0 - 1)
        }
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_start() {
            write!(f, "S{}", self.job())
        } else {
            write!(f, "C{}", self.job())
        }
    }
}
