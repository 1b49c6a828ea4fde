//! Precedence relations between events.
//!
//! A [`PrecedenceSet`] stores pairs `(a, b)` meaning "event `a` must occur
//! at or before event `b` in every order worth exploring".  It always
//! contains each job's start-before-completion pair, and
//! [`implicit_precedences`] adds every pair that is already forced by the
//! jobs' time windows alone.

use thiserror::Error;

use super::event::EventId;
use super::instance::Instance;
use super::order::EventOrder;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrecedenceError {
    #[error("event id {id} is out of range for {n} jobs")]
    OutOfRange { id: usize, n: usize },
    #[error("event {event} cannot precede itself")]
    SelfLoop { event: EventId },
    #[error("precedence pairs contain a cycle")]
    Cycle,
}

/// A set of precedence pairs over the `2n` events of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceSet {
    n: usize,
    /// Row-major `2n x 2n` relation matrix: `before[a][b]`.
    matrix: Vec<bool>,
    /// All pairs, sorted by `(first, second)` event id.
    pairs: Vec<(EventId, EventId)>,
}

impl PrecedenceSet {
    /// The minimal set for `n` jobs: each start before its completion.
    pub fn job_pairs(n: usize) -> Self {
        assert!(n >= 1);
        let mut set = PrecedenceSet {
            n,
            matrix: vec![false; (2 * n) * (2 * n)],
            pairs: Vec::with_capacity(n),
        };
        for job in 1..=n {
            let start = EventId::new(2 * job - 1);
            set.insert(start, start.partner());
        }
        set
    }

    /// Job pairs plus the given extra pairs.  Rejects out-of-range ids,
    /// self-loops and pair sets whose relation graph has a cycle.
    pub fn with_pairs(
        n: usize,
        extra: impl IntoIterator<Item = (EventId, EventId)>,
    ) -> Result<Self, PrecedenceError> {
        let mut set = Self::job_pairs(n);
        for (a, b) in extra {
            for id in [a, b] {
                if id.index() > 2 * n {
                    return Err(PrecedenceError::OutOfRange { id: id.index(), n });
                }
            }
            if a == b {
                return Err(PrecedenceError::SelfLoop { event: a });
            }
            set.insert(a, b);
        }
        set.pairs.sort_unstable();
        if !set.is_acyclic() {
            return Err(PrecedenceError::Cycle);
        }
        Ok(set)
    }

    fn insert(&mut self, a: EventId, b: EventId) {
        let idx = a.zero_based() * 2 * self.n + b.zero_based();
        if !self.matrix[idx] {
            self.matrix[idx] = true;
            self.pairs.push((a, b));
        }
    }

    /// Number of jobs.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of events covered (`2n`).
    pub fn event_count(&self) -> usize {
        2 * self.n
    }

    /// Whether `a` is required to occur before `b`.
    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        self.matrix[a.zero_based() * 2 * self.n + b.zero_based()]
    }

    /// Whether the two events are ordered by the set in either direction.
    pub fn related(&self, a: EventId, b: EventId) -> bool {
        self.contains(a, b) || self.contains(b, a)
    }

    /// All pairs, sorted by event ids.
    pub fn pairs(&self) -> &[(EventId, EventId)] {
        &self.pairs
    }

    /// Events that must occur before `event`.
    pub fn predecessors(&self, event: EventId) -> impl Iterator<Item = EventId> + '_ {
        let b = event.zero_based();
        (0..2 * self.n)
            .filter(move |&a| self.matrix[a * 2 * self.n + b])
            .map(|a| EventId::new(a + 1))
    }

    /// Whether `order` places every pair correctly.
    pub fn respected_by(&self, order: &EventOrder) -> bool {
        self.pairs
            .iter()
            .all(|&(a, b)| order.position(a) < order.position(b))
    }

    fn is_acyclic(&self) -> bool {
        // Kahn's algorithm over the pair graph.
        let m = 2 * self.n;
        let mut indegree = vec![0usize; m];
        for &(_, b) in &self.pairs {
            indegree[b.zero_based()] += 1;
        }
        let mut queue: Vec<usize> = (0..m).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for (w, &edge) in self.matrix[v * m..(v + 1) * m].iter().enumerate() {
                if edge {
                    indegree[w] -= 1;
                    if indegree[w] == 0 {
                        queue.push(w);
                    }
                }
            }
        }
        seen == m
    }
}

/// Returns the time an event can occur at the earliest and latest, given
/// only its job's window and peak rate.
fn event_window(inst: &Instance, event: EventId) -> (f64, f64) {
    let job = inst.job(event.job());
    let span = job.min_duration();
    if event.is_start() {
        (job.release, job.deadline - span)
    } else {
        (job.release + span, job.deadline)
    }
}

/// Precedences forced by the instance data alone: event `a` must precede
/// event `b` whenever the latest time `a` can happen lies strictly before
/// the earliest time `b` can happen.  The result always includes each job's
/// start-before-completion pair and is acyclic by construction.
pub fn implicit_precedences(inst: &Instance) -> PrecedenceSet {
    let mut set = PrecedenceSet::job_pairs(inst.n());
    let windows: Vec<(f64, f64)> = inst.event_ids().map(|e| event_window(inst, e)).collect();
    for a in inst.event_ids() {
        for b in inst.event_ids() {
            if a != b && windows[a.zero_based()].1 < windows[b.zero_based()].0 {
                set.insert(a, b);
            }
        }
    }
    set.pairs.sort_unstable();
    debug_assert!(set.is_acyclic());
    set
}
