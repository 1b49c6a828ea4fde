//! Event orders: the search-space representation of a schedule's shape.
//!
//! An [`EventOrder`] is a permutation of all `2n` events of an instance in
//! which every job's start comes before its completion.  The `2n - 1` gaps
//! between consecutive events are the *intervals* of the order; interval
//! `q` is identified by the event that opens it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::EventId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("an event order needs a positive, even number of events (got {len})")]
    BadLength { len: usize },
    #[error("event id {id} is out of range for {n} jobs")]
    OutOfRange { id: usize, n: usize },
    #[error("event {event} appears more than once")]
    Duplicate { event: EventId },
    #[error("job {job} completes before it starts")]
    StartAfterCompletion { job: usize },
}

/// A permutation of the `2n` events with starts before completions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<EventId>", into = "Vec<EventId>")]
pub struct EventOrder {
    seq: Vec<EventId>,
    /// Position of each event, indexed by `event.zero_based()`.
    pos: Vec<usize>,
}

impl EventOrder {
    pub fn new(seq: Vec<EventId>) -> Result<Self, OrderError> {
        if seq.is_empty() || !seq.len().is_multiple_of(2) {
            return Err(OrderError::BadLength { len: seq.len() });
        }
        let len = seq.len();
        let n = len / 2;
        let mut pos = vec![usize::MAX; len];
        for (position, &event) in seq.iter().enumerate() {
            let idx = event.index();
            if idx > len {
                return Err(OrderError::OutOfRange { id: idx, n });
            }
            if pos[idx - 1] != usize::MAX {
                return Err(OrderError::Duplicate { event });
            }
            pos[idx - 1] = position;
        }
        for job in 1..=n {
            if pos[2 * job - 2] > pos[2 * job - 1] {
                return Err(OrderError::StartAfterCompletion { job });
            }
        }
        Ok(EventOrder { seq, pos })
    }

    /// The order `S1 C1 S2 C2 ...`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Self::from_seq_unchecked((1..=2 * n).map(EventId::new).collect())
    }

    /// Builds an order from a sequence already known to be valid (used by
    /// the neighbourhood operators, which preserve validity).
    pub(crate) fn from_seq_unchecked(seq: Vec<EventId>) -> Self {
        let mut pos = vec![usize::MAX; seq.len()];
        for (position, &event) in seq.iter().enumerate() {
            pos[event.zero_based()] = position;
        }
        let order = EventOrder { seq, pos };
        debug_assert!(
            EventOrder::new(order.seq.clone()).is_ok(),
            "internal order invariant broken"
        );
        order
    }

    /// Number of jobs.
    pub fn n(&self) -> usize {
        self.seq.len() / 2
    }

    /// Number of events (`2n`).
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of intervals between consecutive events (`2n - 1`).
    pub fn interval_count(&self) -> usize {
        self.seq.len() - 1
    }

    /// Event at a 0-based position.
    pub fn at(&self, position: usize) -> EventId {
        self.seq[position]
    }

    /// 0-based position of an event.
    pub fn position(&self, event: EventId) -> usize {
        self.pos[event.zero_based()]
    }

    pub fn events(&self) -> &[EventId] {
        &self.seq
    }

    /// The event opening interval `q` (same as [`EventOrder::at`], named
    /// for intent at call sites that deal in intervals).
    pub fn interval_key(&self, q: usize) -> EventId {
        assert!(q < self.interval_count());
        self.seq[q]
    }
}

impl fmt::Display for EventOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, event) in self.seq.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{event}")?;
        }
        Ok(())
    }
}

impl From<EventOrder> for Vec<EventId> {
    fn from(order: EventOrder) -> Self {
        order.seq
    }
}

impl TryFrom<Vec<EventId>> for EventOrder {
    type Error = OrderError;

    fn try_from(seq: Vec<EventId>) -> Result<Self, Self::Error> {
        EventOrder::new(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(seq: &[usize]) -> Vec<EventId> {
        seq.iter().map(|&i| EventId::new(i)).collect()
    }

    #[test]
    fn accepts_valid_orders_and_tracks_positions() {
        let order = EventOrder::new(ids(&[1, 3, 4, 2])).unwrap();
        assert_eq!(order.n(), 2);
        assert_eq!(order.interval_count(), 3);
        assert_eq!(order.at(1), EventId::new(3));
        assert_eq!(order.position(EventId::new(2)), 3);
        assert_eq!(order.to_string(), "S1 S2 C2 C1");
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(
            EventOrder::new(ids(&[1, 2, 3])),
            Err(OrderError::BadLength { len: 3 })
        ));
        assert!(matches!(
            EventOrder::new(ids(&[1, 2, 3, 5])),
            Err(OrderError::OutOfRange { id: 5, n: 2 })
        ));
        assert!(matches!(
            EventOrder::new(ids(&[1, 1, 3, 4])),
            Err(OrderError::Duplicate { .. })
        ));
        assert!(matches!(
            EventOrder::new(ids(&[2, 1, 3, 4])),
            Err(OrderError::StartAfterCompletion { job: 1 })
        ));
    }

    #[test]
    fn identity_interleaves_starts_and_completions() {
        let order = EventOrder::identity(3);
        assert_eq!(order.to_string(), "S1 C1 S2 C2 S3 C3");
    }

    #[test]
    fn serde_round_trip() {
        let order = EventOrder::new(ids(&[1, 3, 2, 4])).unwrap();
        let json = serde_json::to_string(&order).unwrap();
        assert_eq!(json, "[1,3,2,4]");
        let back: EventOrder = serde_json::from_str(&json).unwrap();
        assert_eq!(back, order);
        assert!(serde_json::from_str::<EventOrder>("[2,1,3,4]").is_err());
    }
}
