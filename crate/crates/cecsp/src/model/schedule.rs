//! Schedules: event times plus per-interval consumption.
//!
//! A schedule fixes a time for every event and, for each job, the amount of
//! energy it consumes in each interval between its start and completion
//! events.  Within one interval the consumption rate is taken to be
//! constant (amount divided by interval length); averaging any feasible
//! consumption profile interval by interval this way never breaks rate or
//! capacity limits and leaves the cost unchanged, which is why per-interval
//! amounts are all a schedule stores.
//!
//! Schedules may also carry *relaxation* amounts describing by how much an
//! evaluated order had to cheat on rate or capacity limits; a schedule is
//! feasible when those are (numerically) zero and the hard checks in
//! [`validate_schedule`](super::validate::validate_schedule) pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::{EventId, JobId};
use super::instance::Instance;
use super::order::{EventOrder, OrderError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("expected {expected} event times, got {got}")]
    TimesLength { expected: usize, got: usize },
    #[error("time of event {event} is not finite")]
    NonFiniteTime { event: EventId },
    #[error("job {job} has a consumption entry for interval {interval}, which lies outside its active span")]
    KeyOutsideWindow { job: JobId, interval: EventId },
    #[error("amount for job {job} in interval {interval} is not finite")]
    NonFiniteAmount { job: JobId, interval: EventId },
    #[error("schedule file: {0}")]
    BadOrder(#[from] OrderError),
    #[error("unsupported schedule format version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },
}

pub const SCHEDULE_FORMAT_VERSION: u32 = 1;

/// Event times, per-interval consumption, relaxation amounts and the score
/// of an evaluated order.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Time of each event, indexed by `event.zero_based()`.
    times: Vec<f64>,
    /// Energy consumed per `(job, interval)`; intervals are keyed by their
    /// opening event.  Keys cover exactly the intervals between the job's
    /// start and completion events.
    consumption: BTreeMap<(JobId, EventId), f64>,
    /// Amount by which the job's minimum-rate requirement was relaxed.
    relax_rate_min: BTreeMap<(JobId, EventId), f64>,
    /// Amount by which the job's maximum-rate limit was relaxed.
    relax_rate_max: BTreeMap<(JobId, EventId), f64>,
    /// Amount by which the shared capacity was relaxed, per interval.
    relax_capacity: BTreeMap<EventId, f64>,
    score: f64,
}

impl Schedule {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        times: Vec<f64>,
        consumption: BTreeMap<(JobId, EventId), f64>,
        relax_rate_min: BTreeMap<(JobId, EventId), f64>,
        relax_rate_max: BTreeMap<(JobId, EventId), f64>,
        relax_capacity: BTreeMap<EventId, f64>,
        score: f64,
    ) -> Self {
        Schedule {
            times,
            consumption,
            relax_rate_min,
            relax_rate_max,
            relax_capacity,
            score,
        }
    }

    /// Builds a schedule from event times and per-interval consumed
    /// amounts, with no relaxation.  Amounts may omit intervals (treated as
    /// zero) but must not name intervals outside the owning job's active
    /// span.  The score is computed from the instance costs.
    pub fn from_interval_amounts(
        inst: &Instance,
        order: &EventOrder,
        times: Vec<f64>,
        amounts: impl IntoIterator<Item = ((JobId, EventId), f64)>,
    ) -> Result<Self, ScheduleError> {
        if times.len() != inst.event_count() {
            return Err(ScheduleError::TimesLength {
                expected: inst.event_count(),
                got: times.len(),
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(ScheduleError::NonFiniteTime {
                    event: EventId::new(i + 1),
                });
            }
        }
        let mut consumption = BTreeMap::new();
        for job in inst.job_ids() {
            for q in active_span(order, job) {
                consumption.insert((job, order.at(q)), 0.0);
            }
        }
        for ((job, interval), amount) in amounts {
            if !amount.is_finite() {
                return Err(ScheduleError::NonFiniteAmount { job, interval });
            }
            match consumption.get_mut(&(job, interval)) {
                Some(slot) => *slot += amount,
                None => return Err(ScheduleError::KeyOutsideWindow { job, interval }),
            }
        }
        let score = inst
            .job_ids()
            .map(|j| {
                let job = inst.job(j);
                job.weight * times[j.completion_event().zero_based()] + job.offset
            })
            .sum();
        Ok(Schedule {
            times,
            consumption,
            relax_rate_min: BTreeMap::new(),
            relax_rate_max: BTreeMap::new(),
            relax_capacity: BTreeMap::new(),
            score,
        })
    }

    /// Number of jobs.
    pub fn n(&self) -> usize {
        self.times.len() / 2
    }

    pub fn time(&self, event: EventId) -> f64 {
        self.times[event.zero_based()]
    }

    pub fn start_time(&self, job: JobId) -> f64 {
        self.time(job.start_event())
    }

    pub fn completion_time(&self, job: JobId) -> f64 {
        self.time(job.completion_event())
    }

    /// Event times indexed by `event id - 1`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Energy consumed by `job` in the interval opened by `interval`
    /// (zero for intervals outside its active span).
    pub fn consumed(&self, job: JobId, interval: EventId) -> f64 {
        self.consumption.get(&(job, interval)).copied().unwrap_or(0.0)
    }

    pub fn consumption(&self) -> &BTreeMap<(JobId, EventId), f64> {
        &self.consumption
    }

    pub fn relax_rate_min(&self) -> &BTreeMap<(JobId, EventId), f64> {
        &self.relax_rate_min
    }

    pub fn relax_rate_max(&self) -> &BTreeMap<(JobId, EventId), f64> {
        &self.relax_rate_max
    }

    pub fn relax_capacity(&self) -> &BTreeMap<EventId, f64> {
        &self.relax_capacity
    }

    /// Largest relaxation amount anywhere in the schedule; `0.0` when the
    /// evaluation needed no cheating at all.
    pub fn max_relaxation(&self) -> f64 {
        self.relax_rate_min
            .values()
            .chain(self.relax_rate_max.values())
            .chain(self.relax_capacity.values())
            .fold(0.0_f64, |acc, &v| acc.max(v))
    }

    /// Evaluation score: completion costs plus penalised relaxation.  For a
    /// schedule with zero relaxation this is exactly the objective value.
    pub fn score(&self) -> f64 {
        self.score
    }
}

/// 0-based interval positions between a job's start and completion events.
pub(crate) fn active_span(order: &EventOrder, job: JobId) -> std::ops::Range<usize> {
    order.position(job.start_event())..order.position(job.completion_event())
}

/// Reinterprets a feasible consumption profile as one with a constant rate
/// in every interval of the order.  The input is the profile's integral per
/// `(job, interval)`; since a schedule stores exactly those integrals, the
/// per-interval amounts pass through unchanged and the completion costs —
/// which depend only on event times — are preserved.
pub fn piecewise_constant_average(
    inst: &Instance,
    order: &EventOrder,
    times: Vec<f64>,
    amounts: impl IntoIterator<Item = ((JobId, EventId), f64)>,
) -> Result<Schedule, ScheduleError> {
    Schedule::from_interval_amounts(inst, order, times, amounts)
}

// ---------------------------------------------------------------------------
// On-disk format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AmountEntry {
    job: JobId,
    interval: EventId,
    amount: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CapacityEntry {
    interval: EventId,
    amount: f64,
}

/// Serialisable schedule: the chronological event order, event times
/// (indexed by event id), consumption and relaxation amounts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub version: u32,
    pub order: Vec<EventId>,
    pub times: Vec<f64>,
    consumption: Vec<AmountEntry>,
    relax_rate_min: Vec<AmountEntry>,
    relax_rate_max: Vec<AmountEntry>,
    relax_capacity: Vec<CapacityEntry>,
    pub score: f64,
}

fn to_entries(map: &BTreeMap<(JobId, EventId), f64>) -> Vec<AmountEntry> {
    map.iter()
        .map(|(&(job, interval), &amount)| AmountEntry {
            job,
            interval,
            amount,
        })
        .collect()
}

fn from_entries(entries: Vec<AmountEntry>) -> BTreeMap<(JobId, EventId), f64> {
    entries
        .into_iter()
        .map(|e| ((e.job, e.interval), e.amount))
        .collect()
}

impl Schedule {
    pub fn to_file(&self, order: &EventOrder) -> ScheduleFile {
        ScheduleFile {
            version: SCHEDULE_FORMAT_VERSION,
            order: order.events().to_vec(),
            times: self.times.clone(),
            consumption: to_entries(&self.consumption),
            relax_rate_min: to_entries(&self.relax_rate_min),
            relax_rate_max: to_entries(&self.relax_rate_max),
            relax_capacity: self
                .relax_capacity
                .iter()
                .map(|(&interval, &amount)| CapacityEntry { interval, amount })
                .collect(),
            score: self.score,
        }
    }

    /// Rebuilds the order and schedule stored in a [`ScheduleFile`].
    pub fn from_file(file: ScheduleFile) -> Result<(EventOrder, Schedule), ScheduleError> {
        if file.version != SCHEDULE_FORMAT_VERSION {
            return Err(ScheduleError::Version {
                found: file.version,
                expected: SCHEDULE_FORMAT_VERSION,
            });
        }
        let order = EventOrder::new(file.order)?;
        if file.times.len() != order.len() {
            return Err(ScheduleError::TimesLength {
                expected: order.len(),
                got: file.times.len(),
            });
        }
        let schedule = Schedule {
            times: file.times,
            consumption: from_entries(file.consumption),
            relax_rate_min: from_entries(file.relax_rate_min),
            relax_rate_max: from_entries(file.relax_rate_max),
            relax_capacity: file
                .relax_capacity
                .into_iter()
                .map(|e| (e.interval, e.amount))
                .collect(),
            score: file.score,
        };
        Ok((order, schedule))
    }
}
