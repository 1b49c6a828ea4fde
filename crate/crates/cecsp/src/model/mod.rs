//! Domain model: instances, events, orders, precedences, schedules and
//! hard-constraint validation.

mod event;
mod instance;
mod order;
mod precedence;
mod schedule;
mod validate;

pub use event::{EventId, JobId};
pub use instance::{Instance, InstanceError, Job, LoadError, FORMAT_VERSION};
pub use order::{EventOrder, OrderError};
pub use precedence::{implicit_precedences, PrecedenceError, PrecedenceSet};
pub use schedule::{
    piecewise_constant_average, Schedule, ScheduleError, ScheduleFile, SCHEDULE_FORMAT_VERSION,
};
pub use validate::{
    validate_schedule, Constraint, ValidateError, ValidationReport, Violation,
};

pub(crate) use schedule::active_span;
