//! Problem instances: jobs with energy demands on a shared continuous
//! resource.
//!
//! A job must receive a total amount of energy inside its time window.
//! Whenever the job is active its instantaneous consumption rate must stay
//! between its lower and upper rate bounds, and at every moment the summed
//! rate over all jobs may not exceed the resource capacity.  Finishing job
//! `j` at time `C_j` costs `w_j * C_j + B_j`; the objective is the sum of
//! these costs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::{EventId, JobId};

/// Tolerance used when checking that a job's window is long enough to fit
/// its energy at peak rate.
const WINDOW_TOL: f64 = 1e-9;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("capacity must be positive and finite (got {value})")]
    BadCapacity { value: f64 },
    #[error("job {job}: {field} must be finite")]
    NotFinite { job: usize, field: &'static str },
    #[error("job {job}: energy must be positive (got {value})")]
    BadEnergy { job: usize, value: f64 },
    #[error("job {job}: rate bounds must satisfy 0 <= min <= max with max > 0 (got {min}..{max})")]
    BadRates { job: usize, min: f64, max: f64 },
    #[error("job {job}: release must be non-negative (got {value})")]
    BadRelease { job: usize, value: f64 },
    #[error("job {job}: deadline {deadline} does not lie after release {release}")]
    EmptyWindow {
        job: usize,
        release: f64,
        deadline: f64,
    },
    #[error(
        "job {job}: window [{release}, {deadline}] is shorter than the {min_duration} needed at peak rate"
    )]
    WindowTooShort {
        job: usize,
        release: f64,
        deadline: f64,
        min_duration: f64,
    },
    #[error("job {job}: weight must be non-negative (got {value})")]
    BadWeight { job: usize, value: f64 },
    #[error("job {job}: cost offset must be non-negative (got {value})")]
    BadOffset { job: usize, value: f64 },
    #[error("unsupported format version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },
}

/// One job of an instance.  Plain data; invariants are enforced when an
/// [`Instance`] is constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    /// Total energy the job must receive (`E`).
    #[serde(rename = "E")]
    pub energy: f64,
    /// Earliest time the job may consume (`r`).
    #[serde(rename = "r")]
    pub release: f64,
    /// Latest time by which the job must be complete.
    pub deadline: f64,
    /// Minimum consumption rate while the job is active.
    #[serde(rename = "p_min")]
    pub rate_min: f64,
    /// Maximum consumption rate.
    #[serde(rename = "p_max")]
    pub rate_max: f64,
    /// Cost per unit of completion time (`w`).
    #[serde(rename = "w")]
    pub weight: f64,
    /// Fixed cost added once (`B`).
    #[serde(rename = "B")]
    pub offset: f64,
}

impl Job {
    /// Shortest possible active span: energy at peak rate.
    pub fn min_duration(&self) -> f64 {
        self.energy / self.rate_max
    }

    fn check(&self, job: usize) -> Result<(), InstanceError> {
        let fields = [
            (self.energy, "energy"),
            (self.release, "release"),
            (self.deadline, "deadline"),
            (self.rate_min, "rate_min"),
            (self.rate_max, "rate_max"),
            (self.weight, "weight"),
            (self.offset, "offset"),
        ];
        for (value, field) in fields {
            if !value.is_finite() {
                return Err(InstanceError::NotFinite { job, field });
            }
        }
        if self.energy <= 0.0 {
            return Err(InstanceError::BadEnergy {
                job,
                value: self.energy,
            });
        }
        if !(0.0 <= self.rate_min && self.rate_min <= self.rate_max) || self.rate_max <= 0.0 {
            return Err(InstanceError::BadRates {
                job,
                min: self.rate_min,
                max: self.rate_max,
            });
        }
        if self.release < 0.0 {
            return Err(InstanceError::BadRelease {
                job,
                value: self.release,
            });
        }
        if self.deadline <= self.release {
            return Err(InstanceError::EmptyWindow {
                job,
                release: self.release,
                deadline: self.deadline,
            });
        }
        if self.deadline - self.release < self.min_duration() - WINDOW_TOL {
            return Err(InstanceError::WindowTooShort {
                job,
                release: self.release,
                deadline: self.deadline,
                min_duration: self.min_duration(),
            });
        }
        if self.weight < 0.0 {
            return Err(InstanceError::BadWeight {
                job,
                value: self.weight,
            });
        }
        if self.offset < 0.0 {
            return Err(InstanceError::BadOffset {
                job,
                value: self.offset,
            });
        }
        Ok(())
    }
}

/// A validated scheduling instance: a resource capacity and its jobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    capacity: f64,
    jobs: Vec<Job>,
}

/// On-disk shape of an instance.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    capacity: f64,
    jobs: Vec<Job>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

impl Instance {
    pub fn new(capacity: f64, jobs: Vec<Job>) -> Result<Self, InstanceError> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(InstanceError::BadCapacity { value: capacity });
        }
        if jobs.is_empty() {
            return Err(InstanceError::NoJobs);
        }
        for (i, job) in jobs.iter().enumerate() {
            job.check(i + 1)?;
        }
        Ok(Instance { capacity, jobs })
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Number of jobs.
    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    /// Number of events (`2n`).
    pub fn event_count(&self) -> usize {
        2 * self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id.zero_based()]
    }

    pub fn job_ids(&self) -> impl Iterator<Item = JobId> {
        (1..=self.jobs.len()).map(JobId::new)
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (1..=self.event_count()).map(EventId::new)
    }

    /// Latest deadline; no event of a feasible schedule can lie beyond it.
    pub fn horizon(&self) -> f64 {
        self.jobs
            .iter()
            .map(|j| j.deadline)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total energy over all jobs.
    pub fn total_energy(&self) -> f64 {
        self.jobs.iter().map(|j| j.energy).sum()
    }

    pub fn from_json_str(text: &str) -> Result<Self, LoadError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(InstanceError::Version {
                found: file.version,
                expected: FORMAT_VERSION,
            }
            .into());
        }
        Ok(Instance::new(file.capacity, file.jobs)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            version: FORMAT_VERSION,
            capacity: self.capacity,
            jobs: self.jobs.clone(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("instances serialise");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn job(
        energy: f64,
        release: f64,
        deadline: f64,
        rate_min: f64,
        rate_max: f64,
        weight: f64,
    ) -> Job {
        Job {
            energy,
            release,
            deadline,
            rate_min,
            rate_max,
            weight,
            offset: 0.0,
        }
    }

    #[test]
    fn accepts_a_valid_instance() {
        let inst = Instance::new(
            50.0,
            vec![
                job(70.0, 0.0, 3.0, 10.0, 30.0, 1.0),
                job(20.0, 1.5, 3.0, 10.0, 40.0, 3.5),
                job(45.0, 2.5, 4.0, 10.0, 50.0, 5.0),
            ],
        )
        .unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.event_count(), 6);
        assert_eq!(inst.horizon(), 4.0);
        assert!((inst.total_energy() - 135.0).abs() < 1e-12);
        assert_eq!(inst.job(JobId::new(2)).weight, 3.5);
    }

    #[test]
    fn rejects_invalid_jobs() {
        let base = job(10.0, 0.0, 5.0, 0.0, 10.0, 1.0);
        let mut bad = base.clone();
        bad.energy = 0.0;
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::BadEnergy { job: 1, .. })
        ));
        let mut bad = base.clone();
        bad.rate_min = 12.0;
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::BadRates { .. })
        ));
        let mut bad = base.clone();
        bad.release = -1.0;
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::BadRelease { .. })
        ));
        let mut bad = base.clone();
        bad.deadline = 0.5; // needs 1.0 at peak rate
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::WindowTooShort { .. })
        ));
        let mut bad = base.clone();
        bad.weight = -0.1;
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::BadWeight { .. })
        ));
        assert!(matches!(
            Instance::new(0.0, vec![base.clone()]),
            Err(InstanceError::BadCapacity { .. })
        ));
        assert!(matches!(
            Instance::new(10.0, vec![]),
            Err(InstanceError::NoJobs)
        ));
        let mut bad = base;
        bad.deadline = f64::NAN;
        assert!(matches!(
            Instance::new(10.0, vec![bad]),
            Err(InstanceError::NotFinite { .. })
        ));
    }

    #[test]
    fn window_check_tolerates_exact_fit() {
        // deadline - release equals energy / rate_max exactly.
        let inst = Instance::new(10.0, vec![job(10.0, 2.0, 3.0, 0.0, 10.0, 1.0)]);
        assert!(inst.is_ok());
    }

    #[test]
    fn json_round_trip_preserves_fields() {
        let inst = Instance::new(
            25.5,
            vec![job(12.25, 0.5, 7.75, 1.0, 6.5, 2.0)],
        )
        .unwrap();
        let text = inst.to_json_string();
        assert!(text.contains("\"E\": 12.25"));
        assert!(text.contains("\"p_max\": 6.5"));
        let back = Instance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_unknown_versions_and_fields() {
        let text = r#"{"version": 2, "capacity": 10, "jobs": []}"#;
        assert!(matches!(
            Instance::from_json_str(text),
            Err(LoadError::Invalid(InstanceError::Version { found: 2, .. }))
        ));
        let text = r#"{"version": 1, "capacity": 10, "jobs": [
            {"E": 10, "r": 0, "deadline": 5, "p_min": 0, "p_max": 10, "w": 1, "B": 0, "extra": 3}
        ]}"#;
        assert!(matches!(Instance::from_json_str(text), Err(LoadError::Json(_))));
    }
}
