//! Random instance generation with tunable difficulty.
//!
//! Energies are drawn first so that the expected makespan `sum(E) / P` can
//! anchor the release and deadline distributions.  All drawn values are
//! quantised to two decimals (rates round outward so bounds never tighten
//! by rounding), and windows are repaired afterwards so every job can still
//! finish at peak rate.  With `adversarial` set, completion-time weights
//! are reshuffled so that the largest weights sit on the jobs with the
//! latest deadlines, which works against greedy earliest-deadline
//! heuristics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, InstanceError, Job};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("generator needs at least one job (got {0})")]
    NoJobs(usize),
    #[error("capacity must be positive and finite (got {0})")]
    BadCapacity(f64),
    #[error("{name} must lie in {range} (got {value})")]
    BadParameter {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("generated jobs failed instance validation: {0}")]
    Invalid(#[from] InstanceError),
}

/// Tuning knobs for [`generate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub capacity: f64,
    /// Reassign weights so late deadlines get the large weights.
    pub adversarial: bool,
    /// Upper bound on minimum rates, as a fraction of capacity.
    pub max_low_fraction: f64,
    /// Lower bound on maximum rates, as a fraction of the job's energy.
    pub min_upp_fraction: f64,
    /// How far releases may shift to before time zero, as a fraction of the
    /// expected makespan (negative draws clamp to zero).
    pub release_shift: f64,
    /// Window span upper bound, as a multiple of the expected makespan.
    pub window_span: f64,
    /// Also draw fixed completion-cost offsets (otherwise all zero).
    pub with_offsets: bool,
    pub seed: u64,
}

impl GenConfig {
    /// Standard parameters for a given size: smaller instances get the
    /// wider window multiplier.
    pub fn preset(n: usize, capacity: f64, adversarial: bool, seed: u64) -> Self {
        GenConfig {
            n,
            capacity,
            adversarial,
            max_low_fraction: 0.25,
            min_upp_fraction: 0.25,
            release_shift: 0.125,
            window_span: if n <= 10 { 2.0 } else { 1.5 },
            with_offsets: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::NoJobs(self.n));
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(GenError::BadCapacity(self.capacity));
        }
        let checks = [
            (
                "max_low_fraction",
                self.max_low_fraction,
                self.max_low_fraction > 0.0 && self.max_low_fraction.is_finite(),
                "(0, inf)",
            ),
            (
                "min_upp_fraction",
                self.min_upp_fraction,
                self.min_upp_fraction > 0.0 && self.min_upp_fraction <= 1.0,
                "(0, 1]",
            ),
            (
                "release_shift",
                self.release_shift,
                (0.0..1.0).contains(&self.release_shift),
                "[0, 1)",
            ),
            (
                "window_span",
                self.window_span,
                self.window_span > 0.0 && self.window_span.is_finite(),
                "(0, inf)",
            ),
        ];
        for (name, value, ok, range) in checks {
            if !ok {
                return Err(GenError::BadParameter { name, range, value });
            }
        }
        Ok(())
    }
}

/// Notes about repairs applied while generating (degenerate window spans,
/// deadline bumps).  Empty for most instances.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenLog {
    pub notes: Vec<String>,
}

/// Quantisation to hundredths, in the given rounding direction.
fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn floor2(x: f64) -> f64 {
    (x * 100.0).floor() / 100.0
}

fn ceil2(x: f64) -> f64 {
    (x * 100.0).ceil() / 100.0
}

/// Draws uniformly from `[lo, hi)`, or returns `lo` when the range is
/// empty or degenerate.
fn draw(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Generates an instance from explicit randomness.  All quantities are
/// quantised to two decimals; see the module docs for the distributions.
pub fn generate_instance(
    config: &GenConfig,
    rng: &mut impl Rng,
) -> Result<(Instance, GenLog), GenError> {
    config.validate()?;
    let mut log = GenLog::default();
    let capacity = config.capacity;

    let energies: Vec<f64> = (0..config.n)
        .map(|_| round2(draw(rng, 10.0, 100.0)))
        .collect();
    let total_energy: f64 = energies.iter().sum();
    let expected_makespan = total_energy / capacity;

    let mut jobs = Vec::with_capacity(config.n);
    for (index, &energy) in energies.iter().enumerate() {
        let rate_min = floor2(draw(
            rng,
            0.0,
            (config.max_low_fraction * capacity).min(config.min_upp_fraction * energy),
        ));
        let rate_max = ceil2(draw(rng, config.min_upp_fraction * energy, energy));

        let release_raw = draw(
            rng,
            -config.release_shift * expected_makespan,
            (1.0 - config.release_shift) * expected_makespan,
        );
        let release = round2(release_raw.max(0.0));

        let shortest = energy / capacity.min(rate_max);
        let span_hi = config.window_span * expected_makespan;
        let span = if span_hi <= shortest {
            log.notes.push(format!(
                "job {}: window span collapsed to its minimum {:.4} (upper bound {:.4})",
                index + 1,
                shortest,
                span_hi
            ));
            shortest
        } else {
            draw(rng, shortest, span_hi)
        };
        let mut deadline = round2(release + span);
        let mut bumps = 0u32;
        while deadline - release < shortest {
            deadline = round2(deadline + 0.01);
            bumps += 1;
        }
        if bumps > 0 {
            log.notes.push(format!(
                "job {}: deadline bumped {bumps} tick(s) to fit the window",
                index + 1
            ));
        }

        let weight = round2(draw(rng, 0.0, 5.0));
        let offset = if config.with_offsets {
            round2(draw(rng, 0.0, 10.0))
        } else {
            0.0
        };
        jobs.push(Job {
            energy,
            release,
            deadline,
            rate_min,
            rate_max,
            weight,
            offset,
        });
    }

    if config.adversarial {
        // Sort the drawn weights and hand the largest to the latest
        // deadline (ties broken by job position, stably).
        let mut weights: Vec<f64> = jobs.iter().map(|j| j.weight).collect();
        weights.sort_by(f64::total_cmp);
        let mut by_deadline: Vec<usize> = (0..jobs.len()).collect();
        by_deadline.sort_by(|&a, &b| {
            jobs[a]
                .deadline
                .total_cmp(&jobs[b].deadline)
                .then(a.cmp(&b))
        });
        for (rank, &job_index) in by_deadline.iter().enumerate() {
            jobs[job_index].weight = weights[rank];
        }
    }

    let instance = Instance::new(capacity, jobs)?;
    Ok((instance, log))
}

/// Convenience wrapper seeding a deterministic generator from the config.
pub fn generate(config: &GenConfig) -> Result<(Instance, GenLog), GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    generate_instance(config, &mut rng)
}
