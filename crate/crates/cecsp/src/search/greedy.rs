//! A deadline-driven starting order.
//!
//! The builder sweeps the time axis over the periods delimited by releases
//! and deadlines and hands out energy in two passes per period: first the
//! amount each released job *must* receive now to stay able to finish at
//! full rate by its deadline, then — capacity permitting — more energy to
//! the most urgent jobs.  A job's start is recorded the first time it
//! receives energy and its completion once nothing is left, which yields an
//! event order rather than a schedule; the order is meant as a starting
//! point for local search, not as a feasibility proof.

use crate::model::{EventId, EventOrder, Instance, JobId};

const EPS: f64 = 1e-9;

/// Builds a starting order for an instance.
pub fn greedy_initial_order(inst: &Instance) -> EventOrder {
    let n = inst.n();
    let mut cuts: Vec<f64> = inst
        .jobs()
        .iter()
        .flat_map(|j| [j.release, j.deadline])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut remaining: Vec<f64> = inst.jobs().iter().map(|j| j.energy).collect();
    let mut started = vec![false; n];
    let mut completed = vec![false; n];
    let mut seq: Vec<EventId> = Vec::with_capacity(inst.event_count());

    for window in cuts.windows(2) {
        let (begin, end) = (window[0], window[1]);
        let length = end - begin;
        let available: Vec<JobId> = inst
            .job_ids()
            .filter(|&j| inst.job(j).release <= begin && remaining[j.zero_based()] > EPS)
            .collect();
        if available.is_empty() {
            continue;
        }
        let mut assigned = vec![0.0; n];
        // Pass 1: everything that cannot wait beyond this period, even if
        // that overruns the capacity — a lost cause is still ordered.
        for &j in &available {
            let job = inst.job(j);
            let latest_later = (job.deadline - end) * job.rate_max;
            assigned[j.zero_based()] =
                (remaining[j.zero_based()] - latest_later).clamp(0.0, remaining[j.zero_based()]);
        }
        let mut pool = length * inst.capacity() - assigned.iter().sum::<f64>();
        // Pass 2: top the most urgent jobs up to their rate limit.
        if pool > -EPS {
            let mut urgent = available.clone();
            urgent.sort_by(|&a, &b| {
                inst.job(a)
                    .deadline
                    .total_cmp(&inst.job(b).deadline)
                    .then(a.cmp(&b))
            });
            for j in urgent {
                let job = inst.job(j);
                let idx = j.zero_based();
                let extra = (remaining[idx] - assigned[idx])
                    .min(job.rate_max * length - assigned[idx])
                    .min(pool)
                    .max(0.0);
                assigned[idx] += extra;
                pool -= extra;
            }
        }
        for &j in &available {
            let idx = j.zero_based();
            if assigned[idx] <= 0.0 {
                continue;
            }
            if !started[idx] {
                started[idx] = true;
                seq.push(j.start_event());
            }
            remaining[idx] -= assigned[idx];
            if remaining[idx] <= EPS && !completed[idx] {
                completed[idx] = true;
                seq.push(j.completion_event());
            }
        }
    }

    // Anything the sweep could not place still needs its events, most
    // urgent first.
    let mut leftover: Vec<JobId> = inst
        .job_ids()
        .filter(|&j| !started[j.zero_based()])
        .collect();
    leftover.sort_by(|&a, &b| {
        inst.job(a)
            .deadline
            .total_cmp(&inst.job(b).deadline)
            .then(a.cmp(&b))
    });
    for &j in &leftover {
        seq.push(j.start_event());
    }
    let mut unfinished: Vec<JobId> = inst
        .job_ids()
        .filter(|&j| !completed[j.zero_based()])
        .collect();
    unfinished.sort_by(|&a, &b| {
        inst.job(a)
            .deadline
            .total_cmp(&inst.job(b).deadline)
            .then(a.cmp(&b))
    });
    for j in unfinished {
        seq.push(j.completion_event());
    }

    EventOrder::new(seq).expect("the sweep emits each event once, starts first")
}
