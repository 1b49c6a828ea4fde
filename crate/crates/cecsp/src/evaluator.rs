//! Scoring an event order by linear programming.
//!
//! Fixing the chronological order of all starts and completions leaves a
//! continuous problem: pick event times and per-interval consumption
//! amounts.  Those are chosen by an LP whose rows are
//!
//! * the time chain (each event no earlier than its predecessor),
//! * per-job release and deadline limits on the start/completion times,
//! * per-job work totals over the job's active intervals,
//! * per-job rate bounds per interval, and
//! * the shared capacity per interval.
//!
//! In *penalised* mode the rate and capacity rows carry relaxation
//! variables whose use is charged linearly in the objective, so every order
//! without a window conflict gets a finite score even when it admits no
//! feasible schedule; local search needs that gradient.  In *forbidden*
//! mode there are no relaxation variables and the LP value is the true
//! optimal cost of the order (or infeasibility), which is what exact
//! enumeration wants.
//!
//! An order has a *window conflict* when some job `a` must start at or
//! before the completion of a job `b` whose deadline lies strictly before
//! `a`'s release; no choice of times can serve such an order and its score
//! is `+inf`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, Sense, VarId, VarKind};
use crate::model::{active_span, EventOrder, Instance, JobId, Schedule};
use crate::model::EventId;

/// Cost per unit of relaxation in the penalised evaluation LP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Charge per unit by which a job's rate bounds are relaxed.
    pub rate_bounds: f64,
    /// Charge per unit by which the shared capacity is relaxed.
    pub capacity: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights {
            rate_bounds: 5.0,
            capacity: 5.0,
        }
    }
}

/// Whether the evaluation LP may relax rate/capacity rows at a price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationMode {
    Penalized(PenaltyWeights),
    Forbidden,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("order covers {order_jobs} jobs but the instance has {instance_jobs}")]
    SizeMismatch {
        order_jobs: usize,
        instance_jobs: usize,
    },
    #[error("penalised evaluation reported infeasibility for a conflict-free order")]
    UnexpectedInfeasible,
    #[error("lp solve failed: {0}")]
    Solver(String),
}

/// The evaluation LP for one `(instance, order)` pair, with handles to its
/// variables so solutions can be read back into a [`Schedule`].
pub struct ScheduleLp<'a> {
    inst: &'a Instance,
    order: &'a EventOrder,
    model: lp::Model,
    mode: RelaxationMode,
    time_vars: Vec<VarId>,
    amount_vars: BTreeMap<(JobId, EventId), VarId>,
    relax_min_vars: BTreeMap<(JobId, EventId), VarId>,
    relax_max_vars: BTreeMap<(JobId, EventId), VarId>,
    relax_cap_vars: BTreeMap<EventId, VarId>,
}

impl ScheduleLp<'_> {
    pub fn model(&self) -> &lp::Model {
        &self.model
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn order(&self) -> &EventOrder {
        self.order
    }
}

/// Builds the evaluation LP for an order.
pub fn build_schedule_lp<'a>(
    inst: &'a Instance,
    order: &'a EventOrder,
    mode: RelaxationMode,
) -> Result<ScheduleLp<'a>, EvalError> {
    if order.n() != inst.n() {
        return Err(EvalError::SizeMismatch {
            order_jobs: order.n(),
            instance_jobs: inst.n(),
        });
    }
    let mut model = lp::Model::new("order-evaluation");
    let inf = f64::INFINITY;

    // Event times; completions carry their job's weight in the objective.
    let time_vars: Vec<VarId> = inst
        .event_ids()
        .map(|e| {
            let weight = if e.is_completion() {
                inst.job(e.job()).weight
            } else {
                0.0
            };
            model.add_var(format!("t{}", e.index()), VarKind::Continuous, 0.0, inf, weight)
        })
        .collect();
    let t = |e: EventId| time_vars[e.zero_based()];

    // Consumption amounts per (job, active interval).
    let mut amount_vars = BTreeMap::new();
    for job in inst.job_ids() {
        for q in active_span(order, job) {
            let key = order.at(q);
            let var = model.add_var(
                format!("p{}_{}", job, key.index()),
                VarKind::Continuous,
                0.0,
                inf,
                0.0,
            );
            amount_vars.insert((job, key), var);
        }
    }

    // Relaxation variables (penalised mode only).
    let mut relax_min_vars = BTreeMap::new();
    let mut relax_max_vars = BTreeMap::new();
    let mut relax_cap_vars = BTreeMap::new();
    if let RelaxationMode::Penalized(weights) = mode {
        for &(job, key) in amount_vars.keys() {
            let lo = model.add_var(
                format!("rlo{}_{}", job, key.index()),
                VarKind::Continuous,
                0.0,
                inf,
                weights.rate_bounds,
            );
            let hi = model.add_var(
                format!("rhi{}_{}", job, key.index()),
                VarKind::Continuous,
                0.0,
                inf,
                weights.rate_bounds,
            );
            relax_min_vars.insert((job, key), lo);
            relax_max_vars.insert((job, key), hi);
        }
        for q in 0..order.interval_count() {
            let key = order.at(q);
            let var = model.add_var(
                format!("rcap{}", key.index()),
                VarKind::Continuous,
                0.0,
                inf,
                weights.capacity,
            );
            relax_cap_vars.insert(key, var);
        }
    }

    // Fixed completion costs.
    model.set_objective_offset(inst.jobs().iter().map(|j| j.offset).sum());

    // Time chain along the order.
    for q in 0..order.interval_count() {
        model.add_row(
            format!("ord{}", q + 1),
            [(t(order.at(q + 1)), 1.0), (t(order.at(q)), -1.0)],
            Sense::Ge,
            0.0,
        );
    }
    for id in inst.job_ids() {
        let job = inst.job(id);
        // Release and deadline on the job's own events.
        model.add_row(
            format!("rel{id}"),
            [(t(id.start_event()), 1.0)],
            Sense::Ge,
            job.release,
        );
        model.add_row(
            format!("dl{id}"),
            [(t(id.completion_event()), 1.0)],
            Sense::Le,
            job.deadline,
        );
        // Work total over the active span.
        model.add_row(
            format!("work{id}"),
            active_span(order, id).map(|q| (amount_vars[&(id, order.at(q))], 1.0)),
            Sense::Eq,
            job.energy,
        );
        // Rate bounds per active interval.
        for q in active_span(order, id) {
            let key = order.at(q);
            let amount = amount_vars[&(id, key)];
            let open = t(key);
            let close = t(order.at(q + 1));
            let mut hi_terms = vec![(amount, 1.0), (close, -job.rate_max), (open, job.rate_max)];
            if let Some(&relax) = relax_max_vars.get(&(id, key)) {
                hi_terms.push((relax, -1.0));
            }
            model.add_row(format!("rmax{}_{}", id, key.index()), hi_terms, Sense::Le, 0.0);
            let mut lo_terms = vec![(amount, 1.0), (close, -job.rate_min), (open, job.rate_min)];
            if let Some(&relax) = relax_min_vars.get(&(id, key)) {
                lo_terms.push((relax, 1.0));
            }
            model.add_row(format!("rmin{}_{}", id, key.index()), lo_terms, Sense::Ge, 0.0);
        }
    }
    // Shared capacity per interval.
    for q in 0..order.interval_count() {
        let key = order.at(q);
        let mut terms: Vec<(VarId, f64)> = inst
            .job_ids()
            .filter_map(|id| amount_vars.get(&(id, key)).map(|&v| (v, 1.0)))
            .collect();
        terms.push((t(order.at(q + 1)), -inst.capacity()));
        terms.push((t(key), inst.capacity()));
        if let Some(&relax) = relax_cap_vars.get(&key) {
            terms.push((relax, -1.0));
        }
        model.add_row(format!("cap{}", key.index()), terms, Sense::Le, 0.0);
    }

    Ok(ScheduleLp {
        inst,
        order,
        model,
        mode,
        time_vars,
        amount_vars,
        relax_min_vars,
        relax_max_vars,
        relax_cap_vars,
    })
}

/// Solves an evaluation LP.  `Ok(None)` means the LP is infeasible — in
/// penalised mode that only happens for orders with a window conflict, in
/// forbidden mode whenever the order admits no feasible schedule.
pub fn solve_schedule_lp(lp: &ScheduleLp<'_>) -> Result<Option<Schedule>, EvalError> {
    let solution = match lp.model.solve() {
        Ok(solution) => solution,
        Err(lp::SolveError::Infeasible) => return Ok(None),
        Err(err) => return Err(EvalError::Solver(err.to_string())),
    };
    let times: Vec<f64> = lp.time_vars.iter().map(|&v| solution.value(v)).collect();
    let read = |vars: &BTreeMap<(JobId, EventId), VarId>| {
        vars.iter()
            .map(|(&key, &var)| (key, solution.value(var)))
            .collect::<BTreeMap<_, _>>()
    };
    let schedule = Schedule::from_parts(
        times,
        read(&lp.amount_vars),
        read(&lp.relax_min_vars),
        read(&lp.relax_max_vars),
        lp.relax_cap_vars
            .iter()
            .map(|(&key, &var)| (key, solution.value(var)))
            .collect(),
        solution.objective(),
    );
    debug_assert!(
        matches!(lp.mode, RelaxationMode::Penalized(_)) || schedule.max_relaxation() == 0.0
    );
    Ok(Some(schedule))
}

/// Whether the order forces some job to start at or before the completion
/// of a job whose deadline precedes its release.  Exactly these orders make
/// the penalised LP infeasible.
pub fn has_window_conflict(inst: &Instance, order: &EventOrder) -> bool {
    inst.job_ids().any(|a| {
        let start_pos = order.position(a.start_event());
        let release = inst.job(a).release;
        inst.job_ids().any(|b| {
            start_pos < order.position(b.completion_event())
                && release > inst.job(b).deadline
        })
    })
}

/// Result of scoring an order: a schedule with a finite score, or a window
/// conflict scored `+inf`.
#[derive(Debug, Clone)]
pub enum OrderScore {
    Scored(Schedule),
    WindowConflict,
}

impl OrderScore {
    pub fn score(&self) -> f64 {
        match self {
            OrderScore::Scored(schedule) => schedule.score(),
            OrderScore::WindowConflict => f64::INFINITY,
        }
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            OrderScore::Scored(schedule) => Some(schedule),
            OrderScore::WindowConflict => None,
        }
    }

    pub fn into_schedule(self) -> Option<Schedule> {
        match self {
            OrderScore::Scored(schedule) => Some(schedule),
            OrderScore::WindowConflict => None,
        }
    }

    pub fn is_conflict(&self) -> bool {
        matches!(self, OrderScore::WindowConflict)
    }
}

/// Scores an order with the penalised LP (the local-search objective).
pub fn score_order(
    inst: &Instance,
    order: &EventOrder,
    weights: PenaltyWeights,
) -> Result<OrderScore, EvalError> {
    if order.n() != inst.n() {
        return Err(EvalError::SizeMismatch {
            order_jobs: order.n(),
            instance_jobs: inst.n(),
        });
    }
    if has_window_conflict(inst, order) {
        return Ok(OrderScore::WindowConflict);
    }
    let lp = build_schedule_lp(inst, order, RelaxationMode::Penalized(weights))?;
    match solve_schedule_lp(&lp)? {
        Some(schedule) => Ok(OrderScore::Scored(schedule)),
        None => Err(EvalError::UnexpectedInfeasible),
    }
}
