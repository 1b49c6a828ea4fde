//! Exact approaches: a mixed-integer formulation and, for small instances,
//! optimal solving by enumerating event orders.
//!
//! The integer model decides the chronological order of all `2n` events
//! with binary variables — `a[i][k] = 1` when event `i` occurs before
//! event `k`, and `b[i][k] = 1` when `k` is the immediate successor of `i`
//! — alongside the continuous times and per-interval amounts.  Exactly the
//! big-M deactivation pattern makes the rate and capacity rows apply only
//! to intervals that exist under the chosen order.  Binary models are not
//! solved here; they are exported in LP format for an external solver, or
//! reduced to a pure LP by fixing an order.
//!
//! [`enumerate_exact`] is the reference oracle: it walks every event order
//! consistent with a precedence set, scores each with the strict
//! (relaxation-free) evaluation LP and keeps the best.  With `n` jobs there
//! can be `(2n)! / 2^n` orders, so the walk is guarded by a job limit.

use std::collections::HashMap;
use std::io;

use thiserror::Error;

use crate::evaluator::{build_schedule_lp, solve_schedule_lp, EvalError, RelaxationMode};
use crate::lp::{self, Sense, VarId, VarKind};
use crate::model::{EventId, EventOrder, Instance, PrecedenceSet, Schedule};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error(
        "{n} jobs exceed the enumeration limit of {max}; export the integer model for an \
         external solver instead"
    )]
    TooManyJobs { n: usize, max: usize },
    #[error("order/precedence set covers {got} jobs but the instance has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("fixing the order produced an inconsistent model: {0}")]
    BadSubstitution(#[from] lp::SubstituteError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The integer model of an instance, with handles to its binary variables
/// so an event order can be substituted in.
pub struct Milp {
    n: usize,
    model: lp::Model,
    /// `a[(i, k)] = 1` iff event `i` occurs before event `k` (1-based ids).
    a: HashMap<(usize, usize), VarId>,
    /// `b[(i, k)] = 1` iff event `k` immediately follows event `i`.
    b: HashMap<(usize, usize), VarId>,
    /// Continuous variables pinned to a constant by their bounds.
    fixed: Vec<(VarId, f64)>,
}

impl Milp {
    pub fn model(&self) -> &lp::Model {
        &self.model
    }

    /// Number of jobs the model was built for.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes the model in LP format.
    pub fn write_lp(&self, out: &mut impl io::Write) -> io::Result<()> {
        self.model.write_lp(out)
    }

    /// Fixes all order variables according to `order`, substitutes them out
    /// and returns the remaining pure LP over times and amounts.
    pub fn fix_order_and_relax(&self, order: &EventOrder) -> Result<lp::Model, ExactError> {
        if order.n() != self.n {
            return Err(ExactError::SizeMismatch {
                expected: self.n,
                got: order.n(),
            });
        }
        let mut assignment: HashMap<VarId, f64> = HashMap::new();
        for (&(i, k), &var) in &self.a {
            let before = order.position(EventId::new(i)) < order.position(EventId::new(k));
            assignment.insert(var, if before { 1.0 } else { 0.0 });
        }
        for (&(i, k), &var) in &self.b {
            let successor =
                order.position(EventId::new(k)) == order.position(EventId::new(i)) + 1;
            assignment.insert(var, if successor { 1.0 } else { 0.0 });
        }
        for &(var, value) in &self.fixed {
            assignment.insert(var, value);
        }
        Ok(self.model.substitute(&assignment)?)
    }
}

/// Builds the integer model of an instance.
pub fn build_milp(inst: &Instance) -> Milp {
    let n = inst.n();
    let m = inst.event_count();
    let horizon = inst.horizon();
    let inf = f64::INFINITY;
    let mut model = lp::Model::new("event-order-milp");

    // Times; completions carry their job's weight.
    let times: Vec<VarId> = inst
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
    let t = |i: usize| times[i - 1];
    model.set_objective_offset(inst.jobs().iter().map(|j| j.offset).sum());

    // Consumption of job j in the interval opened by event i.  A job never
    // consumes in the interval opened by its own completion, so that
    // variable is pinned to zero.
    let mut amounts = vec![Vec::with_capacity(m); n];
    let mut fixed = Vec::with_capacity(n);
    for job in inst.job_ids() {
        for i in 1..=m {
            let own_completion = i == 2 * job.index();
            let upper = if own_completion { 0.0 } else { inf };
            let var = model.add_var(
                format!("p{}_{}", job, i),
                VarKind::Continuous,
                0.0,
                upper,
                0.0,
            );
            if own_completion {
                fixed.push((var, 0.0));
            }
            amounts[job.zero_based()].push(var);
        }
    }
    let p = |j: usize, i: usize| amounts[j - 1][i - 1];

    // Order variables.  Each start is known to precede its own completion,
    // so that pair is pinned.
    let mut a = HashMap::new();
    let mut b = HashMap::new();
    for i in 1..=m {
        for k in 1..=m {
            if i == k {
                continue;
            }
            let pinned = i % 2 == 1 && k == i + 1;
            let lower = if pinned { 1.0 } else { 0.0 };
            a.insert(
                (i, k),
                model.add_var(format!("a{i}_{k}"), VarKind::Binary, lower, 1.0, 0.0),
            );
        }
    }
    for i in 1..=m {
        for k in 1..=m {
            if i != k {
                b.insert(
                    (i, k),
                    model.add_var(format!("b{i}_{k}"), VarKind::Binary, 0.0, 1.0, 0.0),
                );
            }
        }
    }

    for job in inst.job_ids() {
        let j = job.index();
        let data = inst.job(job);
        // Total work, including the pinned own-completion amount.
        model.add_row(
            format!("work{j}"),
            (1..=m).map(|i| (p(j, i), 1.0)),
            Sense::Eq,
            data.energy,
        );
        // Window ends.
        model.add_row(format!("rel{j}"), [(t(2 * j - 1), 1.0)], Sense::Ge, data.release);
        model.add_row(format!("dl{j}"), [(t(2 * j), 1.0)], Sense::Le, data.deadline);
        // No consumption in intervals opened at or after the completion...
        for i in (1..=m).filter(|&i| i != 2 * j) {
            model.add_row(
                format!("wincmp{j}_{i}"),
                [(p(j, i), 1.0), (a[&(i, 2 * j)], -data.energy)],
                Sense::Le,
                0.0,
            );
        }
        // ...nor in intervals opened before the start.
        for i in (1..=m).filter(|&i| i != 2 * j - 1) {
            model.add_row(
                format!("winstart{j}_{i}"),
                [(p(j, i), 1.0), (a[&(2 * j - 1, i)], -data.energy)],
                Sense::Le,
                0.0,
            );
        }
        // Rate limits against every event k that could close interval i.
        for i in 1..=m {
            for k in (1..=m).filter(|&k| k != i) {
                let big_m = data.rate_max * horizon;
                model.add_row(
                    format!("rmax{j}_{i}_{k}"),
                    [
                        (p(j, i), 1.0),
                        (t(k), -data.rate_max),
                        (t(i), data.rate_max),
                        (a[&(k, i)], -big_m),
                    ],
                    Sense::Le,
                    0.0,
                );
            }
        }
        // Minimum rate applies when k immediately follows i and the job is
        // active there (started at or before i, not completed before k).
        for i in (1..=m).filter(|&i| i != 2 * j) {
            for k in (1..=m).filter(|&k| k != i && k != 2 * j - 1) {
                let big_m = data.rate_min * horizon;
                model.add_row(
                    format!("rmin{j}_{i}_{k}"),
                    [
                        (p(j, i), 1.0),
                        (t(k), -data.rate_min),
                        (t(i), data.rate_min),
                        (b[&(i, k)], -big_m),
                        (a[&(k, 2 * j - 1)], big_m),
                        (a[&(2 * j, i)], big_m),
                    ],
                    Sense::Ge,
                    -big_m,
                );
            }
        }
        // Span limits between a job's own events.
        if data.rate_min > 0.0 {
            model.add_row(
                format!("maxspan{j}"),
                [(t(2 * j), 1.0), (t(2 * j - 1), -1.0)],
                Sense::Le,
                data.energy / data.rate_min,
            );
        }
        model.add_row(
            format!("minspan{j}"),
            [(t(2 * j), 1.0), (t(2 * j - 1), -1.0)],
            Sense::Ge,
            data.energy / data.rate_max,
        );
    }

    for i in 1..=m {
        for k in (1..=m).filter(|&k| k != i) {
            // Capacity of the interval opened by i, if k closes it.
            let mut terms: Vec<(VarId, f64)> = (1..=n).map(|j| (p(j, i), 1.0)).collect();
            terms.push((t(k), -inst.capacity()));
            terms.push((t(i), inst.capacity()));
            terms.push((a[&(k, i)], -inst.capacity() * horizon));
            model.add_row(format!("cap{i}_{k}"), terms, Sense::Le, 0.0);
            // Times follow the order relation.
            model.add_row(
                format!("ord{i}_{k}"),
                [(t(i), 1.0), (t(k), -1.0), (a[&(k, i)], -horizon)],
                Sense::Le,
                0.0,
            );
        }
    }
    // Antisymmetry: exactly one of each direction.
    for i in 1..=m {
        for k in (i + 1)..=m {
            model.add_row(
                format!("pair{i}_{k}"),
                [(a[&(i, k)], 1.0), (a[&(k, i)], 1.0)],
                Sense::Eq,
                1.0,
            );
        }
    }
    // Immediate succession pins the position gap to one...
    let count_after = |i: usize| -> Vec<(VarId, f64)> {
        (1..=m)
            .filter(|&x| x != i)
            .map(|x| (a[&(i, x)], 1.0))
            .collect()
    };
    let big_m = m as f64;
    for i in 1..=m {
        for k in (1..=m).filter(|&k| k != i) {
            let mut terms = count_after(i);
            terms.extend(count_after(k).into_iter().map(|(v, c)| (v, -c)));
            let mut upper = terms.clone();
            upper.push((b[&(i, k)], big_m));
            model.add_row(format!("succub{i}_{k}"), upper, Sense::Le, 1.0 + big_m);
            let mut lower = terms;
            lower.push((b[&(i, k)], -big_m));
            model.add_row(format!("succlb{i}_{k}"), lower, Sense::Ge, 1.0 - big_m);
        }
    }
    // ...and a full order has exactly 2n - 1 immediate successions.  The
    // terms are sorted so the same instance always prints the same model.
    let mut successions: Vec<_> = b.keys().copied().collect();
    successions.sort_unstable();
    model.add_row(
        "succsum",
        successions.iter().map(|key| (b[key], 1.0)),
        Sense::Eq,
        (m - 1) as f64,
    );

    Milp {
        n,
        model,
        a,
        b,
        fixed,
    }
}

/// Guard for [`enumerate_exact`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    /// Largest `n` the enumeration will accept.
    pub max_jobs: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { max_jobs: 7 }
    }
}

/// An optimal order with its schedule and objective value.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub objective: f64,
    pub order: EventOrder,
    pub schedule: Schedule,
}

#[derive(Debug, Clone)]
pub enum ExactOutcome {
    Optimal(ExactSolution),
    /// No order consistent with the precedences admits a feasible schedule.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub outcome: ExactOutcome,
    /// Complete orders whose LP was solved.
    pub explored: u64,
}

struct Walk<'a> {
    inst: &'a Instance,
    preds: Vec<Vec<usize>>,
    prefix: Vec<EventId>,
    used: Vec<bool>,
    explored: u64,
    best: Option<(f64, EventOrder, Schedule)>,
}

impl Walk<'_> {
    fn run(&mut self) -> Result<(), EvalError> {
        let m = self.used.len();
        if self.prefix.len() == m {
            self.explored += 1;
            let order = EventOrder::from_seq_unchecked(self.prefix.clone());
            let lp = build_schedule_lp(self.inst, &order, RelaxationMode::Forbidden)?;
            if let Some(schedule) = solve_schedule_lp(&lp)? {
                let score = schedule.score();
                if self.best.as_ref().is_none_or(|(best, _, _)| score < *best) {
                    self.best = Some((score, order, schedule));
                }
            }
            return Ok(());
        }
        for candidate in 0..m {
            if self.used[candidate] || self.preds[candidate].iter().any(|&p| !self.used[p]) {
                continue;
            }
            let event = EventId::new(candidate + 1);
            if event.is_completion() {
                // Any already-started job whose release lies beyond this
                // job's deadline makes every completion of the subtree
                // infeasible: prune.
                let deadline = self.inst.job(event.job()).deadline;
                let doomed = self.prefix.iter().any(|e| {
                    e.is_start() && self.inst.job(e.job()).release > deadline
                });
                if doomed {
                    continue;
                }
            }
            self.used[candidate] = true;
            self.prefix.push(event);
            self.run()?;
            self.prefix.pop();
            self.used[candidate] = false;
        }
        Ok(())
    }
}

/// Finds an optimal order by exhaustive search over all linear extensions
/// of `prec`, scoring each with the strict evaluation LP.  Ties on the
/// objective keep the lexicographically smallest event sequence.
pub fn enumerate_exact(
    inst: &Instance,
    prec: &PrecedenceSet,
    options: EnumerateOptions,
) -> Result<ExactResult, ExactError> {
    if inst.n() > options.max_jobs {
        return Err(ExactError::TooManyJobs {
            n: inst.n(),
            max: options.max_jobs,
        });
    }
    if prec.n() != inst.n() {
        return Err(ExactError::SizeMismatch {
            expected: inst.n(),
            got: prec.n(),
        });
    }
    let m = inst.event_count();
    let preds = (0..m)
        .map(|i| {
            prec.predecessors(EventId::new(i + 1))
                .map(|e| e.zero_based())
                .collect()
        })
        .collect();
    let mut walk = Walk {
        inst,
        preds,
        prefix: Vec::with_capacity(m),
        used: vec![false; m],
        explored: 0,
        best: None,
    };
    walk.run()?;
    Ok(ExactResult {
        outcome: match walk.best {
            Some((objective, order, schedule)) => ExactOutcome::Optimal(ExactSolution {
                objective,
                order,
                schedule,
            }),
            None => ExactOutcome::Infeasible,
        },
        explored: walk.explored,
    })
}
