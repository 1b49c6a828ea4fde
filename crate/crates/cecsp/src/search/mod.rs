//! Local search over event orders.
//!
//! The search never touches schedules directly: it walks the space of event
//! orders, letting the evaluation LP price each one, with penalties standing
//! in for hard feasibility so the walk can pass through mildly infeasible
//! territory.  Moves come from three operators — an adjacent swap, a single
//! event relocation and a paired relocation of one job's two events — and
//! are accepted by the usual annealing rule.  When every operator is
//! exhausted (no acceptable neighbor exists at the current temperature) the
//! search either stops or, under the restart policy, shakes the order with
//! random legal swaps and starts the cooling over.

pub mod greedy;
pub mod ops;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{score_order, EvalError, OrderScore, PenaltyWeights};
use crate::model::{EventOrder, Instance, JobId, PrecedenceSet, Schedule};

pub use greedy::greedy_initial_order;
pub use ops::{move_pair, move_single, swap_adjacent};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search configuration: {0}")]
    InvalidConfig(String),
    #[error("order/precedence set covers {got} jobs but the instance has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Relative odds of each neighborhood operator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorProbabilities {
    pub swap: f64,
    pub move_single: f64,
    pub move_pair: f64,
}

impl Default for OperatorProbabilities {
    fn default() -> Self {
        OperatorProbabilities {
            swap: 0.75,
            move_single: 0.15,
            move_pair: 0.10,
        }
    }
}

/// What to do when the neighborhood is exhausted before the iteration
/// budget is spent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestartPolicy {
    pub enabled: bool,
    /// Restarts stop once this much wall time has passed.
    pub min_wall_seconds: f64,
    /// Random legal adjacent swaps applied to shake the current order.
    pub random_swaps: u32,
}

impl Default for RestartPolicy {
    fn default() -> Self {
        RestartPolicy {
            enabled: false,
            min_wall_seconds: 1800.0,
            random_swaps: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SAConfig {
    /// Starting temperature.
    pub t_init: f64,
    /// Geometric cooling factor.
    pub alpha: f64,
    /// Accepted moves between two cooling steps.
    pub alpha_period: u64,
    /// Accepted moves before the search stops.
    pub max_iterations: u64,
    pub penalties: PenaltyWeights,
    pub operators: OperatorProbabilities,
    pub restart: RestartPolicy,
    pub seed: u64,
}

impl SAConfig {
    /// Sensible defaults scaled to an instance size.
    pub fn defaults_for(n: usize) -> Self {
        SAConfig {
            t_init: n as f64,
            alpha: 0.95,
            alpha_period: (2 * n - 1) as u64 * 4,
            max_iterations: 10_000,
            penalties: PenaltyWeights::default(),
            operators: OperatorProbabilities::default(),
            restart: RestartPolicy {
                enabled: n >= 50,
                ..RestartPolicy::default()
            },
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.into()));
        if !self.t_init.is_finite() || self.t_init < 0.0 {
            return bad("t_init must be a finite number >= 0");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be a finite number > 0");
        }
        if self.alpha_period == 0 {
            return bad("alpha_period must be >= 1");
        }
        let ops = [
            self.operators.swap,
            self.operators.move_single,
            self.operators.move_pair,
        ];
        if ops.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("operator probabilities must be finite numbers >= 0");
        }
        if ops.iter().sum::<f64>() <= 0.0 {
            return bad("at least one operator probability must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_order: EventOrder,
    /// Schedule of the best order; `None` only when even the best order has
    /// a release/deadline conflict.
    pub best_schedule: Option<Schedule>,
    pub best_score: f64,
    pub initial_score: f64,
    /// Accepted moves.
    pub iterations: u64,
    /// Orders priced by the evaluation LP.
    pub evaluations: u64,
    pub restarts: u32,
    pub wall: Duration,
}

impl SearchResult {
    /// Whether the best schedule satisfies all constraints: its penalised
    /// relaxations are all below `tolerance`.
    pub fn feasible(&self, tolerance: f64) -> bool {
        self.best_schedule
            .as_ref()
            .is_some_and(|s| s.max_relaxation() <= tolerance)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Operator {
    Swap,
    MoveSingle,
    MovePair,
}

const OPERATOR_CYCLE: [Operator; 3] = [Operator::Swap, Operator::MoveSingle, Operator::MovePair];

struct Annealer<'a> {
    inst: &'a Instance,
    prec: &'a PrecedenceSet,
    penalties: PenaltyWeights,
    operators: OperatorProbabilities,
    rng: ChaCha8Rng,
    evaluations: u64,
}

impl Annealer<'_> {
    fn draw_operator(&mut self) -> Operator {
        let probs = [
            self.operators.swap,
            self.operators.move_single,
            self.operators.move_pair,
        ];
        let mut draw = self.rng.gen::<f64>() * probs.iter().sum::<f64>();
        for (op, p) in OPERATOR_CYCLE.into_iter().zip(probs) {
            if draw < p {
                return op;
            }
            draw -= p;
        }
        Operator::MovePair
    }

    fn price(&mut self, order: &EventOrder) -> Result<OrderScore, EvalError> {
        self.evaluations += 1;
        score_order(self.inst, order, self.penalties)
    }

    /// Walks one operator's whole neighborhood in random order and returns
    /// the first candidate that passes the acceptance rule.
    fn try_operator(
        &mut self,
        op: Operator,
        current: &EventOrder,
        current_score: f64,
        temperature: f64,
    ) -> Result<Option<(EventOrder, OrderScore)>, EvalError> {
        let len = current.len();
        let entries: Vec<usize> = match op {
            Operator::Swap => (0..len - 1).collect(),
            Operator::MoveSingle => (0..len).collect(),
            Operator::MovePair => (1..=current.n()).collect(),
        };
        let mut shuffled = entries;
        shuffled.shuffle(&mut self.rng);
        for entry in shuffled {
            let candidate = match op {
                Operator::Swap => swap_adjacent(current, self.prec, entry),
                Operator::MoveSingle => move_single(current, self.prec, entry, &mut self.rng),
                Operator::MovePair => {
                    move_pair(current, self.prec, JobId::new(entry), &mut self.rng)
                }
            };
            let Some(next) = candidate else { continue };
            let scored = self.price(&next)?;
            let score = scored.score();
            let accepted = if score <= current_score {
                true
            } else if score.is_finite() {
                let delta = score - current_score;
                self.rng.gen::<f64>() < (-delta / temperature).exp()
            } else {
                false
            };
            if accepted {
                return Ok(Some((next, scored)));
            }
        }
        Ok(None)
    }

    /// Finds the next accepted move, falling over to the other operators
    /// when the drawn one is exhausted.  `None` means no operator has an
    /// acceptable candidate left at this temperature.
    fn next_move(
        &mut self,
        current: &EventOrder,
        current_score: f64,
        temperature: f64,
    ) -> Result<Option<(EventOrder, OrderScore)>, EvalError> {
        let first = self.draw_operator();
        let rest = OPERATOR_CYCLE.into_iter().filter(|&op| op != first);
        for op in std::iter::once(first).chain(rest) {
            if let Some(hit) = self.try_operator(op, current, current_score, temperature)? {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    /// Applies up to `swaps` random legal adjacent swaps; returns the new
    /// order and how many swaps landed.
    fn shake(&mut self, order: EventOrder, swaps: u32) -> (EventOrder, u32) {
        let mut order = order;
        let mut landed = 0;
        let positions = order.len() - 1;
        if positions == 0 {
            return (order, 0);
        }
        for _ in 0..swaps {
            for _ in 0..20 * order.len() {
                let pos = self.rng.gen_range(0..positions);
                if let Some(next) = swap_adjacent(&order, self.prec, pos) {
                    order = next;
                    landed += 1;
                    break;
                }
            }
        }
        (order, landed)
    }
}

/// Runs simulated annealing from `initial`, which is scored as-is and kept
/// as the incumbent until something better is accepted.  The result is
/// deterministic for a given seed as long as neither the restart policy nor
/// `time_limit` kicks in.
pub fn simulated_annealing(
    inst: &Instance,
    prec: &PrecedenceSet,
    initial: &EventOrder,
    config: &SAConfig,
    time_limit: Option<Duration>,
) -> Result<SearchResult, SearchError> {
    config.validate()?;
    if initial.n() != inst.n() {
        return Err(SearchError::SizeMismatch {
            expected: inst.n(),
            got: initial.n(),
        });
    }
    if prec.n() != inst.n() {
        return Err(SearchError::SizeMismatch {
            expected: inst.n(),
            got: prec.n(),
        });
    }

    let clock = Instant::now();
    let mut annealer = Annealer {
        inst,
        prec,
        penalties: config.penalties,
        operators: config.operators,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        evaluations: 0,
    };

    let mut current = initial.clone();
    let scored = annealer.price(&current)?;
    let mut current_score = scored.score();
    let initial_score = current_score;
    let mut best_order = current.clone();
    let mut best_score = current_score;
    let mut best_schedule = scored.into_schedule();

    let mut temperature = config.t_init;
    let mut iterations = 0u64;
    let mut restarts = 0u32;

    while iterations < config.max_iterations {
        if let Some(limit) = time_limit {
            if clock.elapsed() >= limit {
                break;
            }
        }
        match annealer.next_move(&current, current_score, temperature)? {
            Some((next, scored)) => {
                current = next;
                current_score = scored.score();
                iterations += 1;
                if current_score < best_score {
                    best_score = current_score;
                    best_order = current.clone();
                    best_schedule = scored.into_schedule();
                }
                if iterations.is_multiple_of(config.alpha_period) {
                    temperature *= config.alpha;
                }
            }
            None => {
                let policy = config.restart;
                if !policy.enabled
                    || clock.elapsed().as_secs_f64() >= policy.min_wall_seconds
                {
                    break;
                }
                let (shaken, landed) = annealer.shake(current, policy.random_swaps);
                current = shaken;
                if landed == 0 {
                    // Nothing can move: restarting again would loop forever.
                    break;
                }
                restarts += 1;
                temperature = config.t_init;
                let scored = annealer.price(&current)?;
                current_score = scored.score();
                if current_score < best_score {
                    best_score = current_score;
                    best_order = current.clone();
                    best_schedule = scored.into_schedule();
                }
            }
        }
    }

    Ok(SearchResult {
        best_order,
        best_schedule,
        best_score,
        initial_score,
        iterations,
        evaluations: annealer.evaluations,
        restarts,
        wall: clock.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{implicit_precedences, validate_schedule, Job};

    fn job(
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

    fn staggered_three() -> Instance {
        Instance::new(
            50.0,
            vec![
                job(70.0, 0.0, 3.0, 10.0, 30.0, 1.0),
                job(20.0, 1.5, 3.0, 10.0, 40.0, 3.5),
                job(45.0, 2.5, 4.0, 10.0, 50.0, 5.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn a_zero_iteration_budget_returns_the_initial_order() {
        let inst = staggered_three();
        let prec = implicit_precedences(&inst);
        let initial = greedy_initial_order(&inst);
        let config = SAConfig {
            max_iterations: 0,
            ..SAConfig::defaults_for(inst.n())
        };
        let result = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        assert_eq!(result.best_order, initial);
        assert_eq!(result.iterations, 0);
        assert_eq!(result.evaluations, 1);
        assert_eq!(result.best_score, result.initial_score);
    }

    #[test]
    fn search_improves_on_the_starting_order() {
        let inst = staggered_three();
        let prec = implicit_precedences(&inst);
        let initial = greedy_initial_order(&inst);
        let config = SAConfig {
            max_iterations: 400,
            ..SAConfig::defaults_for(inst.n())
        };
        let result = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        assert!(result.best_score <= result.initial_score);
        assert!(result.feasible(1e-6));
        let schedule = result.best_schedule.as_ref().unwrap();
        let report = validate_schedule(&inst, &result.best_order, schedule, 1e-6).unwrap();
        assert!(report.is_feasible(), "{report}");
    }

    #[test]
    fn equal_seeds_walk_identical_paths() {
        let inst = staggered_three();
        let prec = implicit_precedences(&inst);
        let initial = greedy_initial_order(&inst);
        let config = SAConfig {
            max_iterations: 200,
            seed: 42,
            ..SAConfig::defaults_for(inst.n())
        };
        let a = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        let b = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        assert_eq!(a.best_order, b.best_order);
        assert_eq!(a.best_score, b.best_score);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn a_frozen_neighborhood_ends_the_search_despite_restarts() {
        // One job has no neighbors at all; the restart policy must notice
        // that shaking achieves nothing instead of spinning until the wall
        // clock runs out.
        let inst = Instance::new(10.0, vec![job(5.0, 0.0, 2.0, 0.0, 10.0, 1.0)]).unwrap();
        let prec = implicit_precedences(&inst);
        let initial = EventOrder::identity(1);
        let config = SAConfig {
            restart: RestartPolicy {
                enabled: true,
                min_wall_seconds: 3600.0,
                random_swaps: 10,
            },
            ..SAConfig::defaults_for(1)
        };
        let clock = Instant::now();
        let result = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        assert!(clock.elapsed() < Duration::from_secs(30));
        assert_eq!(result.iterations, 0);
        assert_eq!(result.restarts, 0);
    }

    #[test]
    fn bad_configurations_are_rejected() {
        let inst = staggered_three();
        let prec = implicit_precedences(&inst);
        let initial = greedy_initial_order(&inst);
        for config in [
            SAConfig {
                alpha_period: 0,
                ..SAConfig::defaults_for(3)
            },
            SAConfig {
                alpha: 0.0,
                ..SAConfig::defaults_for(3)
            },
            SAConfig {
                operators: OperatorProbabilities {
                    swap: 0.0,
                    move_single: 0.0,
                    move_pair: 0.0,
                },
                ..SAConfig::defaults_for(3)
            },
        ] {
            let result = simulated_annealing(&inst, &prec, &initial, &config, None);
            assert!(matches!(result, Err(SearchError::InvalidConfig(_))));
        }
    }

    #[test]
    fn search_recovers_from_a_conflicted_starting_order() {
        // Job 2 releases after job 1's deadline, so starting job 2 first
        // conflicts; the walk must find its way back to finite scores.
        let inst = Instance::new(
            10.0,
            vec![
                job(5.0, 0.0, 1.0, 0.0, 10.0, 1.0),
                job(5.0, 2.0, 3.0, 0.0, 10.0, 2.0),
            ],
        )
        .unwrap();
        let prec = PrecedenceSet::job_pairs(2);
        let initial = EventOrder::new(
            [3, 1, 4, 2].iter().map(|&i| crate::model::EventId::new(i)).collect(),
        )
        .unwrap();
        let config = SAConfig {
            max_iterations: 300,
            ..SAConfig::defaults_for(2)
        };
        let result = simulated_annealing(&inst, &prec, &initial, &config, None).unwrap();
        assert_eq!(result.initial_score, f64::INFINITY);
        assert!(result.best_score.is_finite());
        assert!(result.feasible(1e-6));
    }
}
