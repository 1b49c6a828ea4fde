//! Neighborhood operators over event orders.
//!
//! Every operator takes an order together with a precedence set and returns
//! a modified order, or `None` when the requested change would put some
//! event before one of its required predecessors.  Orders that respect the
//! precedences on the way in therefore still respect them on the way out.

use rand::Rng;

use crate::model::{EventOrder, JobId, PrecedenceSet};

/// Swaps the events at `position` and `position + 1`.
pub fn swap_adjacent(
    order: &EventOrder,
    prec: &PrecedenceSet,
    position: usize,
) -> Option<EventOrder> {
    assert!(position + 1 < order.len(), "no event after position {position}");
    let first = order.at(position);
    let second = order.at(position + 1);
    if prec.contains(first, second) {
        return None;
    }
    let mut seq = order.events().to_vec();
    seq.swap(position, position + 1);
    Some(EventOrder::from_seq_unchecked(seq))
}

/// Moves the event at `position` to a random new position, biased towards
/// nearby ones.  The event may travel anywhere strictly between the closest
/// events it is related to on either side; if there is no room, returns
/// `None`.
pub fn move_single(
    order: &EventOrder,
    prec: &PrecedenceSet,
    position: usize,
    rng: &mut impl Rng,
) -> Option<EventOrder> {
    assert!(position < order.len(), "position {position} out of range");
    let event = order.at(position);
    let len = order.len();
    let mut lowest = position;
    while lowest > 0 && !prec.related(order.at(lowest - 1), event) {
        lowest -= 1;
    }
    let mut highest = position;
    while highest + 1 < len && !prec.related(order.at(highest + 1), event) {
        highest += 1;
    }
    if lowest == highest {
        return None;
    }
    // Near targets are more likely than far ones.
    let targets: Vec<usize> = (lowest..=highest).filter(|&t| t != position).collect();
    let weights: Vec<f64> = targets
        .iter()
        .map(|&t| 1.0 / position.abs_diff(t) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut chosen = *targets.last().unwrap();
    for (&t, &w) in targets.iter().zip(&weights) {
        if draw < w {
            chosen = t;
            break;
        }
        draw -= w;
    }
    let mut seq = order.events().to_vec();
    seq.remove(position);
    seq.insert(chosen, event);
    Some(EventOrder::from_seq_unchecked(seq))
}

/// Counts how many consecutive events next to `from` (skipping the one at
/// `partner`) the given event could cross without passing something it is
/// related to.  `step` is `+1` to look right, `-1` to look left.
fn crossable(
    order: &EventOrder,
    prec: &PrecedenceSet,
    event: crate::model::EventId,
    from: usize,
    partner: usize,
    step: isize,
) -> usize {
    let len = order.len() as isize;
    let mut gap = 0;
    let mut at = from as isize + step;
    while (0..len).contains(&at) {
        if at != partner as isize {
            if prec.related(order.at(at as usize), event) {
                break;
            }
            gap += 1;
        }
        at += step;
    }
    gap
}

/// Shifts both events of `job` by the same random offset, keeping their
/// distance.  The offset range is limited by the nearest related events
/// around either endpoint; returns `None` when the pair cannot move at all.
pub fn move_pair(
    order: &EventOrder,
    prec: &PrecedenceSet,
    job: JobId,
    rng: &mut impl Rng,
) -> Option<EventOrder> {
    let start = job.start_event();
    let completion = job.completion_event();
    let ps = order.position(start);
    let pc = order.position(completion);
    let left = crossable(order, prec, start, ps, pc, -1)
        .min(crossable(order, prec, completion, pc, ps, -1));
    let right = crossable(order, prec, start, ps, pc, 1)
        .min(crossable(order, prec, completion, pc, ps, 1));
    if left == 0 && right == 0 {
        return None;
    }
    let offsets: Vec<isize> = (-(left as isize)..=right as isize)
        .filter(|&d| d != 0)
        .collect();
    let delta = offsets[rng.gen_range(0..offsets.len())];
    let mut seq = order.events().to_vec();
    seq.remove(pc);
    seq.remove(ps);
    seq.insert((ps as isize + delta) as usize, start);
    seq.insert((pc as isize + delta) as usize, completion);
    Some(EventOrder::from_seq_unchecked(seq))
}
