//! A fast necessary condition for instance feasibility via maximum flow.
//!
//! Split the horizon at every release and deadline.  Between consecutive
//! split points no window opens or closes, so energy can be treated as a
//! divisible commodity: job `j` can place at most `rate_max * length`
//! energy into a segment fully inside its window, and a segment can absorb
//! at most `capacity * length` in total.  Routing each job's energy through
//! its admissible segments is a bipartite flow problem; if the maximum flow
//! falls short of the total energy demand, no feasible schedule exists.
//!
//! The converse does not hold: the relaxation ignores minimum rates and the
//! requirement that a job is active on one contiguous span, so passing the
//! check does not certify feasibility.

use crate::model::{Instance, JobId};

/// Absolute slack allowed when comparing flow value against demand.
const FLOW_TOL: f64 = 1e-9;

/// The flow network of [`build_network`]: jobs on one side, horizon
/// segments on the other.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    /// Consecutive `[start, end)` segments between release/deadline values.
    segments: Vec<(f64, f64)>,
    /// Supply per job (its energy requirement), indexed by job.
    supply: Vec<f64>,
    /// Absorption limit per segment (`capacity * length`).
    segment_capacity: Vec<f64>,
    /// Per job: admissible segments and the job's cap there
    /// (`rate_max * length`).
    arcs: Vec<Vec<(usize, f64)>>,
}

/// Result of running the check.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub max_flow: f64,
    pub demand: f64,
    /// Whether the necessary condition holds (`max_flow >= demand` within
    /// tolerance).
    pub passes: bool,
    /// For failing instances: jobs whose energy could not be fully routed,
    /// with the unrouted amount.  Empty when the check passes.
    pub shortfalls: Vec<(JobId, f64)>,
}

impl FlowNetwork {
    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn supply(&self) -> &[f64] {
        &self.supply
    }

    pub fn segment_capacity(&self) -> &[f64] {
        &self.segment_capacity
    }

    /// Admissible `(segment, cap)` arcs of one job.
    pub fn arcs(&self, job: JobId) -> &[(usize, f64)] {
        &self.arcs[job.zero_based()]
    }
}

/// Builds the job/segment flow network of an instance.
pub fn build_network(inst: &Instance) -> FlowNetwork {
    let mut cuts: Vec<f64> = inst
        .jobs()
        .iter()
        .flat_map(|j| [j.release, j.deadline])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let segments: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    let segment_capacity = segments
        .iter()
        .map(|&(a, b)| inst.capacity() * (b - a))
        .collect();
    let supply = inst.jobs().iter().map(|j| j.energy).collect();
    let arcs = inst
        .jobs()
        .iter()
        .map(|job| {
            segments
                .iter()
                .enumerate()
                .filter(|&(_, &(a, b))| job.release <= a && b <= job.deadline)
                .map(|(idx, &(a, b))| (idx, job.rate_max * (b - a)))
                .collect()
        })
        .collect();
    FlowNetwork {
        segments,
        supply,
        segment_capacity,
        arcs,
    }
}

/// Maximum s-t flow with shortest augmenting paths (breadth-first search).
/// Returns the flow value and the amount routed out of each job.
fn max_flow(network: &FlowNetwork) -> (f64, Vec<f64>) {
    let jobs = network.supply.len();
    let segments = network.segments.len();
    // Nodes: 0 = source, 1..=jobs, jobs+1..=jobs+segments, last = sink.
    let nodes = jobs + segments + 2;
    let source = 0;
    let sink = nodes - 1;

    // Arc lists with residual capacities; arcs come in forward/reverse
    // pairs, so `arc ^ 1` is the partner of `arc`.
    let mut heads: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<f64> = Vec::new();
    fn add_arc(
        heads: &mut [Vec<usize>],
        to: &mut Vec<usize>,
        cap: &mut Vec<f64>,
        from: usize,
        target: usize,
        capacity: f64,
    ) {
        heads[from].push(to.len());
        to.push(target);
        cap.push(capacity);
        heads[target].push(to.len());
        to.push(from);
        cap.push(0.0);
    }
    let mut job_arc_ids = Vec::with_capacity(jobs);
    for job in 0..jobs {
        job_arc_ids.push(to.len());
        add_arc(&mut heads, &mut to, &mut cap, source, 1 + job, network.supply[job]);
    }
    for (job, arcs) in network.arcs.iter().enumerate() {
        for &(segment, capacity) in arcs {
            add_arc(&mut heads, &mut to, &mut cap, 1 + job, 1 + jobs + segment, capacity);
        }
    }
    for segment in 0..segments {
        add_arc(
            &mut heads,
            &mut to,
            &mut cap,
            1 + jobs + segment,
            sink,
            network.segment_capacity[segment],
        );
    }

    let mut total = 0.0;
    loop {
        // BFS for an augmenting path with positive residual capacity.
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        let mut queue = std::collections::VecDeque::from([source]);
        'bfs: while let Some(node) = queue.pop_front() {
            for &arc in &heads[node] {
                let next = to[arc];
                if via[next].is_none() && next != source && cap[arc] > 1e-12 {
                    via[next] = Some(arc);
                    if next == sink {
                        break 'bfs;
                    }
                    queue.push_back(next);
                }
            }
        }
        let Some(mut arc) = via[sink] else { break };
        let mut bottleneck = f64::INFINITY;
        loop {
            bottleneck = bottleneck.min(cap[arc]);
            let from = to[arc ^ 1];
            if from == source {
                break;
            }
            arc = via[from].expect("path reaches the source");
        }
        let mut arc = via[sink].expect("checked above");
        loop {
            cap[arc] -= bottleneck;
            cap[arc ^ 1] += bottleneck;
            let from = to[arc ^ 1];
            if from == source {
                break;
            }
            arc = via[from].expect("path reaches the source");
        }
        total += bottleneck;
    }
    let routed = job_arc_ids
        .iter()
        .map(|&arc| cap[arc ^ 1]) // flow pushed = reverse residual
        .collect();
    (total, routed)
}

/// Runs the necessary-condition check on an instance.
pub fn check_feasibility(inst: &Instance) -> FeasibilityReport {
    let network = build_network(inst);
    let (value, routed) = max_flow(&network);
    let demand = inst.total_energy();
    let passes = value >= demand - FLOW_TOL;
    let shortfalls = if passes {
        Vec::new()
    } else {
        inst.job_ids()
            .filter_map(|id| {
                let missing = network.supply[id.zero_based()] - routed[id.zero_based()];
                (missing > FLOW_TOL).then_some((id, missing))
            })
            .collect()
    };
    FeasibilityReport {
        max_flow: value,
        demand,
        passes,
        shortfalls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;

    fn job(
        energy: f64,
        release: f64,
        deadline: f64,
        rate_max: f64,
    ) -> Job {
        Job {
            energy,
            release,
            deadline,
            rate_min: 0.0,
            rate_max,
            weight: 1.0,
            offset: 0.0,
        }
    }

    fn three_job_instance() -> Instance {
        Instance::new(
            50.0,
            vec![
                job(70.0, 0.0, 3.0, 30.0),
                job(20.0, 1.5, 3.0, 40.0),
                job(45.0, 2.5, 4.0, 50.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn builds_expected_segments_and_caps() {
        let network = build_network(&three_job_instance());
        assert_eq!(
            network.segments(),
            &[(0.0, 1.5), (1.5, 2.5), (2.5, 3.0), (3.0, 4.0)]
        );
        // Job 1 (rate cap 30) may use the first three segments.
        assert_eq!(
            network.arcs(JobId::new(1)),
            &[(0, 45.0), (1, 30.0), (2, 15.0)]
        );
        // Job 3 only fits segments inside [2.5, 4].
        assert_eq!(network.arcs(JobId::new(3)), &[(2, 25.0), (3, 50.0)]);
        assert_eq!(network.segment_capacity()[0], 75.0);
    }

    #[test]
    fn tight_but_routable_instance_passes() {
        let report = check_feasibility(&three_job_instance());
        assert!((report.demand - 135.0).abs() < 1e-12);
        assert!((report.max_flow - 135.0).abs() < 1e-9);
        assert!(report.passes);
        assert!(report.shortfalls.is_empty());
    }

    #[test]
    fn overloaded_instance_fails_with_shortfalls() {
        // Two jobs of 10 in [0,1] with capacity 12: at most 12 can be
        // routed, 8 missing.
        let inst = Instance::new(
            12.0,
            vec![job(10.0, 0.0, 1.0, 10.0), job(10.0, 0.0, 1.0, 10.0)],
        )
        .unwrap();
        let report = check_feasibility(&inst);
        assert!(!report.passes);
        assert!((report.max_flow - 12.0).abs() < 1e-9);
        let missing: f64 = report.shortfalls.iter().map(|&(_, m)| m).sum();
        assert!((missing - 8.0).abs() < 1e-9);
    }

    #[test]
    fn flow_reroutes_around_a_contended_segment() {
        // Job 2 needs the whole middle segment at full rate; job 1 must be
        // pushed out to the side segments.  A greedy first path may fill
        // the middle with job 1, so passing requires augmentation through
        // reverse arcs.
        let inst = Instance::new(
            15.0,
            vec![job(20.0, 0.0, 4.0, 10.0), job(20.0, 1.0, 3.0, 10.0)],
        )
        .unwrap();
        let report = check_feasibility(&inst);
        assert!(report.passes, "max flow {} of 40", report.max_flow);
        assert!((report.max_flow - 40.0).abs() < 1e-9);
    }

    #[test]
    fn passing_tracks_demand_within_tolerance() {
        // Exactly tight: one job, capacity = rate = energy / length.
        let inst = Instance::new(10.0, vec![job(10.0, 0.0, 1.0, 10.0)]).unwrap();
        let report = check_feasibility(&inst);
        assert!(report.passes);
        assert!((report.max_flow - 10.0).abs() < 1e-12);
    }
}
