//! JSON run record written by `solve --record`.

use serde::Serialize;

use cecsp::search::SAConfig;

/// Everything needed to rerun and audit a single `solve` invocation.
#[derive(Serialize)]
pub struct RunRecord<'a> {
    pub instance: String,
    pub n: usize,
    pub capacity: f64,
    pub config: &'a SAConfig,
    pub initial_score: f64,
    pub best_score: f64,
    pub feasible: bool,
    pub iterations: u64,
    pub evaluations: u64,
    pub restarts: u32,
    pub wall_seconds: f64,
    /// Where the schedule went when `--out` was also given.
    pub schedule_path: Option<String>,
}
