//! Per-run accounting.

use std::time::Duration;

/// What one pipeline execution cost and produced.
///
/// Everything here except `wall_time` is a deterministic function of the
/// parameters and seed; [`TrialReport::same_outcome`] compares exactly that
/// deterministic part.
#[derive(Clone, Debug, Default)]
pub struct TrialReport {
    /// Queries the (root) oracle answered during this run.
    pub oracle_queries: u64,
    /// Objects drawn from the coset-sampling machine.
    pub fresh_objects: u64,
    pub combines_attempted_per_stage: Vec<u64>,
    pub combines_succeeded_per_stage: Vec<u64>,
    /// Most objects simultaneously alive (piles + buffers + in flight).
    pub peak_live_objects: u64,
    /// Final-stage outputs labelled 0, discarded classically.
    pub final_label_zero_discards: u64,
    /// Final-stage outputs with some other non-accepted label; only padded
    /// (degenerate) schedules can produce these.
    pub final_label_other_discards: u64,
    /// Every final-stage label observed, in production order.
    pub final_labels: Vec<u64>,
    /// Objects still alive when the run stopped, including a returned one.
    pub live_at_end: u64,
    /// Whether an accepted (2^{n-1}-labelled) object was produced.
    pub succeeded: bool,
    pub wall_time: Duration,
}

impl TrialReport {
    pub fn total_attempted(&self) -> u64 {
        self.combines_attempted_per_stage.iter().sum()
    }

    pub fn total_succeeded(&self) -> u64 {
        self.combines_succeeded_per_stage.iter().sum()
    }

    /// Field-by-field equality ignoring `wall_time`: the reproducibility
    /// contract for equal seeds and parameters.
    pub fn same_outcome(&self, other: &TrialReport) -> bool {
        self.oracle_queries == other.oracle_queries
            && self.fresh_objects == other.fresh_objects
            && self.combines_attempted_per_stage == other.combines_attempted_per_stage
            && self.combines_succeeded_per_stage == other.combines_succeeded_per_stage
            && self.peak_live_objects == other.peak_live_objects
            && self.final_label_zero_discards == other.final_label_zero_discards
            && self.final_label_other_discards == other.final_label_other_discards
            && self.final_labels == other.final_labels
            && self.live_at_end == other.live_at_end
            && self.succeeded == other.succeeded
    }
}
