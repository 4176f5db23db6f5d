//! Simulation checks of the analytic coverage results, and a full
//! estimation pipeline (pairs bootstrap, interval construction) on a
//! built-in regression example.
//!
//! All randomness is derived from a single [`Seed`](crate::normal::Seed)
//! through per-chunk or per-replication sub-streams, so results are
//! bit-identical for a given seed whatever the number of worker threads.

mod bootstrap;
mod demo;
mod joint;
mod study;

pub use bootstrap::{pairs_bootstrap, BootstrapEstimates, MAX_RETRIES};
pub use demo::{
    demo_dgp, ols_slope, ridge_penalty, ridge_slope, Observation, DEMO_INTERCEPT, DEMO_SLOPE,
};
pub use joint::{simulate_joint_normal, KindSummary, SimulationConfig, SimulationResult};
pub use study::{run_study, KindStats, StudyCell, StudyConfig, StudyRow, STUDY_KINDS};

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub(crate) fn mc_stderr(coverage: f64, n: usize) -> f64 {
    (coverage * (1.0 - coverage) / n as f64).sqrt()
}
