//! Run configuration, command pipelines and report emission for the CLI.

pub mod config;
pub mod pipeline;
pub mod plot;

pub use config::{Command, GeneratorSpec, RunConfig};
pub use pipeline::{
    connected_lift, gap_energies, run, summary_csv, Failure, Report, RunError, RunOutcome, REPORT_VERSION,
};
pub use plot::{emit_plot, PlotKind};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "COVERTREE_WORKERS";

/// Sizes the global thread pool: `COVERTREE_WORKERS`, then `requested`, then
/// the number of cores. Dense kernels run single-threaded inside each task.
pub fn init_workers(requested: Option<usize>) -> crate::Result<usize> {
    let from_env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            crate::Error::InvalidParameter(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))
        })?),
        Err(_) => None,
    };
    let n = from_env
        .or(requested)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    faer::set_global_parallelism(faer::Par::Seq);
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(n)
}
