//! Parallel fan-out of bootstrap replicates and study cells.
//!
//! Every work item draws from its own counter-based stream, so results do not
//! depend on the number of threads or the scheduling order.

use depcens_core::estimation::{self, BootstrapSummary};
use depcens_core::simulation::{self, ReplicateOutcome};
use depcens_core::{CellSummary, Dataset, FitOptions, FitResult, StudyCell};
use rayon::prelude::*;

/// Environment variable giving the default worker count.
pub const THREADS_ENV: &str = "DEPCENS_THREADS";

/// Configure the global pool from `--threads`, else `DEPCENS_THREADS`, else rayon's default.
pub fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = flag.or(from_env).filter(|&n| n > 0) {
        // A second initialization (e.g. in tests) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn bootstrap(
    data: &Dataset,
    fitted: &FitResult,
    opts: &FitOptions,
    b: usize,
    seed: u64,
) -> depcens_core::Result<BootstrapSummary> {
    if b < 2 {
        return Err(depcens_core::Error::Domain(format!("bootstrap needs at least 2 resamples, got {b}")));
    }
    let layout = fitted.estimate.layout;
    let ropts = estimation::bootstrap_fit_options(opts, &fitted.estimate.values);
    let outcomes: Vec<Option<Vec<f64>>> = (0..b as u64)
        .into_par_iter()
        .map(|i| estimation::bootstrap_replicate(data, &layout, &ropts, seed, i))
        .collect();
    estimation::summarize_bootstrap(&layout, outcomes)
}

/// Run all replicates of all cells, parallel over (cell, replicate) pairs.
pub fn run_cells(cells: &[StudyCell], opts: &FitOptions) -> Vec<depcens_core::Result<CellSummary>> {
    let jobs: Vec<(usize, usize)> =
        cells.iter().enumerate().flat_map(|(c, cell)| (0..cell.reps).map(move |r| (c, r))).collect();
    let outcomes: Vec<ReplicateOutcome> =
        jobs.par_iter().map(|&(c, r)| simulation::run_replicate(&cells[c], r, opts)).collect();
    let mut start = 0;
    cells
        .iter()
        .map(|cell| {
            let slice = &outcomes[start..start + cell.reps];
            start += cell.reps;
            simulation::summarize_cell(cell, opts.transform, slice)
        })
        .collect()
}
