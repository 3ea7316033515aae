//! Numerical campaigns built on the integrators: ensemble time series,
//! measurement switch-off, separate-record measurement, radius and step-size
//! sweeps, and per-step benchmarks.
//!
//! Trajectories are independent work items. Each draws its noise from the
//! stream keyed by (seed, trajectory index), and every reduction runs over
//! results ordered by that index, so outputs do not depend on the worker
//! count.

mod accuracy;
mod benchmark;
mod config;
mod ensemble;
mod radius;
mod stats;
mod table;

pub use accuracy::{run_accuracy_sweep, AccuracyCell, AccuracySweep, AccuracyTrajectory, REPAIR_FLAG_EIGENVALUE};
pub use benchmark::{run_benchmark, BenchRow, Benchmark, WARMUP_STEPS};
pub use config::{
    Experiment, ScenarioConfig, Sweep, DEFAULT_RADII_NM, DEFAULT_STEP_GRID, N_OSC_WITHOUT_BATH,
};
pub use ensemble::{
    run_ensemble, run_measurement_model_ii, run_switchoff, run_timeseries, stats_table, SwitchoffDiagnostics,
    SwitchoffResult, NEGATIVITY_VANISHED,
};
pub use radius::{run_radius_sweep, RadiusCell, RadiusSweep};
pub use stats::{linear_fit, mean_std, EnsembleStats, LinearFit, SeriesStats};
pub use table::{content_hash, sha256_hex, Cell, Sidecar, Table};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f(0..n)` on up to `workers` threads (0: all available) and
/// returns the results in index order. The first failure by index wins.
pub fn run_indexed<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config {
            key: "workers".into(),
            reason: e.to_string(),
        })?;
    let results: Vec<Result<T>> = pool.install(|| (0..n).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_results_keep_order() {
        let out = run_indexed(3, 50, |i| Ok(i * i)).unwrap();
        assert_eq!(out, (0..50).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn first_error_by_index() {
        let err = run_indexed(4, 20, |i| {
            if i % 7 == 6 {
                Err(Error::Grid(format!("{i}")))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Grid(s) if s == "6"));
    }
}
