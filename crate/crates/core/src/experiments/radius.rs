use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrators::{run_trajectory_with, sample_wiener_stream, ObservableSet};
use crate::model::{build_model_with, initial_state};
use crate::observables::{negativity_of, Bipartition};

use super::config::{ScenarioConfig, Sweep};
use super::ensemble::run_options;
use super::run_indexed;
use super::stats::mean_std;
use super::table::{Cell, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusCell {
    pub radius_nm: f64,
    pub energy_ratio: f64,
    pub radius_over_xzpf: f64,
    /// Mean over trajectories of the steady-window average negativity.
    pub mean_negativity: f64,
    /// Population σ of the per-trajectory window averages.
    pub std: f64,
    pub stderr: f64,
    /// Population σ over every (trajectory, sample) pair in the window.
    pub sample_std: f64,
    pub n_trajectories: usize,
    pub truncation_warnings: usize,
    pub max_edge_population: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSweep {
    pub cells: Vec<RadiusCell>,
    pub steady_window: (f64, f64),
}

impl RadiusSweep {
    pub fn argmax(&self) -> Option<&RadiusCell> {
        self.cells
            .iter()
            .max_by(|a, b| a.mean_negativity.total_cmp(&b.mean_negativity))
    }

    /// Cell whose energy ratio is closest to 1.
    pub fn nearest_unit_ratio(&self) -> Option<&RadiusCell> {
        self.cells
            .iter()
            .min_by(|a, b| (a.energy_ratio - 1.0).abs().total_cmp(&(b.energy_ratio - 1.0).abs()))
    }

    pub fn cell(&self, radius_nm: f64) -> Option<&RadiusCell> {
        self.cells.iter().find(|c| (c.radius_nm - radius_nm).abs() < 1e-12)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "radius_sweep",
            &[
                "radius_nm",
                "energy_ratio",
                "radius_over_xzpf",
                "negativity_mean",
                "negativity_std",
                "negativity_stderr",
                "negativity_sample_std",
                "n_trajectories",
                "truncation_warnings",
                "max_edge_population",
            ],
        );
        for c in &self.cells {
            t.push(vec![
                Cell::Num(c.radius_nm),
                Cell::Num(c.energy_ratio),
                Cell::Num(c.radius_over_xzpf),
                Cell::Num(c.mean_negativity),
                Cell::Num(c.std),
                Cell::Num(c.stderr),
                Cell::Num(c.sample_std),
                c.n_trajectories.into(),
                c.truncation_warnings.into(),
                Cell::Num(c.max_edge_population),
            ]);
        }
        t
    }
}

struct TrajectoryWindow {
    values: Vec<f64>,
    truncation_warning: bool,
    max_edge: f64,
}

/// Steady-state negativity against sphere radius. Every radius reuses the
/// same noise streams (common random numbers across cells).
pub fn run_radius_sweep(cfg: &ScenarioConfig) -> Result<RadiusSweep> {
    cfg.validate()?;
    let radii = match &cfg.sweep {
        Some(Sweep::RadiusNm(r)) => r.clone(),
        _ => unreachable!("validated"),
    };
    let dims = cfg.resolved_dims();
    let models = radii
        .iter()
        .map(|&r| {
            let mut p = cfg.physical.clone();
            p.radius = r * 1e-9;
            Ok((build_model_with(&p, dims, cfg.measurement_model)?, initial_state(&p, dims)?.into_matrix()))
        })
        .collect::<Result<Vec<_>>>()?;
    let schedule = cfg.schedule()?;
    let mut options = run_options(cfg);
    options.observables = ObservableSet::none();
    let split = Bipartition::from(dims);
    let window_start = cfg.steady_start_cycle * 2.0 * PI;
    let n_traj = cfg.n_trajectories;

    let windows = run_indexed(cfg.workers, radii.len() * n_traj, |job| {
        let (cell, t) = (job / n_traj, job % n_traj);
        let (model, rho0) = &models[cell];
        let grid = sample_wiener_stream(cfg.n_steps(), cfg.dt(), model.noise_channels(), cfg.seed, t as u64)?;
        let mut values = Vec::new();
        let rec = run_trajectory_with(model, rho0, cfg.scheme, &grid, &schedule, &options, |s| {
            if s.time >= window_start - 1e-9 {
                values.push(negativity_of(s.state, split)?);
            }
            Ok(())
        })?;
        Ok(TrajectoryWindow {
            values,
            truncation_warning: rec.truncation_warning,
            max_edge: rec.max_edge_population,
        })
    })?;

    let cells = radii
        .iter()
        .zip(&models)
        .zip(windows.chunks(n_traj))
        .map(|((&r, (model, _)), w)| {
            let averages: Vec<f64> = w
                .iter()
                .map(|tw| tw.values.iter().sum::<f64>() / tw.values.len() as f64)
                .collect();
            let (mean, std, n) = mean_std(averages.iter().copied());
            let (_, sample_std, _) = mean_std(w.iter().flat_map(|tw| tw.values.iter().copied()));
            RadiusCell {
                radius_nm: r,
                energy_ratio: model.energy_ratio,
                radius_over_xzpf: model.radius_over_xzpf,
                mean_negativity: mean,
                std,
                stderr: std / (n as f64).sqrt(),
                sample_std,
                n_trajectories: n,
                truncation_warnings: w.iter().filter(|tw| tw.truncation_warning).count(),
                max_edge_population: w.iter().map(|tw| tw.max_edge).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(RadiusSweep {
        cells,
        steady_window: (cfg.steady_start_cycle, cfg.n_cycles as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Experiment;
    use crate::hilbert::SubsystemDims;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::preset(Experiment::RadiusSweep);
        cfg.dims = Some(SubsystemDims::new(6, 7).unwrap());
        cfg.steps_per_cycle = 100;
        cfg.n_cycles = 4;
        cfg.steady_start_cycle = 2.0;
        cfg.n_trajectories = 3;
        cfg.physical.meas_rate_k = 0.05;
        cfg.sweep = Some(Sweep::RadiusNm(vec![1.5, 1.75, 3.0]));
        cfg
    }

    #[test]
    fn no_measurement_means_no_negativity() {
        let mut cfg = small();
        cfg.physical.meas_rate_k = 0.0;
        let sweep = run_radius_sweep(&cfg).unwrap();
        for c in &sweep.cells {
            assert!(c.mean_negativity < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn cells_report_the_model_ratio() {
        let sweep = run_radius_sweep(&small()).unwrap();
        assert_eq!(sweep.cells.len(), 3);
        let c = sweep.nearest_unit_ratio().unwrap();
        assert_eq!(c.radius_nm, 1.75);
        assert!((c.energy_ratio - 1.03).abs() < 0.01);
        // I ∝ R⁵
        let ratio = sweep.cell(1.5).unwrap().energy_ratio / sweep.cell(3.0).unwrap().energy_ratio;
        assert!((ratio - 32.0).abs() < 1e-9);
        assert!(sweep.cells.iter().all(|c| c.mean_negativity > 0.0 && c.std >= 0.0));
        assert_eq!(sweep.table().rows.len(), 3);
    }

    #[test]
    fn deterministic_across_workers() {
        let mut cfg = small();
        cfg.workers = 1;
        let a = run_radius_sweep(&cfg).unwrap();
        cfg.workers = 2;
        assert_eq!(a, run_radius_sweep(&cfg).unwrap());
    }
}
