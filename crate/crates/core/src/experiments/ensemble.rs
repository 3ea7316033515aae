use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{
    run_master_equation, run_trajectory, sample_wiener_stream, RunOptions, TrajectoryRecord,
};
use crate::linalg::ComplexMatrix;
use crate::model::{build_model_with, initial_state, MeasurementModel, ModelOps};
use crate::observables::subsystem_energies;

use super::config::ScenarioConfig;
use super::run_indexed;
use super::stats::{EnsembleStats, SeriesStats};
use super::table::{Cell, Table};

/// Mean negativity below this counts as vanished.
pub const NEGATIVITY_VANISHED: f64 = 0.005;

pub(crate) fn model_and_state(cfg: &ScenarioConfig) -> Result<(ModelOps, ComplexMatrix)> {
    let dims = cfg.resolved_dims();
    let model = build_model_with(&cfg.physical, dims, cfg.measurement_model)?;
    let rho0 = initial_state(&cfg.physical, dims)?.into_matrix();
    Ok((model, rho0))
}

pub(crate) fn run_options(cfg: &ScenarioConfig) -> RunOptions {
    RunOptions {
        sample_every: cfg.sample_every(),
        hermitize: cfg.hermitize,
        observables: cfg.outputs,
        hamiltonian_part: cfg.hamiltonian_part,
        ..Default::default()
    }
}

/// Runs `cfg.n_trajectories` independent trajectories; trajectory `t` uses
/// noise stream `t` of `cfg.seed`.
pub fn run_ensemble(cfg: &ScenarioConfig) -> Result<Vec<TrajectoryRecord>> {
    cfg.validate()?;
    let (model, rho0) = model_and_state(cfg)?;
    let schedule = cfg.schedule()?;
    let options = run_options(cfg);
    let n_steps = cfg.n_steps();
    let dt = cfg.dt();
    run_indexed(cfg.workers, cfg.n_trajectories, |t| {
        let grid = sample_wiener_stream(n_steps, dt, model.noise_channels(), cfg.seed, t as u64)?;
        run_trajectory(&model, &rho0, cfg.scheme, &grid, &schedule, &options)
    })
}

const SERIES: [&str; 7] = [
    "purity",
    "energy_translational",
    "energy_rotational",
    "negativity",
    "mutual_information",
    "edge_oscillator",
    "edge_rotor",
];

fn series_of<'a>(rec: &'a TrajectoryRecord, name: &str) -> &'a Vec<f64> {
    match name {
        "purity" => &rec.purity,
        "energy_translational" => &rec.energy_translational,
        "energy_rotational" => &rec.energy_rotational,
        "negativity" => &rec.negativity,
        "mutual_information" => &rec.mutual_information,
        "edge_oscillator" => &rec.edge_oscillator,
        "edge_rotor" => &rec.edge_rotor,
        _ => unreachable!("unknown series {name}"),
    }
}

/// Reduces aligned trajectories, in the given order.
pub(crate) fn reduce(records: &[TrajectoryRecord]) -> Result<EnsembleStats> {
    let first = records
        .first()
        .ok_or_else(|| Error::Misaligned("no trajectories to reduce".into()))?;
    let mut stats = EnsembleStats {
        times: first.times.iter().map(|t| t / (2.0 * PI)).collect(),
        n_trajectories: records.len(),
        ..Default::default()
    };
    for name in SERIES {
        if series_of(first, name).is_empty() {
            continue;
        }
        let rows: Vec<Vec<f64>> = records.iter().map(|r| series_of(r, name).clone()).collect();
        stats.series.insert(name.to_string(), SeriesStats::from_rows(&rows)?);
    }
    for r in records {
        stats.truncation_warnings += r.truncation_warning as usize;
        stats.max_edge_population = stats.max_edge_population.max(r.max_edge_population);
        stats.observable_failures += r.observable_failures;
    }
    Ok(stats)
}

/// Ensemble means and spreads of the sampled observables, plus (if
/// configured) the master-equation energies on the same sample times.
pub fn run_timeseries(cfg: &ScenarioConfig) -> Result<EnsembleStats> {
    let records = run_ensemble(cfg)?;
    let mut stats = reduce(&records)?;
    if cfg.master_equation {
        let (model, rho0) = model_and_state(cfg)?;
        let (mut et, mut er) = (Vec::new(), Vec::new());
        run_master_equation(
            &model,
            &rho0,
            cfg.dt(),
            cfg.n_steps(),
            &cfg.schedule()?,
            cfg.sample_every(),
            |s| {
                let (a, b) = subsystem_energies(s.state, &model.dims, model.energy_ratio);
                et.push(a);
                er.push(b);
                Ok(())
            },
        )?;
        stats.deterministic.insert("master_energy_translational".into(), et);
        stats.deterministic.insert("master_energy_rotational".into(), er);
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchoffDiagnostics {
    pub switch_cycle: f64,
    /// First sample time (cycles) after the switch with mean negativity
    /// below [`NEGATIVITY_VANISHED`].
    pub negativity_vanished_at: Option<f64>,
    pub negativity_at_plus20: f64,
    pub mutual_information_at_plus20: f64,
}

impl SwitchoffDiagnostics {
    pub fn mi_to_negativity_at_plus20(&self) -> f64 {
        self.mutual_information_at_plus20 / self.negativity_at_plus20
    }
}

#[derive(Clone, Debug)]
pub struct SwitchoffResult {
    pub stats: EnsembleStats,
    pub diagnostics: SwitchoffDiagnostics,
}

pub fn run_switchoff(cfg: &ScenarioConfig) -> Result<SwitchoffResult> {
    let switch = cfg.switch_off_cycle().ok_or_else(|| Error::Config {
        key: "k_schedule".into(),
        reason: "no switch to k = 0".into(),
    })?;
    if !cfg.outputs.correlations {
        return Err(Error::Config {
            key: "outputs".into(),
            reason: "switch-off diagnostics need the correlation measures".into(),
        });
    }
    let stats = run_timeseries(cfg)?;
    let neg = &stats.series["negativity"].mean;
    let mi = &stats.series["mutual_information"].mean;
    let after = stats.index_at(switch).unwrap_or(stats.times.len());
    let negativity_vanished_at = (after..stats.times.len())
        .find(|&i| neg[i] < NEGATIVITY_VANISHED)
        .map(|i| stats.times[i]);
    let plus20 = stats.index_at(switch + 20.0).ok_or_else(|| Error::Config {
        key: "n_cycles".into(),
        reason: "run ends before 20 cycles after the switch".into(),
    })?;
    let diagnostics = SwitchoffDiagnostics {
        switch_cycle: switch,
        negativity_vanished_at,
        negativity_at_plus20: neg[plus20],
        mutual_information_at_plus20: mi[plus20],
    };
    Ok(SwitchoffResult { stats, diagnostics })
}

/// Time series with two separate records, of X and of R·S.
pub fn run_measurement_model_ii(cfg: &ScenarioConfig) -> Result<EnsembleStats> {
    if cfg.measurement_model != MeasurementModel::Separate {
        return Err(Error::Config {
            key: "measurement_model".into(),
            reason: "model (ii) needs separate records".into(),
        });
    }
    run_timeseries(cfg)
}

/// One row per sample time: mean, std and stderr of every series, then the
/// deterministic columns.
pub fn stats_table(name: &str, stats: &EnsembleStats) -> Table {
    let mut columns = vec!["time_cycles".to_string()];
    for s in stats.series.keys() {
        for suffix in ["mean", "std", "stderr"] {
            columns.push(format!("{s}_{suffix}"));
        }
    }
    columns.extend(stats.deterministic.keys().cloned());
    let mut table = Table {
        name: name.to_string(),
        columns,
        rows: Vec::new(),
    };
    for (i, &t) in stats.times.iter().enumerate() {
        let mut row = vec![Cell::Num(t)];
        for s in stats.series.values() {
            row.extend([Cell::Num(s.mean[i]), Cell::Num(s.std[i]), Cell::Num(s.stderr[i])]);
        }
        row.extend(stats.deterministic.values().map(|v| Cell::Num(v[i])));
        table.push(row);
    }
    table
}
