use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{
    run_trajectory_with, sample_wiener_stream, KSchedule, ObservableSet, RunOptions, Scheme,
    PURITY_VIOLATION_TOL,
};
use crate::observables::{purity_of, repair_state, FidelityReference};

use super::config::{ScenarioConfig, Sweep};
use super::ensemble::model_and_state;
use super::run_indexed;
use super::stats::mean_std;
use super::table::{Cell, Table};

/// Samples whose most negative eigenvalue lies below −this are counted as
/// positivity losses (rounding-level negatives are not).
pub const REPAIR_FLAG_EIGENVALUE: f64 = 1e-8;

const SCHEMES: [Scheme; 2] = [Scheme::Rouchon, Scheme::Milstein];

/// One trajectory at one step size with one scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTrajectory {
    pub trajectory: usize,
    pub steps_per_cycle: usize,
    pub scheme: Scheme,
    /// Time-averaged infidelity against the reference (t = 0 excluded).
    pub infidelity: f64,
    /// The run stopped on a numerical failure; later samples count as
    /// infidelity 1.
    pub failed_at_step: Option<usize>,
    pub purity_violation_samples: usize,
    pub purity_violation_steps: usize,
    pub max_purity: f64,
    pub negative_eigenvalue_samples: usize,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub steps_per_cycle: usize,
    pub scheme: Scheme,
    pub mean_infidelity: f64,
    pub std: f64,
    pub stderr: f64,
    pub n_trajectories: usize,
    pub n_failed: usize,
    pub purity_violation_samples: usize,
    pub purity_violation_steps: usize,
    /// max(0, max purity − 1) over all steps of all trajectories.
    pub max_purity_excess: f64,
    pub negative_eigenvalue_samples: usize,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracySweep {
    pub reference_steps_per_cycle: usize,
    pub cells: Vec<AccuracyCell>,
    pub trajectories: Vec<AccuracyTrajectory>,
}

impl AccuracySweep {
    pub fn cell(&self, steps_per_cycle: usize, scheme: Scheme) -> Option<&AccuracyCell> {
        self.cells
            .iter()
            .find(|c| c.steps_per_cycle == steps_per_cycle && c.scheme == scheme)
    }

    pub fn trajectory(&self, t: usize, steps_per_cycle: usize, scheme: Scheme) -> Option<&AccuracyTrajectory> {
        self.trajectories
            .iter()
            .find(|r| r.trajectory == t && r.steps_per_cycle == steps_per_cycle && r.scheme == scheme)
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut cells = Table::new(
            "accuracy",
            &[
                "steps_per_cycle",
                "scheme",
                "infidelity_mean",
                "infidelity_std",
                "infidelity_stderr",
                "n_trajectories",
                "n_failed",
                "purity_violation_samples",
                "purity_violation_steps",
                "max_purity_excess",
                "negative_eigenvalue_samples",
                "min_eigenvalue",
            ],
        );
        for c in &self.cells {
            cells.push(vec![
                c.steps_per_cycle.into(),
                c.scheme.name().into(),
                Cell::Num(c.mean_infidelity),
                Cell::Num(c.std),
                Cell::Num(c.stderr),
                c.n_trajectories.into(),
                c.n_failed.into(),
                c.purity_violation_samples.into(),
                c.purity_violation_steps.into(),
                Cell::Num(c.max_purity_excess),
                c.negative_eigenvalue_samples.into(),
                Cell::Num(c.min_eigenvalue),
            ]);
        }
        let mut per = Table::new(
            "accuracy_trajectories",
            &[
                "trajectory",
                "steps_per_cycle",
                "scheme",
                "infidelity",
                "failed_at_step",
                "purity_violation_samples",
                "purity_violation_steps",
                "max_purity",
                "negative_eigenvalue_samples",
                "min_eigenvalue",
            ],
        );
        for r in &self.trajectories {
            per.push(vec![
                r.trajectory.into(),
                r.steps_per_cycle.into(),
                r.scheme.name().into(),
                Cell::Num(r.infidelity),
                r.failed_at_step.map_or(Cell::Int(-1), |s| s.into()),
                r.purity_violation_samples.into(),
                r.purity_violation_steps.into(),
                Cell::Num(r.max_purity),
                r.negative_eigenvalue_samples.into(),
                Cell::Num(r.min_eigenvalue),
            ]);
        }
        vec![cells, per]
    }
}

/// Accuracy of Rouchon and Milstein against a fine-step Rouchon reference.
/// For each trajectory one fine noise path is drawn; every coarser run uses
/// exact partial sums of it.
pub fn run_accuracy_sweep(cfg: &ScenarioConfig) -> Result<AccuracySweep> {
    cfg.validate()?;
    let grid_spc = match &cfg.sweep {
        Some(Sweep::StepsPerCycle(s)) => s.clone(),
        _ => unreachable!("validated"),
    };
    let (model, rho0) = model_and_state(cfg)?;
    let ref_spc = cfg.reference_steps_per_cycle;
    let n_samples = cfg.n_cycles * cfg.samples_per_cycle;
    let schedule_at = |spc: usize| {
        if cfg.k_schedule.is_empty() {
            Ok(KSchedule::constant(cfg.physical.meas_rate_k))
        } else {
            KSchedule::from_cycles(&cfg.k_schedule, spc)
        }
    };
    let options_at = |spc: usize| RunOptions {
        sample_every: spc / cfg.samples_per_cycle,
        hermitize: cfg.hermitize,
        observables: ObservableSet::none(),
        hamiltonian_part: cfg.hamiltonian_part,
        monitor_purity: true,
        ..Default::default()
    };

    let per_trajectory = run_indexed(cfg.workers, cfg.n_trajectories, |t| {
        let dt_fine = 2.0 * std::f64::consts::PI / ref_spc as f64;
        let fine = sample_wiener_stream(ref_spc * cfg.n_cycles, dt_fine, model.noise_channels(), cfg.seed, t as u64)?;

        let mut refs = Vec::with_capacity(n_samples);
        let ref_rec = run_trajectory_with(
            &model,
            &rho0,
            Scheme::Rouchon,
            &fine,
            &schedule_at(ref_spc)?,
            &options_at(ref_spc),
            |s| {
                if s.index > 0 {
                    refs.push(FidelityReference::new(s.state)?);
                }
                Ok(())
            },
        )?;

        let mut out = Vec::new();
        for &spc in &grid_spc {
            for scheme in SCHEMES {
                if spc == ref_spc && scheme == Scheme::Rouchon {
                    out.push(AccuracyTrajectory {
                        trajectory: t,
                        steps_per_cycle: spc,
                        scheme,
                        infidelity: 0.0,
                        failed_at_step: None,
                        purity_violation_samples: 0,
                        purity_violation_steps: ref_rec.purity_violation_steps,
                        max_purity: ref_rec.max_step_purity,
                        negative_eigenvalue_samples: 0,
                        min_eigenvalue: f64::NAN,
                    });
                    continue;
                }
                let grid = fine.coarsen(ref_spc / spc)?;
                let mut infid = Vec::with_capacity(n_samples);
                let mut row = AccuracyTrajectory {
                    trajectory: t,
                    steps_per_cycle: spc,
                    scheme,
                    infidelity: 0.0,
                    failed_at_step: None,
                    purity_violation_samples: 0,
                    purity_violation_steps: 0,
                    max_purity: 0.0,
                    negative_eigenvalue_samples: 0,
                    min_eigenvalue: f64::INFINITY,
                };
                let result = run_trajectory_with(
                    &model,
                    &rho0,
                    scheme,
                    &grid,
                    &schedule_at(spc)?,
                    &options_at(spc),
                    |s| {
                        if s.index == 0 {
                            return Ok(());
                        }
                        if purity_of(s.state) > 1.0 + PURITY_VIOLATION_TOL {
                            row.purity_violation_samples += 1;
                        }
                        let (state, report) = repair_state(s.state)?;
                        row.min_eigenvalue = row.min_eigenvalue.min(report.min_eigenvalue);
                        if report.min_eigenvalue < -REPAIR_FLAG_EIGENVALUE {
                            row.negative_eigenvalue_samples += 1;
                        }
                        infid.push(1.0 - refs[s.index - 1].fidelity_unchecked(&state)?);
                        Ok(())
                    },
                );
                match result {
                    Ok(rec) => {
                        row.purity_violation_steps = rec.purity_violation_steps;
                        row.max_purity = rec.max_step_purity;
                    }
                    Err(Error::AtStep { step, source }) if source.is_numerical() => {
                        row.failed_at_step = Some(step);
                        row.max_purity = f64::NAN;
                    }
                    Err(e) => return Err(e),
                }
                infid.resize(n_samples, 1.0);
                row.infidelity = infid.iter().sum::<f64>() / n_samples as f64;
                out.push(row);
            }
        }
        Ok(out)
    })?;

    let trajectories: Vec<AccuracyTrajectory> = per_trajectory.into_iter().flatten().collect();
    let mut cells = Vec::new();
    for &spc in &grid_spc {
        for scheme in SCHEMES {
            let rows: Vec<&AccuracyTrajectory> = trajectories
                .iter()
                .filter(|r| r.steps_per_cycle == spc && r.scheme == scheme)
                .collect();
            let (mean, std, n) = mean_std(rows.iter().map(|r| r.infidelity));
            cells.push(AccuracyCell {
                steps_per_cycle: spc,
                scheme,
                mean_infidelity: mean,
                std,
                stderr: std / (n as f64).sqrt(),
                n_trajectories: rows.len(),
                n_failed: rows.iter().filter(|r| r.failed_at_step.is_some()).count(),
                purity_violation_samples: rows.iter().map(|r| r.purity_violation_samples).sum(),
                purity_violation_steps: rows.iter().map(|r| r.purity_violation_steps).sum(),
                max_purity_excess: rows
                    .iter()
                    .map(|r| r.max_purity - 1.0)
                    .filter(|v| v.is_finite())
                    .fold(0.0, f64::max),
                negative_eigenvalue_samples: rows.iter().map(|r| r.negative_eigenvalue_samples).sum(),
                min_eigenvalue: rows.iter().map(|r| r.min_eigenvalue).filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min),
            });
        }
    }
    Ok(AccuracySweep {
        reference_steps_per_cycle: ref_spc,
        cells,
        trajectories,
    })
}
