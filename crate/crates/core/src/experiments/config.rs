use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SubsystemDims;
use crate::integrators::{HamiltonianPart, KSchedule, ObservableSet, Scheme};
use crate::model::{MeasurementModel, PhysicalParams};

/// Which campaign a scenario describes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    Timeseries,
    Switchoff,
    ModelII,
    RadiusSweep,
    AccuracySweep,
    Benchmark,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Timeseries => "timeseries",
            Experiment::Switchoff => "switchoff",
            Experiment::ModelII => "model_ii",
            Experiment::RadiusSweep => "radius_sweep",
            Experiment::AccuracySweep => "accuracy_sweep",
            Experiment::Benchmark => "benchmark",
        }
    }

    pub const ALL: [Experiment; 6] = [
        Experiment::Timeseries,
        Experiment::Switchoff,
        Experiment::ModelII,
        Experiment::RadiusSweep,
        Experiment::AccuracySweep,
        Experiment::Benchmark,
    ];
}

/// Parameter grid swept by the sweep campaigns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Sphere radii in nanometers.
    RadiusNm(Vec<f64>),
    StepsPerCycle(Vec<usize>),
}

pub const DEFAULT_RADII_NM: [f64; 6] = [1.25, 1.5, 1.75, 2.0, 2.5, 3.0];
pub const DEFAULT_STEP_GRID: [usize; 7] = [100, 250, 500, 1000, 2500, 5000, 10_000];

/// Oscillator levels used when no bath limits the heating.
pub const N_OSC_WITHOUT_BATH: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub experiment: Experiment,
    pub physical: PhysicalParams,
    /// `None` picks 11×15 with the bath and 25×15 without.
    pub dims: Option<SubsystemDims>,
    pub scheme: Scheme,
    pub steps_per_cycle: usize,
    pub n_cycles: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// (start cycle, k as a fraction of ω_t). Empty means the constant rate
    /// in `physical`.
    pub k_schedule: Vec<(f64, f64)>,
    pub sweep: Option<Sweep>,
    pub outputs: ObservableSet,
    pub measurement_model: MeasurementModel,
    pub samples_per_cycle: usize,
    pub hamiltonian_part: HamiltonianPart,
    /// Symmetrize the non-Kraus schemes after every step.
    pub hermitize: bool,
    /// Also integrate the averaged master equation (time series only).
    pub master_equation: bool,
    /// First cycle of the steady-state window of the radius sweep.
    pub steady_start_cycle: f64,
    pub reference_steps_per_cycle: usize,
    /// Worker threads; 0 uses the machine's parallelism.
    pub workers: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(Experiment::Timeseries)
    }
}

impl ScenarioConfig {
    /// Defaults of each campaign.
    pub fn preset(experiment: Experiment) -> Self {
        let mut cfg = Self {
            name: experiment.name().to_string(),
            experiment,
            physical: PhysicalParams::default(),
            dims: None,
            scheme: Scheme::Rouchon,
            steps_per_cycle: 500,
            n_cycles: 100,
            n_trajectories: 500,
            seed: 1,
            k_schedule: Vec::new(),
            sweep: None,
            outputs: ObservableSet::default(),
            measurement_model: MeasurementModel::Combined,
            samples_per_cycle: 1,
            hamiltonian_part: HamiltonianPart::Propagator,
            hermitize: false,
            master_equation: true,
            steady_start_cycle: 100.0,
            reference_steps_per_cycle: 10_000,
            workers: 0,
        };
        match experiment {
            Experiment::Timeseries => {}
            Experiment::Switchoff => {
                let k = cfg.physical.meas_rate_k;
                cfg.k_schedule = vec![(0.0, k), (50.0, 0.0)];
            }
            Experiment::ModelII => {
                cfg.measurement_model = MeasurementModel::Separate;
                cfg.physical.bath_enabled = false;
            }
            Experiment::RadiusSweep => {
                cfg.physical.bath_enabled = false;
                cfg.n_cycles = 150;
                cfg.n_trajectories = 200;
                cfg.sweep = Some(Sweep::RadiusNm(DEFAULT_RADII_NM.to_vec()));
                cfg.master_equation = false;
            }
            Experiment::AccuracySweep => {
                cfg.n_cycles = 10;
                cfg.n_trajectories = 20;
                cfg.samples_per_cycle = 10;
                cfg.sweep = Some(Sweep::StepsPerCycle(DEFAULT_STEP_GRID.to_vec()));
                cfg.master_equation = false;
            }
            Experiment::Benchmark => {
                cfg.n_cycles = 20;
                cfg.n_trajectories = 1;
                cfg.master_equation = false;
            }
        }
        cfg
    }

    pub fn resolved_dims(&self) -> SubsystemDims {
        self.dims.unwrap_or(if self.physical.bath_enabled {
            SubsystemDims::default()
        } else {
            SubsystemDims {
                n_osc: N_OSC_WITHOUT_BATH,
                ..SubsystemDims::default()
            }
        })
    }

    /// Materializes defaults that depend on other fields.
    pub fn resolve(mut self) -> Self {
        self.dims = Some(self.resolved_dims());
        if self.k_schedule.is_empty() {
            self.k_schedule = vec![(0.0, self.physical.meas_rate_k)];
        }
        self
    }

    pub fn dt(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.steps_per_cycle as f64
    }

    pub fn n_steps(&self) -> usize {
        self.steps_per_cycle * self.n_cycles
    }

    pub fn sample_every(&self) -> usize {
        self.steps_per_cycle / self.samples_per_cycle
    }

    pub fn schedule(&self) -> Result<KSchedule> {
        if self.k_schedule.is_empty() {
            return Ok(KSchedule::constant(self.physical.meas_rate_k));
        }
        KSchedule::from_cycles(&self.k_schedule, self.steps_per_cycle)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(Error::Config { key: key.into(), reason });
        self.physical.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config {
                key: format!("physical.{name}"),
                reason,
            },
            other => other,
        })?;
        if let Some(d) = &self.dims {
            d.validate().map_err(|e| Error::Config {
                key: "dims".into(),
                reason: e.to_string(),
            })?;
        }
        if self.steps_per_cycle < 10 {
            return bad("steps_per_cycle", format!("must be at least 10, got {}", self.steps_per_cycle));
        }
        if self.n_cycles == 0 {
            return bad("n_cycles", "must be positive".into());
        }
        if self.n_trajectories == 0 {
            return bad("n_trajectories", "must be positive".into());
        }
        if self.samples_per_cycle == 0 || self.steps_per_cycle % self.samples_per_cycle != 0 {
            return bad(
                "samples_per_cycle",
                format!("must divide steps_per_cycle = {}", self.steps_per_cycle),
            );
        }
        if let Err(e) = self.schedule() {
            return bad("k_schedule", e.to_string());
        }
        if self.k_schedule.iter().any(|&(c, _)| c > self.n_cycles as f64) {
            return bad("k_schedule", "breakpoint after the end of the run".into());
        }
        if self.measurement_model == MeasurementModel::Separate && self.physical.meas_efficiency != 1.0 {
            return bad("measurement_model", "separate records assume unit efficiency".into());
        }
        match &self.sweep {
            Some(Sweep::RadiusNm(r)) => {
                if r.is_empty() {
                    return bad("sweep", "radius grid is empty".into());
                }
                if r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return bad("sweep", "radii must be positive".into());
                }
            }
            Some(Sweep::StepsPerCycle(s)) => {
                if s.is_empty() {
                    return bad("sweep", "step grid is empty".into());
                }
                for &n in s {
                    if n < 10 || self.reference_steps_per_cycle % n != 0 {
                        return bad(
                            "sweep",
                            format!(
                                "{n} steps/cycle must be at least 10 and divide the reference {}",
                                self.reference_steps_per_cycle
                            ),
                        );
                    }
                    if n % self.samples_per_cycle != 0 {
                        return bad("sweep", format!("{n} steps/cycle is not a multiple of samples_per_cycle"));
                    }
                }
            }
            None => {}
        }
        match self.experiment {
            Experiment::RadiusSweep => {
                if !matches!(self.sweep, Some(Sweep::RadiusNm(_))) {
                    return bad("sweep", "radius sweep needs a radius grid".into());
                }
                if self.steady_start_cycle >= self.n_cycles as f64 || self.steady_start_cycle < 0.0 {
                    return bad("steady_start_cycle", "must lie inside the run".into());
                }
            }
            Experiment::AccuracySweep => {
                if !matches!(self.sweep, Some(Sweep::StepsPerCycle(_))) {
                    return bad("sweep", "accuracy sweep needs a steps-per-cycle grid".into());
                }
            }
            Experiment::Switchoff => {
                if self.k_schedule.len() < 2 {
                    return bad("k_schedule", "switch-off needs a rate change".into());
                }
            }
            Experiment::ModelII => {
                if self.measurement_model != MeasurementModel::Separate {
                    return bad("measurement_model", "model (ii) uses separate records".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Cycle at which the measurement is last switched off, if it is.
    pub fn switch_off_cycle(&self) -> Option<f64> {
        let last = self.k_schedule.last()?;
        (self.k_schedule.len() > 1 && last.1 == 0.0).then_some(last.0)
    }
}
