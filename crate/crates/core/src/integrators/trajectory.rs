use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetrize_in_place, ComplexMatrix};
use crate::model::ModelOps;
use crate::observables::{
    edge_populations, mutual_information_of, negativity_of, purity_of, subsystem_energies,
    Bipartition, Snapshot,
};

use super::ops::{HamiltonianPart, StepOps};
use super::pure::PureEnsemble;
use super::step::{recover_increments, Stepper};
use super::wiener::WienerGrid;

/// Edge populations above this mark a run as possibly truncation-limited.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;
/// Purity above 1 + this counts as a positivity violation.
pub const PURITY_VIOLATION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rouchon,
    Milstein,
    EulerMaruyama,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Rouchon => "rouchon",
            Scheme::Milstein => "milstein",
            Scheme::EulerMaruyama => "euler_maruyama",
        }
    }
}

/// Piecewise-constant measurement rate on the step grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSchedule {
    /// (first step, rate), strictly increasing steps, first entry at step 0.
    segments: Vec<(usize, f64)>,
}

impl KSchedule {
    pub fn constant(k: f64) -> Self {
        Self {
            segments: vec![(0, k)],
        }
    }

    pub fn new(mut segments: Vec<(usize, f64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Grid("empty measurement-rate schedule".into()));
        }
        segments.dedup_by(|b, a| a.1 == b.1);
        if segments[0].0 != 0 {
            return Err(Error::Grid("schedule must start at step 0".into()));
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Grid("schedule steps must increase".into()));
            }
        }
        if segments.iter().any(|s| !(s.1 >= 0.0 && s.1.is_finite())) {
            return Err(Error::Grid("measurement rates must be nonnegative".into()));
        }
        Ok(Self { segments })
    }

    /// Schedule given in oscillator cycles; every breakpoint must land on a
    /// grid step.
    pub fn from_cycles(points: &[(f64, f64)], steps_per_cycle: usize) -> Result<Self> {
        let mut segments = Vec::with_capacity(points.len());
        for &(cycle, k) in points {
            let step = cycle * steps_per_cycle as f64;
            if (step - step.round()).abs() > 1e-9 || step < 0.0 {
                return Err(Error::Grid(format!(
                    "schedule point at cycle {cycle} does not fall on the step grid"
                )));
            }
            segments.push((step.round() as usize, k));
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[(usize, f64)] {
        &self.segments
    }

    pub fn rate_at(&self, step: usize) -> f64 {
        self.segments[self.segment_index(step)].1
    }

    fn segment_index(&self, step: usize) -> usize {
        self.segments.partition_point(|s| s.0 <= step) - 1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Pure-state mixture when every channel is fully monitored and the
    /// scheme is Kraus-based, dense otherwise.
    #[default]
    Auto,
    Dense,
    PureEnsemble,
}

/// Which diagnostics to evaluate at each sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub purity: bool,
    pub energies: bool,
    /// Negativity and mutual information (each needs eigendecompositions).
    pub correlations: bool,
    pub edges: bool,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self {
            purity: true,
            energies: true,
            correlations: true,
            edges: true,
        }
    }
}

impl ObservableSet {
    pub fn none() -> Self {
        Self {
            purity: false,
            energies: false,
            correlations: false,
            edges: false,
        }
    }

    pub fn cheap() -> Self {
        Self {
            correlations: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub sample_every: usize,
    /// Replace the state by its Hermitian part after every step of the
    /// non-Kraus schemes.
    pub hermitize: bool,
    pub representation: Representation,
    pub observables: ObservableSet,
    pub keep_snapshots: bool,
    /// Treat the grid as observed record increments dy and infer dW from them.
    pub filter_record: bool,
    pub hamiltonian_part: HamiltonianPart,
    /// Track Tr(ρ²) after every step, not only at samples.
    pub monitor_purity: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            sample_every: 1,
            hermitize: false,
            representation: Representation::Auto,
            observables: ObservableSet::default(),
            keep_snapshots: false,
            filter_record: false,
            hamiltonian_part: HamiltonianPart::default(),
            monitor_purity: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Integrated record y_r per measured noise column, at the sample times.
    pub records: Vec<Vec<f64>>,
    pub purity: Vec<f64>,
    pub energy_translational: Vec<f64>,
    pub energy_rotational: Vec<f64>,
    pub negativity: Vec<f64>,
    pub mutual_information: Vec<f64>,
    pub edge_oscillator: Vec<f64>,
    pub edge_rotor: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub k_schedule: Vec<(usize, f64)>,
    pub truncation_warning: bool,
    pub max_edge_population: f64,
    /// Samples whose correlation measures could not be evaluated (broken
    /// state from a non-Kraus scheme); stored as NaN.
    pub observable_failures: usize,
    pub used_pure_ensemble: bool,
    /// With `monitor_purity`: largest per-step purity and the number of
    /// steps exceeding 1 + [`PURITY_VIOLATION_TOL`].
    pub max_step_purity: f64,
    pub purity_violation_steps: usize,
}

/// One sampled state handed to a sink.
pub struct Sample<'a> {
    pub index: usize,
    pub step: usize,
    pub time: f64,
    pub state: &'a ComplexMatrix,
}

pub fn run_trajectory(
    model: &ModelOps,
    rho0: &ComplexMatrix,
    scheme: Scheme,
    grid: &WienerGrid,
    schedule: &KSchedule,
    options: &RunOptions,
) -> Result<TrajectoryRecord> {
    run_trajectory_with(model, rho0, scheme, grid, schedule, options, |_| Ok(()))
}

/// Integrates one trajectory over the whole grid, sampling every
/// `sample_every` steps (and at the final step). Each sampled state is also
/// passed to `sink`. Failures carry the index of the failing step.
pub fn run_trajectory_with(
    model: &ModelOps,
    rho0: &ComplexMatrix,
    scheme: Scheme,
    grid: &WienerGrid,
    schedule: &KSchedule,
    options: &RunOptions,
    mut sink: impl FnMut(Sample<'_>) -> Result<()>,
) -> Result<TrajectoryRecord> {
    let dim = model.dims.joint();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho0.dim(),
        });
    }
    if grid.n_channels() != model.noise_channels() {
        return Err(Error::Grid(format!(
            "grid has {} noise columns, model measures {}",
            grid.n_channels(),
            model.noise_channels()
        )));
    }
    if options.sample_every == 0 {
        return Err(Error::Grid("sample_every must be positive".into()));
    }
    if let Some(&(last, _)) = schedule.segments().last() {
        if last > grid.n_steps() {
            return Err(Error::Grid("schedule extends past the grid".into()));
        }
    }

    let ops: Vec<StepOps> = schedule
        .segments()
        .iter()
        .map(|&(_, k)| {
            StepOps::with_hamiltonian_part(&model.hamiltonian, &model.channels_at_rate(k), options.hamiltonian_part)
        })
        .collect::<Result<_>>()?;

    let pure_ok = scheme == Scheme::Rouchon && ops.iter().all(|o| o.all_monitored()) && !options.filter_record;
    let use_pure = match options.representation {
        Representation::Auto => pure_ok,
        Representation::Dense => false,
        Representation::PureEnsemble => {
            if !pure_ok {
                return Err(Error::InvalidState(
                    "pure-state propagation needs a Kraus scheme with every channel fully monitored".into(),
                ));
            }
            true
        }
    };

    let dt = grid.dt();
    let n_steps = grid.n_steps();
    let split = Bipartition::from(model.dims);
    let mut rec = TrajectoryRecord {
        records: vec![Vec::new(); grid.n_channels()],
        k_schedule: schedule.segments().to_vec(),
        used_pure_ensemble: use_pure,
        ..Default::default()
    };
    let mut y = vec![0.0; grid.n_channels()];

    let mut dense = rho0.clone();
    let mut ensemble = if use_pure {
        Some(PureEnsemble::from_density(rho0)?)
    } else {
        None
    };
    let mut stepper = Stepper::new(if use_pure { 0 } else { dim });
    let mut scratch = Vec::new();
    let mut dw_buf: Vec<f64>;
    let mut sample_index = 0;

    let mut sample = |step: usize,
                      state: &ComplexMatrix,
                      y: &[f64],
                      rec: &mut TrajectoryRecord,
                      sink: &mut dyn FnMut(Sample<'_>) -> Result<()>|
     -> Result<()> {
        let time = step as f64 * dt;
        rec.times.push(time);
        for (col, v) in rec.records.iter_mut().zip(y) {
            col.push(*v);
        }
        let obs = &options.observables;
        if obs.purity {
            rec.purity.push(purity_of(state));
        }
        if obs.energies {
            let (et, er) = subsystem_energies(state, &model.dims, model.energy_ratio);
            rec.energy_translational.push(et);
            rec.energy_rotational.push(er);
        }
        if obs.correlations {
            let herm;
            let s = if scheme == Scheme::Rouchon {
                state
            } else {
                herm = state.hermitian_part();
                &herm
            };
            let neg = negativity_of(s, split);
            let mi = mutual_information_of(s, split);
            match (neg, mi) {
                (Ok(n), Ok(m)) => {
                    rec.negativity.push(n);
                    rec.mutual_information.push(m);
                }
                (n, m) => {
                    if scheme == Scheme::Rouchon {
                        return Err(n.and(m).unwrap_err());
                    }
                    rec.observable_failures += 1;
                    rec.negativity.push(n.unwrap_or(f64::NAN));
                    rec.mutual_information.push(m.unwrap_or(f64::NAN));
                }
            }
        }
        let (eo, er) = edge_populations(state, &model.dims);
        if obs.edges {
            rec.edge_oscillator.push(eo);
            rec.edge_rotor.push(er);
        }
        rec.max_edge_population = rec.max_edge_population.max(eo).max(er);
        if options.keep_snapshots {
            rec.snapshots.push(Snapshot {
                time,
                state: state.clone(),
            });
        }
        sink(Sample {
            index: sample_index,
            step,
            time,
            state,
        })?;
        sample_index += 1;
        Ok(())
    };

    sample(0, &dense, &y, &mut rec, &mut sink)?;
    let mut segment = 0;
    for i in 0..n_steps {
        while segment + 1 < schedule.segments().len() && schedule.segments()[segment + 1].0 <= i {
            segment += 1;
        }
        let op = &ops[segment];
        let raw = grid.step(i);
        let measured = op.n_monitored();
        let dw: &[f64] = if options.filter_record && measured > 0 {
            dw_buf = recover_increments(&raw[..measured], &dense, op, dt).map_err(|e| e.at_step(i))?;
            &dw_buf
        } else {
            &raw[..measured]
        };

        // Record increment from the pre-step state.
        if measured > 0 {
            let tr = match &ensemble {
                Some(ens) => {
                    let mut t = vec![0.0; measured];
                    ens.measurement_traces(op, &mut t);
                    t
                }
                None => super::step::measurement_traces(&dense, op),
            };
            for (idx, &r) in op.monitored.iter().enumerate() {
                y[idx] += op.channels[r].efficiency.sqrt() * tr[idx] * dt + dw[idx];
            }
        }

        let result = match (&mut ensemble, scheme) {
            (Some(ens), _) => ens.rouchon_step(op, dt, dw, &mut scratch),
            (None, Scheme::Rouchon) => stepper.rouchon(dense.as_mut_slice(), op, dt, dw),
            (None, Scheme::Milstein) => stepper.milstein(dense.as_mut_slice(), op, dt, dw, true),
            (None, Scheme::EulerMaruyama) => stepper.milstein(dense.as_mut_slice(), op, dt, dw, false),
        };
        result.map_err(|e| e.at_step(i))?;
        if options.hermitize && scheme != Scheme::Rouchon {
            symmetrize_in_place(dense.as_mut_slice(), dim);
        }
        if options.monitor_purity && ensemble.is_none() {
            let p = purity_of(&dense);
            rec.max_step_purity = rec.max_step_purity.max(p);
            if p > 1.0 + PURITY_VIOLATION_TOL {
                rec.purity_violation_steps += 1;
            }
        }

        let step = i + 1;
        if step % options.sample_every == 0 || step == n_steps {
            if let Some(ens) = &ensemble {
                dense = ens.to_density();
            }
            sample(step, &dense, &y, &mut rec, &mut sink).map_err(|e| e.at_step(i))?;
        }
    }
    rec.truncation_warning = rec.max_edge_population > TRUNCATION_THRESHOLD;
    Ok(rec)
}

/// Deterministic averaged evolution sampled like [`run_trajectory`]; the
/// sink receives each sampled state.
pub fn run_master_equation(
    model: &ModelOps,
    rho0: &ComplexMatrix,
    dt: f64,
    n_steps: usize,
    schedule: &KSchedule,
    sample_every: usize,
    mut sink: impl FnMut(Sample<'_>) -> Result<()>,
) -> Result<()> {
    if sample_every == 0 || n_steps == 0 {
        return Err(Error::Grid("need at least one step and a positive sampling stride".into()));
    }
    let ops: Vec<StepOps> = schedule
        .segments()
        .iter()
        .map(|&(_, k)| StepOps::new(&model.hamiltonian, &model.channels_at_rate(k)))
        .collect::<Result<_>>()?;
    let dim = rho0.dim();
    let mut rho = rho0.clone();
    let mut stepper = Stepper::new(dim);
    let mut index = 0;
    sink(Sample {
        index,
        step: 0,
        time: 0.0,
        state: &rho,
    })?;
    let mut segment = 0;
    for i in 0..n_steps {
        while segment + 1 < schedule.segments().len() && schedule.segments()[segment + 1].0 <= i {
            segment += 1;
        }
        stepper
            .lindblad(rho.as_mut_slice(), &ops[segment], dt)
            .map_err(|e| e.at_step(i))?;
        let step = i + 1;
        if step % sample_every == 0 || step == n_steps {
            index += 1;
            sink(Sample {
                index,
                step,
                time: step as f64 * dt,
                state: &rho,
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemDims;
    use crate::integrators::wiener::{sample_wiener, sample_wiener_stream};
    use crate::model::{build_model, initial_state, PhysicalParams};
    use crate::observables::{time_averaged_infidelity, trace_distance};
    use std::f64::consts::PI;

    fn small(bath: bool) -> (ModelOps, ComplexMatrix) {
        let p = PhysicalParams {
            bath_enabled: bath,
            ..Default::default()
        };
        let dims = SubsystemDims::new(6, 7).unwrap();
        let model = build_model(&p, dims).unwrap();
        let rho0 = initial_state(&p, dims).unwrap().into_matrix();
        (model, rho0)
    }

    #[test]
    fn schedule_lookup_and_validation() {
        let s = KSchedule::from_cycles(&[(0.0, 0.005), (50.0, 0.0)], 500).unwrap();
        assert_eq!(s.segments(), &[(0, 0.005), (25_000, 0.0)]);
        assert_eq!(s.rate_at(24_999), 0.005);
        assert_eq!(s.rate_at(25_000), 0.0);
        assert!(KSchedule::from_cycles(&[(0.0, 0.1), (0.3, 0.0)], 5).is_err());
        assert!(KSchedule::new(vec![(1, 0.1)]).is_err());
        assert!(KSchedule::new(vec![(0, 0.1), (0, 0.2)]).is_err());
        assert_eq!(KSchedule::new(vec![(0, 0.1), (10, 0.1)]).unwrap(), KSchedule::constant(0.1));
    }

    #[test]
    fn record_shapes_and_sampling() {
        let (model, rho0) = small(true);
        let dt = 2.0 * PI / 100.0;
        let grid = sample_wiener(250, dt, 1, 1).unwrap();
        let opts = RunOptions {
            sample_every: 100,
            keep_snapshots: true,
            ..Default::default()
        };
        let rec = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &KSchedule::constant(0.005), &opts).unwrap();
        assert_eq!(rec.times.len(), 4); // 0, 100, 200, 250
        assert!((rec.times[3] - 250.0 * dt).abs() < 1e-12);
        for v in [&rec.purity, &rec.negativity, &rec.mutual_information, &rec.energy_rotational, &rec.records[0]] {
            assert_eq!(v.len(), 4);
        }
        assert_eq!(rec.snapshots.len(), 4);
        assert!(rec.negativity[0] < 1e-12);
        assert!(!rec.used_pure_ensemble);
    }

    #[test]
    fn constant_schedule_split_is_bit_identical() {
        let (model, rho0) = small(true);
        let dt = 2.0 * PI / 100.0;
        let grid = sample_wiener(200, dt, 1, 2).unwrap();
        let opts = RunOptions {
            sample_every: 50,
            ..Default::default()
        };
        let a = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &KSchedule::constant(0.005), &opts).unwrap();
        let split = KSchedule::new(vec![(0, 0.005), (100, 0.005)]).unwrap();
        let b = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &split, &opts).unwrap();
        assert_eq!(a.purity, b.purity);
        assert_eq!(a.negativity, b.negativity);
    }

    #[test]
    fn switch_off_leaves_bath_only() {
        let (model, rho0) = small(true);
        let dt = 2.0 * PI / 100.0;
        let grid = sample_wiener(200, dt, 1, 2).unwrap();
        let sched = KSchedule::new(vec![(0, 0.005), (100, 0.0)]).unwrap();
        assert_eq!(model.channels_at_rate(0.0).len(), 2);
        let opts = RunOptions {
            sample_every: 50,
            ..Default::default()
        };
        let rec = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts).unwrap();
        // The record stops moving once nothing is measured.
        assert_eq!(rec.records[0][2], rec.records[0][4]);
        assert_ne!(rec.records[0][1], rec.records[0][2]);
    }

    #[test]
    fn pure_and_dense_representations_agree() {
        let (model, rho0) = small(false);
        let dt = 2.0 * PI / 200.0;
        let grid = sample_wiener(400, dt, 1, 4).unwrap();
        let sched = KSchedule::constant(0.005);
        let mut opts = RunOptions {
            sample_every: 100,
            keep_snapshots: true,
            ..Default::default()
        };
        let pure = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts).unwrap();
        assert!(pure.used_pure_ensemble);
        opts.representation = Representation::Dense;
        let dense = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts).unwrap();
        for (a, b) in pure.snapshots.iter().zip(&dense.snapshots) {
            assert!(a.state.max_abs_diff(&b.state) < 1e-11);
        }
        for (a, b) in pure.records[0].iter().zip(&dense.records[0]) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn filtering_recovers_the_simulated_path() {
        let (model, rho0) = small(true);
        let dt = 2.0 * PI / 100.0;
        let grid = sample_wiener(150, dt, 1, 8).unwrap();
        let sched = KSchedule::constant(0.005);
        let opts = RunOptions {
            sample_every: 1,
            keep_snapshots: true,
            ..Default::default()
        };
        let sim = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts).unwrap();
        let y = &sim.records[0];
        let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let record = WienerGrid::from_increments(dt, 1, dy).unwrap();
        let filt = RunOptions {
            filter_record: true,
            ..opts
        };
        let rec = run_trajectory(&model, &rho0, Scheme::Rouchon, &record, &sched, &filt).unwrap();
        let last = sim.snapshots.len() - 1;
        assert!(rec.snapshots[last].state.max_abs_diff(&sim.snapshots[last].state) < 1e-9);
    }

    #[test]
    fn closed_system_conserves_purity_and_energy() {
        let p = PhysicalParams {
            bath_enabled: false,
            meas_rate_k: 0.0,
            temperature: 20e-6,
            ..Default::default()
        };
        let dims = SubsystemDims::new(6, 7).unwrap();
        let model = build_model(&p, dims).unwrap();
        // half thermal, half an entangled superposition, so the evolution
        // is not trivially stationary
        let thermal = initial_state(&p, dims).unwrap().into_matrix();
        let psi: Vec<_> = crate::hilbert::basis_state(&dims, 0, 0)
            .iter()
            .zip(crate::hilbert::basis_state(&dims, 1, 1))
            .map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2)
            .collect();
        let rho0 = &thermal.scale_real(0.5) + &ComplexMatrix::projector(&psi).scale_real(0.5);
        let dt = 2.0 * PI / 1000.0;
        let grid = sample_wiener(3000, dt, model.noise_channels(), 0).unwrap();
        let opts = RunOptions {
            sample_every: 1000,
            ..Default::default()
        };
        let rec = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &KSchedule::constant(0.0), &opts).unwrap();
        for w in rec.purity.windows(2) {
            assert!((w[1] - w[0]).abs() <= 1e-8);
        }
        let e: Vec<f64> = rec.energy_translational.iter().zip(&rec.energy_rotational).map(|(a, b)| a + b).collect();
        for w in e.windows(2) {
            assert!((w[1] - w[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn fine_step_schemes_agree_on_a_shared_path() {
        let (model, rho0) = small(true);
        let steps = 10_000;
        let cycles = 1;
        let dt = 2.0 * PI / steps as f64;
        let grid = sample_wiener_stream(steps * cycles, dt, 1, 12, 0).unwrap();
        let opts = RunOptions {
            sample_every: 1000,
            keep_snapshots: true,
            observables: ObservableSet::cheap(),
            ..Default::default()
        };
        let sched = KSchedule::constant(model.meas_rate_k);
        let a = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts).unwrap();
        let b = run_trajectory(&model, &rho0, Scheme::Milstein, &grid, &sched, &opts).unwrap();
        let repaired: Vec<Snapshot> = b
            .snapshots
            .iter()
            .map(|s| Snapshot {
                time: s.time,
                state: crate::observables::repair_state(&s.state).unwrap().0,
            })
            .collect();
        let inf = time_averaged_infidelity(&repaired, &a.snapshots).unwrap();
        assert!(inf <= 1e-4, "{inf}");
    }

    #[test]
    fn ensemble_mean_follows_master_equation() {
        let (model, rho0) = small(true);
        let dims = SubsystemDims::new(6, 7).unwrap();
        let dt = 2.0 * PI / 200.0;
        let n_steps = 400;
        let sched = KSchedule::constant(0.05);
        let n_traj = 300;
        let samples = 5;
        let mut mean = vec![ComplexMatrix::zeros(rho0.dim()); samples];
        let mut energies = vec![Vec::new(); samples];
        let opts = RunOptions {
            sample_every: 100,
            observables: ObservableSet::cheap(),
            ..Default::default()
        };
        for t in 0..n_traj {
            let grid = sample_wiener_stream(n_steps, dt, 1, 99, t).unwrap();
            run_trajectory_with(&model, &rho0, Scheme::Rouchon, &grid, &sched, &opts, |s| {
                mean[s.index] += &s.state.scale_real(1.0 / n_traj as f64);
                let (a, b) = subsystem_energies(s.state, &dims, model.energy_ratio);
                energies[s.index].push(a + b);
                Ok(())
            })
            .unwrap();
        }
        let mut worst: f64 = 0.0;
        run_master_equation(&model, &rho0, dt, n_steps, &sched, 100, |s| {
            worst = worst.max(trace_distance(&mean[s.index], s.state)?);
            let e = &energies[s.index];
            let m = e.iter().sum::<f64>() / e.len() as f64;
            let var = e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / e.len() as f64;
            let (a, b) = subsystem_energies(s.state, &dims, model.energy_ratio);
            let stderr = (var / e.len() as f64).sqrt();
            assert!((m - a - b).abs() <= 3.0 * stderr + 1e-12, "sample {}: {m} vs {}", s.index, a + b);
            Ok(())
        })
        .unwrap();
        // sampling noise of a 300-member mixture on 42 dimensions
        assert!(worst < 0.1, "{worst}");
    }

    #[test]
    fn grid_must_match_measured_channels() {
        let (model, rho0) = small(true);
        let grid = sample_wiener(10, 0.01, 2, 0).unwrap();
        let err = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &KSchedule::constant(0.005), &RunOptions::default());
        assert!(matches!(err, Err(Error::Grid(_))));
    }
}
