//! Closed-form and hand-derived checks of the building blocks, runnable as
//! one suite in a few seconds. Each check evaluates the library on a case
//! whose answer is known independently and compares at a fixed tolerance.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hilbert::{oscillator_ops, rotor_ops, tensor, SubsystemDims};
use crate::integrators::{
    euler_maruyama_step, lindblad_step, measurement_traces, milstein_step, rouchon_step, run_trajectory,
    sample_wiener, HamiltonianPart, KSchedule, ObservableSet, RunOptions, Scheme, StepOps,
};
use crate::linalg::{ComplexMatrix, C64};
use crate::model::{
    build_model, build_model_with, derived_mechanics, initial_state, thermal_occupation, thermal_populations,
    Channel, ChannelRole, MeasurementModel, PhysicalParams,
};
use crate::observables::{
    energy_of, entropy_of, fidelity, hermitian_eigenvalues, mutual_information_of, negativity_of,
    partial_trace_of, partial_transpose_of, purity_of, repair_state, time_averaged_infidelity, trace_distance, trace_norm,
    Bipartition, Subsystem,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Near { expected: f64, tolerance: f64 },
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
}

impl Bound {
    fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Near { expected, tolerance } => (v - expected).abs() <= tolerance,
            Bound::AtMost { limit } => v <= limit,
            Bound::AtLeast { limit } => v >= limit,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Near { expected, tolerance } => write!(f, "{expected:.6e} ± {tolerance:.1e}"),
            Bound::AtMost { limit } => write!(f, "≤ {limit:.1e}"),
            Bound::AtLeast { limit } => write!(f, "≥ {limit:.1e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
    /// Set when the evaluation itself failed.
    pub error: Option<String>,
}

impl std::fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<40} value {:.6e} (want {})", self.name, self.value, self.bound)?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

type Case = (&'static str, Bound, fn() -> Result<f64>);

const fn near(expected: f64, tolerance: f64) -> Bound {
    Bound::Near { expected, tolerance }
}

const fn at_most(limit: f64) -> Bound {
    Bound::AtMost { limit }
}

const CASES: &[Case] = &[
    ("oscillator_commutator_edge", near(0.0, 1e-12), oscillator_commutator_edge),
    ("rotor_commutator_interior_3", near(0.0, 1e-15), rotor_commutator_interior),
    ("rotor_unit_circle_edge_defect", near(0.0, 1e-15), rotor_unit_circle_edges),
    ("kron_trace_multiplicative", near(0.0, 1e-12), kron_trace),
    ("xzpf_nm", near(1.12, 0.01), xzpf_nm),
    ("radius_over_xzpf", near(1.56, 0.01), radius_over_xzpf),
    ("mass_kg_e23", near(4.94, 0.01), mass),
    ("inertia_kgm2_e41", near(6.05, 0.01), inertia),
    ("energy_ratio", near(1.03, 0.01), energy_ratio),
    ("thermal_occupation", near(0.377, 1e-3), nbar),
    ("bath_loss_amplitude", near(0.117, 1e-3), bath_loss_amplitude),
    ("bath_gain_amplitude", near(0.0614, 1e-4), bath_gain_amplitude),
    ("thermal_ground_population", near(0.7264, 1e-4), ground_population),
    ("thermal_population_ratio", near(0.2736, 1e-4), population_ratio),
    ("thermal_purity_closed_form", near(0.0, 1e-4), thermal_purity),
    ("thermal_entropy_closed_form", near(0.0, 1e-4), thermal_entropy),
    ("thermal_energy_closed_form", near(0.0, 1e-4), thermal_energy),
    ("wiener_mean_in_sigma", at_most(4.0), wiener_mean),
    ("wiener_variance_rel_error", at_most(0.01), wiener_variance),
    ("wiener_coarsen_associative", near(0.0, 1e-12), coarsen_associative),
    ("two_level_unitary_error_per_dt2", at_most(1.0), two_level_unitary),
    ("two_level_rouchon_min_eigenvalue", Bound::AtLeast { limit: -1e-12 }, two_level_positivity),
    ("rouchon_milstein_one_step", at_most(1e-8), one_step_agreement),
    ("milstein_trace_free_increment", near(0.0, 1e-12), milstein_trace),
    ("euler_milstein_gap_order_dt", near(4.0, 0.05), euler_gap_order),
    ("two_level_decay_rel_error", at_most(1e-8), two_level_decay),
    ("thermal_fixed_point_drift", at_most(1e-6), thermal_fixed_point),
    ("record_drift_coefficient", near(0.0, 1e-12), record_drift),
    ("rouchon_milstein_fine_step", at_most(1e-4), fine_step_agreement),
    ("reduced_bell_state", near(0.0, 1e-15), reduced_bell),
    ("bell_partial_transpose_spectrum", near(0.0, 1e-12), bell_partial_transpose),
    ("bell_trace_norm", near(2.0, 1e-12), bell_trace_norm),
    ("bell_negativity", near(0.5, 1e-12), bell_negativity),
    ("bell_mutual_information", near(2.0 * LN_2, 1e-12), bell_mutual_information),
    ("negativity_local_unitary_invariance", near(0.0, 1e-10), negativity_local_unitaries),
    ("mutual_information_nonnegative", Bound::AtLeast { limit: -1e-12 }, mutual_information_random),
    ("pure_vs_mixed_fidelity", near(0.5, 1e-12), pure_vs_mixed_fidelity),
];

/// Evaluates every check; never panics on a failing case.
pub fn run_all() -> Vec<OracleCheck> {
    CASES
        .iter()
        .map(|&(name, bound, f)| match f() {
            Ok(value) => OracleCheck {
                name,
                value,
                bound,
                passed: bound.holds(value),
                error: None,
            },
            Err(e) => OracleCheck {
                name,
                value: f64::NAN,
                bound,
                passed: false,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn names() -> impl Iterator<Item = &'static str> {
    CASES.iter().map(|c| c.0)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn defaults() -> PhysicalParams {
    PhysicalParams::default()
}

fn oscillator_commutator_edge() -> Result<f64> {
    let o = oscillator_ops(11)?;
    let comm = o.annihilate.commutator(&o.create);
    let mut expect = ComplexMatrix::identity(11);
    expect.set(10, 10, c(-10.0, 0.0));
    Ok(comm.max_abs_diff(&expect))
}

fn rotor_commutator_interior() -> Result<f64> {
    let r = rotor_ops(3)?;
    let lhs = r.sine.commutator(&r.jz).mul_vec(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let rhs = r.cosine.scale(c(0.0, 1.0)).mul_vec(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// S² + C² = I − ½(|−j⟩⟨−j| + |+j⟩⟨+j|) on the truncated rotor.
fn rotor_unit_circle_edges() -> Result<f64> {
    let r = rotor_ops(15)?;
    let sum = &r.sine.matmul(&r.sine) + &r.cosine.matmul(&r.cosine);
    let mut expect = ComplexMatrix::identity(15);
    expect.set(0, 0, c(0.5, 0.0));
    expect.set(14, 14, c(0.5, 0.0));
    Ok(sum.max_abs_diff(&expect))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<ComplexMatrix> {
    // e^{iA} for a random Hermitian A
    let a = random_matrix(rng, n).hermitian_part();
    let d = crate::observables::SpectralDecomposition::of_hermitian(&a)?;
    let v = &d.eigenvectors;
    let phases: Vec<C64> = d.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| v.get(i, k) * phases[k] * v.get(j, k).conj()).sum()
    }))
}

fn kron_trace() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_matrix(&mut rng, 2);
    let b = random_matrix(&mut rng, 3);
    Ok((tensor(&a, &b).trace() - a.trace() * b.trace()).norm())
}

fn xzpf_nm() -> Result<f64> {
    Ok(derived_mechanics(&defaults()).xzpf * 1e9)
}

fn radius_over_xzpf() -> Result<f64> {
    let p = defaults();
    Ok(p.radius / derived_mechanics(&p).xzpf)
}

fn mass() -> Result<f64> {
    Ok(derived_mechanics(&defaults()).mass * 1e23)
}

fn inertia() -> Result<f64> {
    Ok(derived_mechanics(&defaults()).inertia * 1e41)
}

fn energy_ratio() -> Result<f64> {
    Ok(derived_mechanics(&defaults()).energy_ratio)
}

fn nbar() -> Result<f64> {
    let p = defaults();
    Ok(thermal_occupation(p.trap_freq, p.temperature))
}

/// Coefficient of the ⟨0|a|1⟩ element in a bath channel of the full model.
fn bath_amplitude(role: ChannelRole) -> Result<f64> {
    let dims = SubsystemDims::new(11, 15)?;
    let model = build_model(&defaults(), dims)?;
    let ch: &Channel = model
        .channels
        .iter()
        .find(|ch| ch.role == role)
        .expect("bath is on by default");
    let (lo, hi) = (dims.index(0, 0), dims.index(1, 0));
    Ok(ch.op.get(lo, hi).norm().max(ch.op.get(hi, lo).norm()))
}

fn bath_loss_amplitude() -> Result<f64> {
    bath_amplitude(ChannelRole::BathLoss)
}

fn bath_gain_amplitude() -> Result<f64> {
    bath_amplitude(ChannelRole::BathGain)
}

fn ground_population() -> Result<f64> {
    Ok(thermal_populations(nbar()?, 11)[0])
}

fn population_ratio() -> Result<f64> {
    let p = thermal_populations(nbar()?, 11);
    Ok(p[1] / p[0])
}

fn thermal_oscillator() -> Result<(f64, ComplexMatrix)> {
    let n = nbar()?;
    Ok((n, ComplexMatrix::from_real_diagonal(&thermal_populations(n, 11))))
}

/// Deviation from 1/(2n̄+1).
fn thermal_purity() -> Result<f64> {
    let (n, rho) = thermal_oscillator()?;
    Ok(purity_of(&rho) - 1.0 / (2.0 * n + 1.0))
}

/// Deviation from (n̄+1)ln(n̄+1) − n̄ ln n̄.
fn thermal_entropy() -> Result<f64> {
    let (n, rho) = thermal_oscillator()?;
    Ok(entropy_of(&rho)? - ((n + 1.0) * (n + 1.0).ln() - n * n.ln()))
}

/// Translational energy of the default initial state minus n̄.
fn thermal_energy() -> Result<f64> {
    let p = defaults();
    let dims = SubsystemDims::new(11, 15)?;
    let model = build_model(&p, dims)?;
    let rho = initial_state(&p, dims)?.into_matrix();
    Ok(energy_of(&rho, model.h_translational())? - model.nbar)
}

fn wiener_stats() -> Result<(f64, f64, f64)> {
    let dt = 0.01;
    let g = sample_wiener(1_000_000, dt, 1, 2024)?;
    let n = g.n_steps() as f64;
    let mean = g.column_sum(0) / n;
    let var = (0..g.n_steps()).map(|i| (g.step(i)[0] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var, dt))
}

/// |mean| in units of its standard error √(dt/N).
fn wiener_mean() -> Result<f64> {
    let (mean, _, dt) = wiener_stats()?;
    Ok(mean.abs() / (dt / 1e6).sqrt())
}

fn wiener_variance() -> Result<f64> {
    let (_, var, dt) = wiener_stats()?;
    Ok((var / dt - 1.0).abs())
}

fn coarsen_associative() -> Result<f64> {
    let g = sample_wiener(1000, 1e-3, 3, 11)?;
    let a = g.coarsen(2)?.coarsen(5)?;
    let b = g.coarsen(10)?;
    let mut worst: f64 = 0.0;
    for i in 0..b.n_steps() {
        for (x, y) in a.step(i).iter().zip(b.step(i)) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn plus_state() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0))
}

fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn monitored(op: ComplexMatrix) -> Channel {
    Channel {
        op,
        efficiency: 1.0,
        role: ChannelRole::Measurement,
    }
}

/// Worst one-step deviation from e^{−iHdt}ρe^{iHdt}, in units of dt².
fn two_level_unitary() -> Result<f64> {
    let omega = 1.3;
    let h = ComplexMatrix::from_real_diagonal(&[0.0, omega]);
    let dt = 1e-3;
    let mut worst: f64 = 0.0;
    for part in [HamiltonianPart::Propagator, HamiltonianPart::Linearized] {
        let ops = StepOps::with_hamiltonian_part(&h, &[], part)?;
        let mut rho = plus_state();
        for step in 1..=200 {
            rho = rouchon_step(&rho, &ops, dt, &[])?;
            let t = step as f64 * dt;
            let mut exact = plus_state();
            exact.set(0, 1, c(0.5, 0.0) * C64::from_polar(1.0, omega * t));
            exact.set(1, 0, c(0.5, 0.0) * C64::from_polar(1.0, -omega * t));
            worst = worst.max(rho.max_abs_diff(&exact) / (step as f64 * dt * dt));
        }
    }
    Ok(worst)
}

fn two_level_positivity() -> Result<f64> {
    let h = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
    let l = sigma_x().scale_real(0.8);
    let ops = StepOps::new(&h, &[monitored(l)])?;
    let dt = 1e-2;
    let g = sample_wiener(10_000, dt, 1, 5)?;
    let mut rho = ComplexMatrix::from_real_diagonal(&[0.7, 0.3]);
    let mut min = f64::INFINITY;
    for i in 0..g.n_steps() {
        rho = rouchon_step(&rho, &ops, dt, g.step(i))?;
        min = min.min(hermitian_eigenvalues(&rho)?[0]);
    }
    Ok(min)
}

fn one_step_agreement() -> Result<f64> {
    let h = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
    let ops = StepOps::new(&h, &[monitored(sigma_x().scale_real(0.5))])?;
    let dt: f64 = 1e-5;
    let dw = [0.8 * dt.sqrt()];
    let rho = ComplexMatrix::from_real_diagonal(&[0.8, 0.2]);
    trace_distance(&rouchon_step(&rho, &ops, dt, &dw)?, &milstein_step(&rho, &ops, dt, &dw)?)
}

fn milstein_trace() -> Result<f64> {
    let ops = StepOps::new(&ComplexMatrix::zeros(2), &[monitored(sigma_x().scale_real(0.7))])?;
    let dt: f64 = 1e-3;
    let mut rho = ComplexMatrix::from_real_diagonal(&[0.9, 0.1]);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let dw = if i % 2 == 0 { dt.sqrt() } else { -dt.sqrt() };
        rho = milstein_step(&rho, &ops, dt, &[dw])?;
        worst = worst.max((rho.trace().re - 1.0).abs());
    }
    Ok(worst)
}

/// ‖Milstein − Euler‖ at dt over the same at dt/4, with ΔW = z√dt fixed z:
/// 4 for a gap linear in dt.
fn euler_gap_order() -> Result<f64> {
    let ops = StepOps::new(&ComplexMatrix::zeros(2), &[monitored(sigma_x().scale_real(0.6))])?;
    let rho = ComplexMatrix::from_real_diagonal(&[0.9, 0.1]);
    let gap = |dt: f64| -> Result<f64> {
        let dw = [1.5 * dt.sqrt()];
        Ok(milstein_step(&rho, &ops, dt, &dw)?.max_abs_diff(&euler_maruyama_step(&rho, &ops, dt, &dw)?))
    };
    Ok(gap(1e-4)? / gap(0.25e-4)?)
}

fn two_level_decay() -> Result<f64> {
    let gamma: f64 = 0.5;
    let lower = ComplexMatrix::from_fn(2, |i, j| if i == 0 && j == 1 { c(gamma.sqrt(), 0.0) } else { c(0.0, 0.0) });
    let ch = Channel {
        op: lower,
        efficiency: 0.0,
        role: ChannelRole::BathLoss,
    };
    let ops = StepOps::new(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), &[ch])?;
    let dt = 1e-3 / gamma;
    let mut rho = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
    let mut worst: f64 = 0.0;
    for step in 1..=4000 {
        rho = lindblad_step(&rho, &ops, dt)?;
        let exact = (-gamma * step as f64 * dt).exp();
        worst = worst.max((rho.get(1, 1).re - exact).abs() / exact);
    }
    Ok(worst)
}

fn thermal_fixed_point() -> Result<f64> {
    let p = PhysicalParams {
        meas_rate_k: 0.0,
        ..defaults()
    };
    let dims = SubsystemDims::new(11, 15)?;
    let model = build_model(&p, dims)?;
    let rho0 = initial_state(&p, dims)?.into_matrix();
    let ops = StepOps::new(&model.hamiltonian, &model.channels)?;
    let mut stepper = crate::integrators::Stepper::new(dims.joint());
    let mut rho = rho0.clone();
    for _ in 0..1000 {
        stepper.lindblad(rho.as_mut_slice(), &ops, 2.0 * PI / 500.0)?;
    }
    trace_distance(&rho, &rho0)
}

/// Tr(Lρ + ρL) − 2√(2k)⟨x̃⟩ on a displaced state.
fn record_drift() -> Result<f64> {
    let k = 0.005;
    let p = PhysicalParams {
        meas_rate_k: k,
        bath_enabled: false,
        ..defaults()
    };
    let dims = SubsystemDims::new(4, 5)?;
    let model = build_model(&p, dims)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![c(0.0, 0.0); dims.joint()];
    psi[dims.index(0, 0)] = c(s, 0.0);
    psi[dims.index(1, 0)] = c(0.6 * s, 0.8 * s);
    psi[dims.index(0, 1)] = c(0.0, 0.0);
    let rho = ComplexMatrix::projector(&psi);
    let ops = StepOps::new(&model.hamiltonian, &model.channels)?;
    let tr = measurement_traces(&rho, &ops)[0];
    Ok(tr - 2.0 * (2.0 * k).sqrt() * energy_of(&rho, &model.observables[0])?)
}

/// Time-averaged infidelity between the two schemes at dt = T/10⁴ on a
/// shared path, 10 cycles, reduced sphere model.
fn fine_step_agreement() -> Result<f64> {
    let p = defaults();
    let dims = SubsystemDims::new(5, 7)?;
    let model = build_model_with(&p, dims, MeasurementModel::Combined)?;
    let rho0 = initial_state(&p, dims)?.into_matrix();
    let spc = 10_000;
    let grid = sample_wiener(10 * spc, 2.0 * PI / spc as f64, model.noise_channels(), 3)?;
    let options = RunOptions {
        sample_every: spc / 10,
        observables: ObservableSet::none(),
        keep_snapshots: true,
        ..Default::default()
    };
    let schedule = KSchedule::constant(p.meas_rate_k);
    let a = run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &schedule, &options)?;
    let mut b = run_trajectory(&model, &rho0, Scheme::Milstein, &grid, &schedule, &options)?;
    // raw Milstein output is only approximately a state
    for s in &mut b.snapshots {
        s.state = repair_state(&s.state)?.0;
    }
    time_averaged_infidelity(&b.snapshots[1..], &a.snapshots[1..])
}

fn bell() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::projector(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
}

const QUBITS: Bipartition = Bipartition { dim_a: 2, dim_b: 2 };

fn reduced_bell() -> Result<f64> {
    let r = partial_trace_of(&bell(), QUBITS, Subsystem::A)?;
    Ok(r.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)))
}

fn bell_partial_transpose() -> Result<f64> {
    let vals = hermitian_eigenvalues(&partial_transpose_of(&bell(), QUBITS, Subsystem::A)?)?;
    let expect = [-0.5, 0.5, 0.5, 0.5];
    Ok(vals.iter().zip(expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn bell_trace_norm() -> Result<f64> {
    trace_norm(&partial_transpose_of(&bell(), QUBITS, Subsystem::A)?)
}

fn bell_negativity() -> Result<f64> {
    negativity_of(&bell(), QUBITS)
}

fn bell_mutual_information() -> Result<f64> {
    mutual_information_of(&bell(), QUBITS)
}

/// Largest change of the negativity under random U_A⊗U_B over a few states.
fn negativity_local_unitaries() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let split = Bipartition::new(2, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let rho = random_state(&mut rng, 6);
        let u = tensor(&random_unitary(&mut rng, 2)?, &random_unitary(&mut rng, 3)?);
        let moved = u.matmul(&rho).matmul(&u.adjoint());
        worst = worst.max((negativity_of(&moved, split)? - negativity_of(&rho, split)?).abs());
    }
    Ok(worst)
}

/// Smallest mutual information over random states.
fn mutual_information_random() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let split = Bipartition::new(3, 2);
    let mut min = f64::INFINITY;
    for _ in 0..20 {
        min = min.min(mutual_information_of(&random_state(&mut rng, 6), split)?);
    }
    Ok(min)
}

fn pure_vs_mixed_fidelity() -> Result<f64> {
    fidelity(
        &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
        &ComplexMatrix::identity(2).scale_real(0.5),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_oracle_passes() {
        let checks = run_all();
        assert_eq!(checks.len(), CASES.len());
        let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.to_string()).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }

    #[test]
    fn names_are_unique() {
        let mut n: Vec<_> = names().collect();
        n.sort_unstable();
        n.dedup();
        assert_eq!(n.len(), CASES.len());
    }

    #[test]
    fn bounds() {
        assert!(near(1.0, 0.1).holds(1.05));
        assert!(!near(1.0, 0.1).holds(1.2));
        assert!(!near(1.0, 0.1).holds(f64::NAN));
        assert!(at_most(1.0).holds(1.0) && !at_most(1.0).holds(f64::NAN));
        assert!(Bound::AtLeast { limit: 0.0 }.holds(0.0));
    }
}
