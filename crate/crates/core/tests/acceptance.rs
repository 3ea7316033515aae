//! End-to-end acceptance run: one verdict line per criterion.
//!
//! `SME_ACCEPTANCE_SCALE` (default 0.02, at most 1) multiplies the ensemble
//! sizes of the stochastic criteria, each with a floor; 1 runs the full
//! campaigns, which take many hours on one core. Criteria 1, 8 and 9 always
//! run at full size. `SME_ACCEPTANCE_ONLY=2,7` selects criteria.
//!
//! A failing criterion is reported, not hidden: the process exits non-zero
//! only when a criterion could not be evaluated, or on any failure with
//! `SME_ACCEPTANCE_STRICT=1`.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use sme_core::experiments::{
    run_accuracy_sweep, run_benchmark, run_indexed, run_radius_sweep, run_switchoff, run_timeseries, EnsembleStats,
    Experiment, ScenarioConfig,
};
use sme_core::integrators::{
    run_master_equation, run_trajectory, sample_wiener_stream, ObservableSet, RunOptions, Scheme, StepOps, Stepper,
};
use sme_core::model::{build_model, initial_state};
use sme_core::observables::{hermitian_eigenvalues, trace_distance};
use sme_core::{oracles, ComplexMatrix, Result, C64};

const DEFAULT_SCALE: f64 = 0.02;

// 1: positivity
const POSITIVITY_STEPS: usize = 100_000;
const POSITIVITY_STEPS_PER_CYCLE: usize = 500;
const POSITIVITY_TOL: f64 = 1e-10;
const EXACT_EIGEN_EVERY: usize = 1000;

// 2: accuracy ordering
const ORDERING_MAX_STEPS_PER_CYCLE: usize = 2500;
const ORDERING_SEED_FRACTION: f64 = 0.9;
const ROUCHON_500_MAX_INFIDELITY: f64 = 1e-2;

// 3: purity asymptote
const PURITY_TARGET: f64 = 0.70;
const PURITY_TOL: f64 = 0.05;
const PURITY_WINDOW: (f64, f64) = (50.0, 100.0);

// 4: negativity peak
const PEAK_RADIUS_NM: f64 = 1.75;
const PEAK_REFERENCE_RADIUS_NM: f64 = 3.0;
const PEAK_SIGMAS: f64 = 2.0;

// 5: energy structure
const ENERGY_FIT_WINDOW: (f64, f64) = (20.0, 100.0);
const ENERGY_MIN_R2: f64 = 0.99;
const ENERGY_FINAL_WINDOW: (f64, f64) = (70.0, 100.0);
const BATH_TRANSLATIONAL_MAX_SLOPE_RATIO: f64 = 0.1;
const BATH_ROTATIONAL_MAX_DEVIATION: f64 = 0.3;

// 6: switch-off decay
const DECAY_NEGATIVITY: f64 = 0.005;
const DECAY_CYCLES: f64 = 20.0;
const DECAY_MI_OVER_NEGATIVITY: f64 = 5.0;

// 7: unraveling consistency
const UNRAVELING_TRAJECTORIES: usize = 500;
const UNRAVELING_TRACE_DISTANCE: f64 = 0.05;
const UNRAVELING_CYCLES: usize = 10;
const UNRAVELING_SAMPLES_PER_CYCLE: usize = 2;
const UNRAVELING_CHUNK: usize = 8;

// 8: oracles
const ORACLE_MAX_SECONDS: f64 = 60.0;

// 9: performance
const BENCH_STEPS: usize = 10_000;
const BENCH_MAX_RATIO: f64 = 0.5;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

struct Context {
    scale: f64,
    bath_on: OnceCell<EnsembleStats>,
}

impl Context {
    /// Ensemble size at the current scale, never below `floor`.
    fn scaled(&self, full: usize, floor: usize) -> usize {
        ((full as f64 * self.scale).round() as usize).clamp(floor.min(full), full)
    }

    fn figure_trajectories(&self) -> usize {
        self.scaled(200, 4)
    }

    /// Default model, bath on, 100 cycles: shared by criteria 3 and 5.
    fn bath_on(&self) -> Result<&EnsembleStats> {
        if let Some(s) = self.bath_on.get() {
            return Ok(s);
        }
        let mut cfg = ScenarioConfig::preset(Experiment::Timeseries);
        cfg.n_trajectories = self.figure_trajectories();
        cfg.outputs = ObservableSet::cheap();
        cfg.master_equation = false;
        let stats = run_timeseries(&cfg)?;
        Ok(self.bath_on.get_or_init(|| stats))
    }
}

fn min_eigenvalue(rho: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(rho)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Cholesky of ρ + tol·I succeeds exactly when no eigenvalue lies below −tol
/// (up to rounding far smaller than tol).
fn passes_cholesky(rho: &ComplexMatrix, tol: f64) -> bool {
    let n = rho.dim();
    let m = faer::Mat::from_fn(n, n, |i, j| {
        let z = rho.get(i, j) + if i == j { C64::new(tol, 0.0) } else { C64::new(0.0, 0.0) };
        faer::c64::new(z.re, z.im)
    });
    m.llt(faer::Side::Lower).is_ok()
}

fn positivity(_: &Context) -> Result<Verdict> {
    let cfg = ScenarioConfig::preset(Experiment::Timeseries);
    let dims = cfg.resolved_dims();
    let model = build_model(&cfg.physical, dims)?;
    let mut rho = initial_state(&cfg.physical, dims)?.into_matrix();
    let ops = StepOps::new(&model.hamiltonian, &model.channels)?;
    let dt = 2.0 * PI / POSITIVITY_STEPS_PER_CYCLE as f64;
    let m = ops.n_monitored();
    let grid = sample_wiener_stream(POSITIVITY_STEPS, dt, m, cfg.seed, 0)?;
    let mut stepper = Stepper::new(rho.dim());
    let (mut trace_err, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut cholesky_failures = 0;
    for i in 0..POSITIVITY_STEPS {
        stepper.rouchon(rho.as_mut_slice(), &ops, dt, &grid.step(i)[..m])?;
        let tr = rho.trace();
        trace_err = trace_err.max((tr.re - 1.0).abs().max(tr.im.abs()));
        herm = herm.max(rho.hermiticity_defect());
        if !passes_cholesky(&rho, POSITIVITY_TOL) {
            cholesky_failures += 1;
            min_eig = min_eig.min(min_eigenvalue(&rho)?);
        } else if (i + 1) % EXACT_EIGEN_EVERY == 0 {
            min_eig = min_eig.min(min_eigenvalue(&rho)?);
        }
    }
    let pass = trace_err <= POSITIVITY_TOL && herm <= POSITIVITY_TOL && cholesky_failures == 0 && min_eig >= -POSITIVITY_TOL;
    Ok(Verdict::new(
        pass,
        format!(
            "{POSITIVITY_STEPS} Rouchon steps, dim {}: max |Tr-1| {trace_err:.1e}, max Hermiticity defect {herm:.1e}, \
             steps with an eigenvalue < -{POSITIVITY_TOL:.0e}: {cholesky_failures}, \
             min eigenvalue (every {EXACT_EIGEN_EVERY} steps) {min_eig:.1e} (want all within {POSITIVITY_TOL:.0e})",
            rho.dim()
        ),
    ))
}

fn accuracy(ctx: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::AccuracySweep);
    cfg.n_trajectories = ctx.scaled(20, 3);
    cfg.n_cycles = ctx.scaled(10, 1);
    let sweep = run_accuracy_sweep(&cfg)?;
    let grid: Vec<usize> = sweep
        .cells
        .iter()
        .filter(|c| c.scheme == Scheme::Rouchon && c.steps_per_cycle <= ORDERING_MAX_STEPS_PER_CYCLE)
        .map(|c| c.steps_per_cycle)
        .collect();
    let ordered_seeds = (0..cfg.n_trajectories)
        .filter(|&t| {
            grid.iter().all(|&spc| {
                let r = sweep.trajectory(t, spc, Scheme::Rouchon).map(|x| x.infidelity);
                let m = sweep.trajectory(t, spc, Scheme::Milstein).map(|x| x.infidelity);
                matches!((r, m), (Some(r), Some(m)) if r < m)
            })
        })
        .count();
    let seed_fraction = ordered_seeds as f64 / cfg.n_trajectories as f64;
    let cell = |spc, scheme| sweep.cell(spc, scheme).expect("grid point present");
    let r500 = cell(500, Scheme::Rouchon).mean_infidelity;
    let m500 = cell(500, Scheme::Milstein);
    let m5000 = cell(5000, Scheme::Milstein);
    let clauses = [
        seed_fraction >= ORDERING_SEED_FRACTION,
        r500 <= ROUCHON_500_MAX_INFIDELITY,
        m500.purity_violation_samples >= 1,
        m5000.purity_violation_samples == 0,
    ];
    let means: Vec<String> = grid
        .iter()
        .map(|&spc| {
            format!(
                "{spc}: {:.2e}/{:.2e}",
                cell(spc, Scheme::Rouchon).mean_infidelity,
                cell(spc, Scheme::Milstein).mean_infidelity
            )
        })
        .collect();
    Ok(Verdict::new(
        clauses.iter().all(|&c| c),
        format!(
            "{} seeds x {} cycles; Rouchon<Milstein at every step <= {ORDERING_MAX_STEPS_PER_CYCLE}/cycle for \
             {ordered_seeds}/{} seeds [{}] (want >= {:.0}%); Rouchon 500/cycle infidelity {r500:.2e} [{}] \
             (want <= {ROUCHON_500_MAX_INFIDELITY:.0e}); Milstein purity-violation samples at 500/cycle {} [{}] \
             (want >= 1; max purity excess {:.1e}, min eigenvalue {:.1e}, failed runs {}), at 5000/cycle {} [{}] \
             (want 0); mean infidelity Rouchon/Milstein {{{}}}",
            cfg.n_trajectories,
            cfg.n_cycles,
            cfg.n_trajectories,
            mark(clauses[0]),
            ORDERING_SEED_FRACTION * 100.0,
            mark(clauses[1]),
            m500.purity_violation_samples,
            mark(clauses[2]),
            m500.max_purity_excess,
            m500.min_eigenvalue,
            m500.n_failed,
            m5000.purity_violation_samples,
            mark(clauses[3]),
            means.join(", ")
        ),
    ))
}

fn purity_asymptote(ctx: &Context) -> Result<Verdict> {
    let stats = ctx.bath_on()?;
    let p = stats
        .window_mean("purity", PURITY_WINDOW.0, PURITY_WINDOW.1)
        .expect("purity sampled");
    Ok(Verdict::new(
        (p - PURITY_TARGET).abs() <= PURITY_TOL,
        format!(
            "{} trajectories, bath on: mean purity over cycles {}-{} = {p:.4} (want {PURITY_TARGET} +- {PURITY_TOL})",
            stats.n_trajectories, PURITY_WINDOW.0, PURITY_WINDOW.1
        ),
    ))
}

fn negativity_peak(ctx: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::RadiusSweep);
    cfg.n_trajectories = ctx.scaled(200, 3);
    let sweep = run_radius_sweep(&cfg)?;
    let argmax = sweep.argmax().expect("non-empty grid");
    let unit = sweep.nearest_unit_ratio().expect("non-empty grid");
    let far = sweep.cell(PEAK_REFERENCE_RADIUS_NM).expect("reference radius on the grid");
    let sigma = (unit.std.powi(2) + far.std.powi(2)).sqrt();
    let gap = unit.mean_negativity - far.mean_negativity;
    let cells: Vec<String> = sweep
        .cells
        .iter()
        .map(|c| format!("{} nm: {:.4}+-{:.4}", c.radius_nm, c.mean_negativity, c.std))
        .collect();
    let clauses = [argmax.radius_nm == unit.radius_nm, unit.radius_nm == PEAK_RADIUS_NM, gap > PEAK_SIGMAS * sigma];
    Ok(Verdict::new(
        clauses.iter().all(|&c| c),
        format!(
            "{} trajectories/radius, bath off: argmax {} nm, nearest energy ratio 1 at {} nm (ratio {:.3}) \
             [{}, {}] (want both {PEAK_RADIUS_NM} nm); gap to {PEAK_REFERENCE_RADIUS_NM} nm {gap:.4} vs \
             {PEAK_SIGMAS} combined sigma {:.4} [{}]; {{{}}}",
            cfg.n_trajectories,
            argmax.radius_nm,
            unit.radius_nm,
            unit.energy_ratio,
            mark(clauses[0]),
            mark(clauses[1]),
            PEAK_SIGMAS * sigma,
            mark(clauses[2]),
            cells.join(", ")
        ),
    ))
}

fn energy_structure(ctx: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::Timeseries);
    cfg.physical.bath_enabled = false;
    cfg.n_trajectories = ctx.figure_trajectories();
    cfg.outputs = ObservableSet::cheap();
    cfg.master_equation = false;
    let off = run_timeseries(&cfg)?;
    let on = ctx.bath_on()?;
    let fit = |s: &EnsembleStats, name: &str, w: (f64, f64)| s.fit(name, w.0, w.1).expect("energies sampled");
    let off_tr = fit(&off, "energy_translational", ENERGY_FIT_WINDOW);
    let off_rot = fit(&off, "energy_rotational", ENERGY_FIT_WINDOW);
    let off_tr_final = fit(&off, "energy_translational", ENERGY_FINAL_WINDOW);
    let off_rot_final = fit(&off, "energy_rotational", ENERGY_FINAL_WINDOW);
    let on_tr = fit(on, "energy_translational", ENERGY_FINAL_WINDOW);
    let on_rot = fit(on, "energy_rotational", ENERGY_FINAL_WINDOW);
    let tr_ratio = on_tr.slope / off_tr_final.slope;
    let rot_dev = (on_rot.slope - off_rot_final.slope).abs() / off_rot_final.slope.abs();
    let clauses = [
        off_tr.r_squared >= ENERGY_MIN_R2,
        off_rot.r_squared >= ENERGY_MIN_R2,
        tr_ratio < BATH_TRANSLATIONAL_MAX_SLOPE_RATIO,
        rot_dev <= BATH_ROTATIONAL_MAX_DEVIATION,
    ];
    Ok(Verdict::new(
        clauses.iter().all(|&c| c),
        format!(
            "{} trajectories each; bath off, cycles {}-{}: R^2 translational {:.4} [{}], rotational {:.4} [{}] \
             (want >= {ENERGY_MIN_R2}); final {}-{} slopes off/on: translational {:.3e}/{:.3e}, ratio {tr_ratio:.3} \
             [{}] (want < {BATH_TRANSLATIONAL_MAX_SLOPE_RATIO}); rotational {:.3e}/{:.3e}, deviation {rot_dev:.3} \
             [{}] (want <= {BATH_ROTATIONAL_MAX_DEVIATION})",
            cfg.n_trajectories,
            ENERGY_FIT_WINDOW.0,
            ENERGY_FIT_WINDOW.1,
            off_tr.r_squared,
            mark(clauses[0]),
            off_rot.r_squared,
            mark(clauses[1]),
            ENERGY_FINAL_WINDOW.0,
            ENERGY_FINAL_WINDOW.1,
            off_tr_final.slope,
            on_tr.slope,
            mark(clauses[2]),
            off_rot_final.slope,
            on_rot.slope,
            mark(clauses[3]),
        ),
    ))
}

fn switchoff_decay(ctx: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::Switchoff);
    cfg.n_trajectories = ctx.figure_trajectories();
    let switch = cfg.switch_off_cycle().expect("preset switches off");
    cfg.n_cycles = (switch + DECAY_CYCLES).ceil() as usize;
    cfg.master_equation = false;
    let d = run_switchoff(&cfg)?.diagnostics;
    let vanished = d
        .negativity_vanished_at
        .filter(|&t| t - d.switch_cycle <= DECAY_CYCLES + 1e-9);
    let ratio_ok = d.mutual_information_at_plus20 >= DECAY_MI_OVER_NEGATIVITY * d.negativity_at_plus20;
    Ok(Verdict::new(
        vanished.is_some() && ratio_ok,
        format!(
            "{} trajectories, switch-off at cycle {}: mean negativity < {DECAY_NEGATIVITY} first at {} [{}] \
             (want within {DECAY_CYCLES} cycles); at +{DECAY_CYCLES}: MI {:.4e}, negativity {:.4e} [{}] \
             (want MI >= {DECAY_MI_OVER_NEGATIVITY} x negativity)",
            cfg.n_trajectories,
            d.switch_cycle,
            d.negativity_vanished_at
                .map_or("never".to_string(), |t| format!("cycle {t}")),
            mark(vanished.is_some()),
            d.mutual_information_at_plus20,
            d.negativity_at_plus20,
            mark(ratio_ok),
        ),
    ))
}

fn unraveling(ctx: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::Timeseries);
    cfg.n_cycles = UNRAVELING_CYCLES;
    cfg.samples_per_cycle = UNRAVELING_SAMPLES_PER_CYCLE;
    let n = ctx.scaled(UNRAVELING_TRAJECTORIES, 10);
    let dims = cfg.resolved_dims();
    let model = build_model(&cfg.physical, dims)?;
    let rho0 = initial_state(&cfg.physical, dims)?.into_matrix();
    let schedule = cfg.schedule()?;

    let mut reference = Vec::new();
    run_master_equation(&model, &rho0, cfg.dt(), cfg.n_steps(), &schedule, cfg.sample_every(), |s| {
        reference.push(s.state.clone());
        Ok(())
    })?;

    let options = RunOptions {
        sample_every: cfg.sample_every(),
        observables: ObservableSet::none(),
        keep_snapshots: true,
        ..Default::default()
    };
    let mut sum: Vec<ComplexMatrix> = reference.iter().map(|r| ComplexMatrix::zeros(r.dim())).collect();
    for start in (0..n).step_by(UNRAVELING_CHUNK) {
        let chunk = run_indexed(cfg.workers, UNRAVELING_CHUNK.min(n - start), |i| {
            let grid = sample_wiener_stream(cfg.n_steps(), cfg.dt(), model.noise_channels(), cfg.seed, (start + i) as u64)?;
            run_trajectory(&model, &rho0, Scheme::Rouchon, &grid, &schedule, &options)
        })?;
        for rec in chunk {
            assert_eq!(rec.snapshots.len(), sum.len(), "trajectory and master equation sampled alike");
            for (acc, snap) in sum.iter_mut().zip(&rec.snapshots) {
                *acc += &snap.state;
            }
        }
    }
    let mut worst = (0.0f64, 0.0f64);
    for (k, (acc, reference)) in sum.iter().zip(&reference).enumerate() {
        let d = trace_distance(&acc.scale_real(1.0 / n as f64), reference)?;
        if d > worst.0 {
            worst = (d, k as f64 / UNRAVELING_SAMPLES_PER_CYCLE as f64);
        }
    }
    // The mean of n trajectories scatters about the exact solution as
    // 1/sqrt(n); below the full ensemble the bound is widened to match.
    let tol = UNRAVELING_TRACE_DISTANCE * (UNRAVELING_TRAJECTORIES as f64 / n as f64).sqrt();
    Ok(Verdict::new(
        worst.0 <= tol,
        format!(
            "{n} Rouchon trajectories vs master equation, bath on, {UNRAVELING_CYCLES} cycles: max trace distance \
             {:.4} at cycle {} (want <= {tol:.4} = {UNRAVELING_TRACE_DISTANCE} x sqrt({UNRAVELING_TRAJECTORIES}/{n}))",
            worst.0, worst.1
        ),
    ))
}

fn oracle_suite(_: &Context) -> Result<Verdict> {
    let start = Instant::now();
    let checks = oracles::run_all();
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    Ok(Verdict::new(
        failed.is_empty() && secs < ORACLE_MAX_SECONDS,
        format!(
            "{}/{} oracle checks pass in {secs:.1} s (want all, in < {ORACLE_MAX_SECONDS} s){}",
            checks.len() - failed.len(),
            checks.len(),
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

fn performance(_: &Context) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::preset(Experiment::Benchmark);
    cfg.n_cycles = BENCH_STEPS / cfg.steps_per_cycle;
    let b = run_benchmark(&cfg)?;
    let ratio = b.rouchon_over_milstein().expect("both schemes timed");
    let r = b.row("rouchon").expect("timed");
    let m = b.row("milstein").expect("timed");
    Ok(Verdict::new(
        ratio <= BENCH_MAX_RATIO,
        format!(
            "dim {}, {} timed steps: Rouchon {:.3} ms/step, Milstein {:.3} ms/step, ratio {ratio:.3} \
             (want <= {BENCH_MAX_RATIO})",
            r.dim,
            r.n_steps,
            r.seconds_per_step * 1e3,
            m.seconds_per_step * 1e3
        ),
    ))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

type Criterion = (usize, &'static str, bool, fn(&Context) -> Result<Verdict>);

const CRITERIA: [Criterion; 9] = [
    (1, "positivity", false, positivity),
    (2, "accuracy ordering", true, accuracy),
    (3, "purity asymptote", true, purity_asymptote),
    (4, "negativity peak", true, negativity_peak),
    (5, "energy structure", true, energy_structure),
    (6, "switch-off decay", true, switchoff_decay),
    (7, "unraveling consistency", true, unraveling),
    (8, "oracle equivalence", false, oracle_suite),
    (9, "performance", false, performance),
];

fn env_scale() -> std::result::Result<f64, String> {
    match std::env::var("SME_ACCEPTANCE_SCALE") {
        Err(_) => Ok(DEFAULT_SCALE),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x <= 1.0 => Ok(x),
            _ => Err(format!("SME_ACCEPTANCE_SCALE must lie in (0, 1], got {s:?}")),
        },
    }
}

fn selected() -> std::result::Result<Option<Vec<usize>>, String> {
    let Ok(s) = std::env::var("SME_ACCEPTANCE_ONLY") else {
        return Ok(None);
    };
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad SME_ACCEPTANCE_ONLY entry {x:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Some)
}

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes harness arguments; with a filter that
    // names something else, there is nothing to do here.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let (scale, only) = match (env_scale(), selected()) {
        (Ok(s), Ok(o)) => (s, o),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let strict = std::env::var("SME_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let ctx = Context {
        scale,
        bath_on: OnceCell::new(),
    };
    println!("acceptance: scale {scale} (1 = full campaign)");
    let (mut passed, mut failed, mut errors) = (0, 0, 0);
    for (id, name, scaled, check) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            println!("criterion {id} SKIP  {name}");
            continue;
        }
        let start = Instant::now();
        let result = check(&ctx);
        let secs = start.elapsed().as_secs_f64();
        let at = if scaled { format!("scale {scale}") } else { "full size".to_string() };
        match result {
            Ok(v) => {
                if v.pass {
                    passed += 1;
                } else {
                    failed += 1;
                }
                println!(
                    "criterion {id} {}  {name}: {} [{at}, {secs:.0} s]",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.detail
                );
            }
            Err(e) => {
                errors += 1;
                println!("criterion {id} ERROR {name}: {e} [{at}, {secs:.0} s]");
            }
        }
    }
    println!("acceptance: {passed} passed, {failed} failed, {errors} could not be evaluated");
    if errors > 0 || (strict && failed > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
