use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrators::{sample_wiener_stream, HamiltonianPart, Scheme, StepOps, Stepper};
use crate::linalg::ComplexMatrix;

use super::config::ScenarioConfig;
use super::ensemble::model_and_state;
use super::table::{Cell, Table};

/// Untimed steps before each measurement.
pub const WARMUP_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub dim: usize,
    pub n_steps: usize,
    pub seconds_per_step: f64,
    pub steps_per_second: f64,
    /// Restarts from ρ₀ after a numerical failure.
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub rows: Vec<BenchRow>,
}

impl Benchmark {
    pub fn row(&self, method: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Rouchon time per step over Milstein time per step.
    pub fn rouchon_over_milstein(&self) -> Option<f64> {
        Some(self.row("rouchon")?.seconds_per_step / self.row("milstein")?.seconds_per_step)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "benchmark",
            &["method", "dim", "n_steps", "seconds_per_step", "steps_per_second", "ratio_to_milstein", "restarts"],
        );
        let base = self.row("milstein").map(|r| r.seconds_per_step);
        for r in &self.rows {
            t.push(vec![
                r.method.as_str().into(),
                r.dim.into(),
                r.n_steps.into(),
                Cell::Num(r.seconds_per_step),
                Cell::Num(r.steps_per_second),
                Cell::Num(base.map_or(f64::NAN, |b| r.seconds_per_step / b)),
                r.restarts.into(),
            ]);
        }
        t
    }
}

#[derive(Clone, Copy)]
enum Method {
    Stochastic(Scheme),
    Lindblad,
}

fn step(stepper: &mut Stepper, method: Method, rho: &mut [crate::linalg::C64], ops: &StepOps, dt: f64, dw: &[f64]) -> Result<()> {
    match method {
        Method::Stochastic(Scheme::Rouchon) => stepper.rouchon(rho, ops, dt, dw),
        Method::Stochastic(Scheme::Milstein) => stepper.milstein(rho, ops, dt, dw, true),
        Method::Stochastic(Scheme::EulerMaruyama) => stepper.milstein(rho, ops, dt, dw, false),
        Method::Lindblad => stepper.lindblad(rho, ops, dt),
    }
}

/// Wall-clock per step of each method on the same model, initial state and
/// noise path, over `cfg.n_steps()` timed steps after a warm-up.
pub fn run_benchmark(cfg: &ScenarioConfig) -> Result<Benchmark> {
    cfg.validate()?;
    let (model, rho0) = model_and_state(cfg)?;
    let ops = StepOps::with_hamiltonian_part(&model.hamiltonian, &model.channels, cfg.hamiltonian_part)?;
    let n = cfg.n_steps();
    let dt = cfg.dt();
    let grid = sample_wiener_stream(n + WARMUP_STEPS, dt, ops.n_monitored(), cfg.seed, 0)?;
    let methods = [
        ("rouchon", Method::Stochastic(Scheme::Rouchon)),
        ("milstein", Method::Stochastic(Scheme::Milstein)),
        ("euler_maruyama", Method::Stochastic(Scheme::EulerMaruyama)),
        ("lindblad", Method::Lindblad),
    ];
    let mut rows = Vec::new();
    for (name, method) in methods {
        let mut stepper = Stepper::new(ops.dim());
        let mut rho: ComplexMatrix = rho0.clone();
        let mut restarts = 0;
        let mut run = |range: std::ops::Range<usize>, rho: &mut ComplexMatrix, restarts: &mut usize| {
            for i in range {
                if step(&mut stepper, method, rho.as_mut_slice(), &ops, dt, grid.step(i)).is_err() {
                    *rho = rho0.clone();
                    *restarts += 1;
                }
            }
        };
        run(0..WARMUP_STEPS, &mut rho, &mut restarts);
        let start = Instant::now();
        run(WARMUP_STEPS..WARMUP_STEPS + n, &mut rho, &mut restarts);
        let secs = start.elapsed().as_secs_f64() / n as f64;
        rows.push(BenchRow {
            method: name.to_string(),
            dim: ops.dim(),
            n_steps: n,
            seconds_per_step: secs,
            steps_per_second: 1.0 / secs,
            restarts,
        });
    }
    if cfg.hamiltonian_part == HamiltonianPart::Linearized {
        for r in &mut rows {
            r.method.push_str("_linearized");
        }
    }
    Ok(Benchmark { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Experiment;
    use crate::hilbert::SubsystemDims;

    #[test]
    fn reports_every_method() {
        let mut cfg = ScenarioConfig::preset(Experiment::Benchmark);
        cfg.dims = Some(SubsystemDims::new(4, 5).unwrap());
        cfg.n_cycles = 1;
        cfg.steps_per_cycle = 100;
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(b.rows.len(), 4);
        assert!(b.rows.iter().all(|r| r.seconds_per_step > 0.0 && r.dim == 20 && r.restarts == 0));
        assert!(b.rouchon_over_milstein().unwrap() > 0.0);
        assert_eq!(b.table().rows.len(), 4);
    }
}
