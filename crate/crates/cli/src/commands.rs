use std::path::PathBuf;
use std::time::Instant;

use serde_json::Map;
use sme_core::experiments::{
    run_accuracy_sweep, run_benchmark, run_measurement_model_ii, run_radius_sweep, run_switchoff, run_timeseries,
    stats_table, Cell, EnsembleStats, Experiment, ScenarioConfig, Sidecar, Table,
};
use sme_core::integrators::run_master_equation;
use sme_core::model::{build_model_with, initial_state};
use sme_core::observables::{mutual_information_of, negativity_of, purity_of, subsystem_energies, Bipartition};
use sme_core::oracles::{self, OracleCheck};

use crate::config::{read_config_file, resolve, CliLayers, ConfigError};
use crate::manifest::{unix_now, RunManifest, RunStatus, Warnings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Time series: timeseries, switchoff or model_ii.
    Run,
    /// radius_sweep or accuracy_sweep.
    Sweep,
    Bench,
    /// Deterministic master-equation solution of the scenario.
    Reference,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::Bench => "bench",
            Command::Reference => "reference",
            Command::Selftest => "selftest",
        }
    }

    fn default_experiment(&self) -> Experiment {
        match self {
            Command::Sweep => Experiment::RadiusSweep,
            Command::Bench => Experiment::Benchmark,
            _ => Experiment::Timeseries,
        }
    }

    fn accepts(&self, e: Experiment) -> bool {
        use Experiment::*;
        match self {
            Command::Run => matches!(e, Timeseries | Switchoff | ModelII),
            Command::Sweep => matches!(e, RadiusSweep | AccuracySweep),
            Command::Bench => e == Benchmark,
            Command::Reference | Command::Selftest => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub layers: CliLayers,
    pub out: PathBuf,
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const SELFTEST: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(sme_core::Error),
    #[error("{failed} of {total} self-test checks failed")]
    Selftest {
        failed: usize,
        total: usize,
        report: Vec<String>,
    },
    #[error(transparent)]
    Other(sme_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Selftest { .. } => exit::SELFTEST,
            CliError::Other(_) | CliError::Io(_) => exit::OTHER,
        }
    }
}

impl From<sme_core::Error> for CliError {
    fn from(e: sme_core::Error) -> Self {
        match e {
            sme_core::Error::Config { key, reason } => CliError::Config(ConfigError { key, reason }),
            e if e.is_numerical() => CliError::Numerical(e),
            sme_core::Error::Io(io) => CliError::Io(io),
            e => CliError::Other(e),
        }
    }
}

/// What a finished command produced.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: RunManifest,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
}

struct Produced {
    tables: Vec<Table>,
    warnings: Warnings,
    summary: Vec<String>,
    checks: Option<Vec<OracleCheck>>,
}

/// Resolves the configuration, runs the command and writes tables, a
/// sidecar and the manifest into `out`. The manifest is written first,
/// marked incomplete, and rewritten at the end.
pub fn execute(inv: &Invocation) -> Result<Outcome, CliError> {
    let file = match &inv.config {
        Some(p) => read_config_file(p)?,
        None => Map::new(),
    };
    let resolved = resolve(file, &inv.layers, inv.command.default_experiment())?;
    let cfg = &resolved.scenario;
    if !inv.command.accepts(cfg.experiment) {
        return Err(ConfigError {
            key: "experiment".into(),
            reason: format!("`{}` cannot run the {} experiment", inv.command.name(), cfg.experiment.name()),
        }
        .into());
    }

    let mut manifest = RunManifest {
        tool_version: VERSION.into(),
        command: inv.command.name().into(),
        status: RunStatus::Incomplete,
        seed: cfg.seed,
        scale: resolved.scale,
        started_unix: unix_now(),
        finished_unix: None,
        config: resolved.flat.clone(),
        file_values: resolved.file_values.clone(),
        overrides: resolved.overrides.clone(),
        outputs: Vec::new(),
        warnings: Warnings::default(),
        error: None,
    };
    manifest.write(&inv.out)?;

    let clock = Instant::now();
    let produced = match produce(inv.command, cfg) {
        Ok(p) => p,
        Err(e) => {
            let e = CliError::from(e);
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            manifest.finished_unix = Some(unix_now());
            manifest.write(&inv.out)?;
            return Err(e);
        }
    };
    let seconds = clock.elapsed().as_secs_f64();

    let scenario = cfg.name.as_str();
    for t in &produced.tables {
        let path = t.write_csv(&inv.out, scenario)?;
        manifest.add_output(&inv.out, &path)?;
    }
    let sidecar = Sidecar::new(&resolved.flat, &produced.tables, seconds)?;
    let path = sidecar.write(&inv.out, scenario)?;
    manifest.add_output(&inv.out, &path)?;
    manifest.warnings = produced.warnings;
    manifest.finished_unix = Some(unix_now());

    let mut summary = produced.summary;
    summary.push(format!("wrote {} files to {}", manifest.outputs.len(), inv.out.display()));
    if let Some(checks) = &produced.checks {
        let failed = checks.iter().filter(|c| !c.passed).count();
        if failed > 0 {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(format!("{failed} self-test checks failed"));
            manifest.write(&inv.out)?;
            return Err(CliError::Selftest {
                failed,
                total: checks.len(),
                report: summary,
            });
        }
    }
    manifest.status = RunStatus::Complete;
    manifest.write(&inv.out)?;
    Ok(Outcome { manifest, summary })
}

fn ensemble_warnings(stats: &EnsembleStats) -> Warnings {
    Warnings {
        truncation_warnings: stats.truncation_warnings,
        max_edge_population: stats.max_edge_population,
        observable_failures: stats.observable_failures,
        ..Default::default()
    }
}

fn describe(stats: &EnsembleStats) -> Vec<String> {
    let last = stats.times.len() - 1;
    let mut out = vec![format!(
        "{} trajectories, {} samples up to {} cycles",
        stats.n_trajectories,
        stats.times.len(),
        stats.times[last]
    )];
    for (name, s) in &stats.series {
        out.push(format!("  final {name}: {:.4e} ± {:.1e}", s.mean[last], s.stderr[last]));
    }
    out
}

fn produce(command: Command, cfg: &ScenarioConfig) -> sme_core::Result<Produced> {
    Ok(match command {
        Command::Run => match cfg.experiment {
            Experiment::Switchoff => {
                let r = run_switchoff(cfg)?;
                let d = &r.diagnostics;
                let mut diag = Table::new(
                    "switchoff_diagnostics",
                    &["switch_cycle", "negativity_vanished_at", "negativity_at_plus20", "mutual_information_at_plus20"],
                );
                diag.push(vec![
                    Cell::Num(d.switch_cycle),
                    Cell::Num(d.negativity_vanished_at.unwrap_or(f64::NAN)),
                    Cell::Num(d.negativity_at_plus20),
                    Cell::Num(d.mutual_information_at_plus20),
                ]);
                let mut summary = describe(&r.stats);
                summary.push(format!(
                    "switch-off at cycle {}: negativity below threshold at {:?}, MI/negativity at +20 = {:.3}",
                    d.switch_cycle,
                    d.negativity_vanished_at,
                    d.mi_to_negativity_at_plus20()
                ));
                Produced {
                    tables: vec![stats_table("timeseries", &r.stats), diag],
                    warnings: ensemble_warnings(&r.stats),
                    summary,
                    checks: None,
                }
            }
            Experiment::ModelII => {
                let stats = run_measurement_model_ii(cfg)?;
                Produced {
                    tables: vec![stats_table("timeseries", &stats)],
                    warnings: ensemble_warnings(&stats),
                    summary: describe(&stats),
                    checks: None,
                }
            }
            _ => {
                let stats = run_timeseries(cfg)?;
                Produced {
                    tables: vec![stats_table("timeseries", &stats)],
                    warnings: ensemble_warnings(&stats),
                    summary: describe(&stats),
                    checks: None,
                }
            }
        },
        Command::Sweep => match cfg.experiment {
            Experiment::AccuracySweep => {
                let s = run_accuracy_sweep(cfg)?;
                let summary = s
                    .cells
                    .iter()
                    .map(|c| {
                        format!(
                            "{:>6} steps/cycle {:<9} infidelity {:.3e} ± {:.1e}, failed {}, purity violations {}",
                            c.steps_per_cycle,
                            c.scheme.name(),
                            c.mean_infidelity,
                            c.stderr,
                            c.n_failed,
                            c.purity_violation_samples
                        )
                    })
                    .collect();
                let warnings = Warnings {
                    repaired_states: s.trajectories.iter().filter(|t| t.negative_eigenvalue_samples > 0).count(),
                    failed_runs: s.cells.iter().map(|c| c.n_failed).sum(),
                    ..Default::default()
                };
                Produced {
                    tables: s.tables(),
                    warnings,
                    summary,
                    checks: None,
                }
            }
            _ => {
                let s = run_radius_sweep(cfg)?;
                let summary = s
                    .cells
                    .iter()
                    .map(|c| {
                        format!(
                            "R = {:.3} nm (E_rot/E_tr = {:.3}): negativity {:.4e} ± {:.1e}",
                            c.radius_nm, c.energy_ratio, c.mean_negativity, c.stderr
                        )
                    })
                    .collect();
                let warnings = Warnings {
                    truncation_warnings: s.cells.iter().map(|c| c.truncation_warnings).sum(),
                    max_edge_population: s.cells.iter().map(|c| c.max_edge_population).fold(0.0, f64::max),
                    ..Default::default()
                };
                Produced {
                    tables: vec![s.table()],
                    warnings,
                    summary,
                    checks: None,
                }
            }
        },
        Command::Bench => {
            let b = run_benchmark(cfg)?;
            let mut summary: Vec<String> = b
                .rows
                .iter()
                .map(|r| format!("{:<16} dim {} {:.3e} s/step", r.method, r.dim, r.seconds_per_step))
                .collect();
            if let Some(ratio) = b.rouchon_over_milstein() {
                summary.push(format!("rouchon / milstein time per step: {ratio:.3}"));
            }
            Produced {
                tables: vec![b.table()],
                warnings: Warnings {
                    failed_runs: b.rows.iter().map(|r| r.restarts).sum(),
                    ..Default::default()
                },
                summary,
                checks: None,
            }
        }
        Command::Reference => {
            let table = reference_table(cfg)?;
            let summary = vec![format!("master equation over {} cycles, {} samples", cfg.n_cycles, table.rows.len())];
            Produced {
                tables: vec![table],
                warnings: Warnings::default(),
                summary,
                checks: None,
            }
        }
        Command::Selftest => {
            let checks = oracles::run_all();
            let mut table = Table::new("selftest", &["check", "value", "bound", "passed"]);
            for c in &checks {
                table.push(vec![
                    c.name.into(),
                    Cell::Num(c.value),
                    Cell::Text(c.bound.to_string()),
                    c.passed.into(),
                ]);
            }
            Produced {
                tables: vec![table],
                warnings: Warnings::default(),
                summary: checks.iter().map(|c| c.to_string()).collect(),
                checks: Some(checks),
            }
        }
    })
}

/// Averaged (unconditioned) evolution of the scenario's initial state.
pub fn reference_table(cfg: &ScenarioConfig) -> sme_core::Result<Table> {
    let dims = cfg.resolved_dims();
    let model = build_model_with(&cfg.physical, dims, cfg.measurement_model)?;
    let rho0 = initial_state(&cfg.physical, dims)?.into_matrix();
    let split = Bipartition::from(dims);
    let mut table = Table::new(
        "reference",
        &[
            "time_cycles",
            "purity",
            "energy_translational",
            "energy_rotational",
            "negativity",
            "mutual_information",
        ],
    );
    let two_pi = 2.0 * std::f64::consts::PI;
    run_master_equation(
        &model,
        &rho0,
        cfg.dt(),
        cfg.n_steps(),
        &cfg.schedule()?,
        cfg.sample_every(),
        |s| {
            let (et, er) = subsystem_energies(s.state, &dims, model.energy_ratio);
            table.push(vec![
                Cell::Num(s.time / two_pi),
                Cell::Num(purity_of(s.state)),
                Cell::Num(et),
                Cell::Num(er),
                Cell::Num(negativity_of(s.state, split)?),
                Cell::Num(mutual_information_of(s.state, split)?),
            ]);
            Ok(())
        },
    )?;
    Ok(table)
}
